#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace rtm {

using TypeId = std::uint32_t;
using AttributeKey = std::uint32_t;

/// Attribute payloads are either integers or strings.
using AttributeValue = std::variant<std::int64_t, std::string>;

/// Attribute assignment by name, as carried by creation events.
using AttributeMap = std::vector<std::pair<std::string, AttributeValue>>;

enum class AttributeKind : std::uint8_t { kInteger, kString };

std::string format_value(const AttributeValue& value);

struct AttributeDecl {
  std::string name;
  AttributeKind kind = AttributeKind::kString;
};

enum class TypeKind : std::uint8_t { kNode, kEdge };

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The type graph. Node types form a supertype DAG; edge types connect two
/// node types. Supertypes must be declared before their subtypes, which
/// keeps the hierarchy acyclic by construction.
class TypeSchema {
 public:
  struct TypeInfo {
    std::string name;
    TypeKind kind = TypeKind::kNode;
    std::vector<TypeId> supertypes;             // direct
    std::vector<AttributeDecl> attributes;      // declared here
    TypeId source = 0;                          // edges only
    TypeId target = 0;                          // edges only
  };

  TypeId add_node_type(std::string name, std::vector<AttributeDecl> attributes = {},
                       const std::vector<std::string>& supertypes = {});
  TypeId add_edge_type(std::string name, std::string_view source, std::string_view target);

  std::optional<TypeId> find(std::string_view name) const;
  /// Throws SchemaError for unknown names.
  TypeId id(std::string_view name) const;

  const TypeInfo& info(TypeId type) const { return types_.at(type); }
  const std::string& name(TypeId type) const { return types_.at(type).name; }
  std::size_t size() const noexcept { return types_.size(); }
  bool is_node(TypeId type) const { return types_.at(type).kind == TypeKind::kNode; }

  /// Reflexive-transitive supertype relation.
  bool is_subtype(TypeId sub, TypeId super) const noexcept {
    return closure_[static_cast<std::size_t>(sub) * types_.size() + super] != 0;
  }
  /// All types t with is_subtype(t, type), including `type` itself.
  const std::vector<TypeId>& subtypes(TypeId type) const { return subtypes_.at(type); }

  /// Attribute declaration visible on `type` (own or inherited).
  std::optional<AttributeDecl> attribute(TypeId type, std::string_view name) const;

  /// Interned attribute names; keys are stable for the schema's lifetime.
  AttributeKey attribute_key(std::string_view name) const;
  std::optional<AttributeKey> find_attribute_key(std::string_view name) const;
  const std::string& attribute_name(AttributeKey key) const { return attribute_names_.at(key); }

 private:
  TypeId add_type(TypeInfo info);
  void rebuild_closure();

  std::vector<TypeInfo> types_;
  std::unordered_map<std::string, TypeId> by_name_;
  std::vector<char> closure_;
  std::vector<std::vector<TypeId>> subtypes_;
  std::vector<std::string> attribute_names_;
  std::unordered_map<std::string, AttributeKey> attribute_keys_;
};

}  // namespace rtm
