#include "rtm/schema.hpp"

#include <algorithm>

namespace rtm {

std::string format_value(const AttributeValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  return std::get<std::string>(value);
}

TypeId TypeSchema::add_type(TypeInfo info) {
  if (info.name.empty()) throw SchemaError("type name must not be empty");
  if (by_name_.contains(info.name)) throw SchemaError("duplicate type name '" + info.name + "'");
  const auto id = static_cast<TypeId>(types_.size());
  for (const auto& attr : info.attributes) {
    if (!attribute_keys_.contains(attr.name)) {
      attribute_keys_.emplace(attr.name, static_cast<AttributeKey>(attribute_names_.size()));
      attribute_names_.push_back(attr.name);
    }
  }
  by_name_.emplace(info.name, id);
  types_.push_back(std::move(info));
  rebuild_closure();
  return id;
}

TypeId TypeSchema::add_node_type(std::string name, std::vector<AttributeDecl> attributes,
                                 const std::vector<std::string>& supertypes) {
  TypeInfo info;
  info.name = std::move(name);
  info.kind = TypeKind::kNode;
  for (const auto& super : supertypes) {
    auto it = by_name_.find(super);
    if (it == by_name_.end()) throw SchemaError("unknown supertype '" + super + "'");
    if (!is_node(it->second)) throw SchemaError("supertype '" + super + "' is an edge type");
    info.supertypes.push_back(it->second);
  }
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    for (std::size_t j = i + 1; j < attributes.size(); ++j) {
      if (attributes[i].name == attributes[j].name) {
        throw SchemaError("duplicate attribute '" + attributes[i].name + "' on '" + info.name + "'");
      }
    }
  }
  info.attributes = std::move(attributes);
  return add_type(std::move(info));
}

TypeId TypeSchema::add_edge_type(std::string name, std::string_view source, std::string_view target) {
  TypeInfo info;
  info.name = std::move(name);
  info.kind = TypeKind::kEdge;
  const auto src = find(source);
  const auto tgt = find(target);
  if (!src || !is_node(*src)) throw SchemaError("unknown edge source type '" + std::string(source) + "'");
  if (!tgt || !is_node(*tgt)) throw SchemaError("unknown edge target type '" + std::string(target) + "'");
  info.source = *src;
  info.target = *tgt;
  return add_type(std::move(info));
}

std::optional<TypeId> TypeSchema::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

TypeId TypeSchema::id(std::string_view name) const {
  if (auto found = find(name)) return *found;
  throw SchemaError("unknown type '" + std::string(name) + "'");
}

std::optional<AttributeDecl> TypeSchema::attribute(TypeId type, std::string_view name) const {
  for (TypeId t = 0; t < types_.size(); ++t) {
    if (!is_subtype(type, t)) continue;
    for (const auto& decl : types_[t].attributes) {
      if (decl.name == name) return decl;
    }
  }
  return std::nullopt;
}

AttributeKey TypeSchema::attribute_key(std::string_view name) const {
  if (auto key = find_attribute_key(name)) return *key;
  throw SchemaError("unknown attribute '" + std::string(name) + "'");
}

std::optional<AttributeKey> TypeSchema::find_attribute_key(std::string_view name) const {
  auto it = attribute_keys_.find(std::string(name));
  if (it == attribute_keys_.end()) return std::nullopt;
  return it->second;
}

void TypeSchema::rebuild_closure() {
  const std::size_t n = types_.size();
  closure_.assign(n * n, 0);
  // Supertypes always precede subtypes, so a single forward pass suffices.
  for (std::size_t t = 0; t < n; ++t) {
    closure_[t * n + t] = 1;
    for (TypeId super : types_[t].supertypes) {
      for (std::size_t s = 0; s < n; ++s) {
        if (closure_[super * n + s]) closure_[t * n + s] = 1;
      }
    }
  }
  subtypes_.assign(n, {});
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      if (closure_[s * n + t]) subtypes_[t].push_back(static_cast<TypeId>(s));
    }
  }
}

}  // namespace rtm
