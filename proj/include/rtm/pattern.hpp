#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rtm/schema.hpp"

namespace rtm {

/// `value = "op"`-style equality predicate on a node attribute.
struct AttributeGuard {
  std::string attribute;
  AttributeValue value;
  bool operator==(const AttributeGuard&) const = default;
};

/// A node variable declared by a pattern.
struct PatternVariable {
  std::string name;
  std::string type;
  std::vector<AttributeGuard> guards;
  bool operator==(const PatternVariable&) const = default;

  /// Value-carrying variables (those with attribute guards) stand for
  /// monitoring observations rather than long-lived entities.
  bool is_event_like() const noexcept { return !guards.empty(); }
};

/// An anonymous edge of `edge_type` from `source` to `target`. Endpoints may
/// name variables of the same pattern or of an enclosing one.
struct Connection {
  std::string edge_type;
  std::string source;
  std::string target;
  bool operator==(const Connection&) const = default;
};

struct Pattern {
  std::vector<PatternVariable> variables;
  std::vector<Connection> connections;
  bool operator==(const Pattern&) const = default;

  const PatternVariable* variable(std::string_view name) const noexcept {
    for (const auto& v : variables) {
      if (v.name == name) return &v;
    }
    return nullptr;
  }
};

std::string format_guard_value(const AttributeValue& value);
std::string format_pattern(const Pattern& pattern);

}  // namespace rtm
