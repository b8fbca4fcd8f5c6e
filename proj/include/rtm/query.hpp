#pragma once

#include <string>
#include <vector>

#include "rtm/formula.hpp"
#include "rtm/pattern.hpp"
#include "rtm/timepoint.hpp"

namespace rtm {

/// Timestamp constraints relative to the evaluation timepoint x.
enum class ConstraintKind : std::uint8_t {
  kCreatedAt,        // v.cts = x
  kExistsAt,         // v.cts <= x && v.dts > x
  kLifespanOverlap,  // v.cts < x - a && v.dts > x - b
  kCreatedWithin,    // x - b <= v.cts && v.cts <= x - a
};

struct TimestampConstraint {
  std::string variable;
  ConstraintKind kind = ConstraintKind::kExistsAt;
  Interval window;  // [a, b] for the two windowed kinds
  bool operator==(const TimestampConstraint&) const = default;

  bool holds(Timepoint cts, Timepoint dts, Timepoint x) const noexcept;
  std::string to_string() const;
};

/// The constraint set kappa.
struct ConstraintSet {
  std::vector<TimestampConstraint> constraints;
  bool operator==(const ConstraintSet&) const = default;

  std::vector<TimestampConstraint> for_variable(const std::string& name) const;
};

struct TriggerSpec {
  std::vector<std::string> node_types;  // declaration order, deduplicated
  std::string anchor_variable;          // the variable printed as `alpha.cts = x`
  bool operator==(const TriggerSpec&) const = default;
};

/// One pattern-matching step. Stage 0 is the trigger pattern.
struct Stage {
  Pattern pattern;
  std::vector<std::string> outer;  // enclosing-scope variables it connects to
  bool operator==(const Stage&) const = default;
};

/// Nested-condition skeleton over stages, evaluated once a trigger match is
/// found: true yields SATISFIED, false yields VIOLATED.
struct Condition {
  enum class Kind : std::uint8_t { kExists, kNot, kAnd, kImplies };
  Kind kind = Kind::kExists;
  std::size_t stage = 0;             // kExists
  std::vector<Condition> children;   // kExists: {} or {nested}
  bool operator==(const Condition&) const = default;
};

struct StructuralQuery {
  TriggerSpec trigger;
  std::vector<Stage> stages;
  Condition body;
  ConstraintSet kappa;
  bool operator==(const StructuralQuery&) const = default;

  const Stage& trigger_stage() const { return stages.front(); }
};

struct TranslateOptions {
  /// Applied to `once` operators that do not name a semantics.
  PastSemantics default_semantics = PastSemantics::kLifespan;
};

/// Lowers a formula of the supported fragment (top-level forall-new over
/// exists / not-exists / and / implies / once) into a structural query.
StructuralQuery translate(const Formula& formula, const TranslateOptions& options = {});

std::vector<std::string> derive_trigger_types(const Formula& formula);

/// Deterministic multi-line rendering used for golden tests.
std::string format_plan(const StructuralQuery& query);

}  // namespace rtm
