#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtm/graph.hpp"
#include "rtm/pattern.hpp"
#include "rtm/query.hpp"

namespace rtm {

enum class RuleForm : std::uint8_t {
  kTriggerOnly,    // removable once analyzed: cts < now
  kWindowBound,    // removable when governing timestamp <= now - window
  kRetainForever,
};

enum class Governing : std::uint8_t { kDeletion, kCreation };  // dts / cts

/// Retention rule for nodes of exactly `node_type` whose attributes match
/// `guards`. A node is removable iff at least one rule applies to it and
/// every applicable rule allows removal.
struct PruningRule {
  std::string node_type;
  std::vector<AttributeGuard> guards;
  RuleForm form = RuleForm::kRetainForever;
  Seconds window = 0;
  Governing governing = Governing::kDeletion;
  bool operator==(const PruningRule&) const = default;

  bool removable(Timepoint cts, Timepoint dts, Timepoint now) const noexcept;
  /// True if whenever this rule allows removal, `other` does too.
  bool dominates(const PruningRule& other) const noexcept;
  std::string to_string() const;
};

/// One rule set for all queries: per concrete node type, the conjunction of
/// the retention needs of every variable that can bind it, with dominated
/// atoms dropped. Types no variable can bind are retained forever.
///
/// Soundness relies on new edges never attaching to already analyzed
/// trigger elements (true for the monitoring workload, where every
/// observation arrives together with its edge).
std::vector<PruningRule> derive_rules(const std::vector<StructuralQuery>& queries, const TypeSchema& schema);

class PruneError : public std::runtime_error {
 public:
  enum class Code : std::uint8_t { kRuleTypeUnknown };
  PruneError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

struct PruneReport {
  Timepoint at;
  std::map<std::string, std::size_t> removed_nodes;  // by type name
  std::size_t removed_edges = 0;
  std::uint64_t duration_ns = 0;

  std::size_t removed_node_total() const noexcept;
};

/// Physically removes every node the rules allow at `now`, with its incident
/// edges. Precondition: all events up to `now` are applied and their
/// evaluation flushed, and later events carry timestamps greater than `now`.
PruneReport prune(TemporalGraph& graph, const std::vector<PruningRule>& rules, Timepoint now);

}  // namespace rtm
