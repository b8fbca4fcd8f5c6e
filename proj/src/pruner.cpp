#include "rtm/pruner.hpp"

#include <algorithm>
#include <chrono>

namespace rtm {
namespace {

// TriggerOnly (cts < now) is cts <= now - 1 on an integer time axis.
struct Atom {
  bool retain = false;
  Governing gov = Governing::kDeletion;
  Seconds window = 0;
};

Atom atom_of(const PruningRule& r) {
  switch (r.form) {
    case RuleForm::kRetainForever: return {true, Governing::kDeletion, 0};
    case RuleForm::kTriggerOnly: return {false, Governing::kCreation, 1};
    case RuleForm::kWindowBound: return {false, r.governing, r.window};
  }
  return {true, Governing::kDeletion, 0};
}

bool guards_match(const TypeSchema& schema, const Element& e, const std::vector<AttributeGuard>& guards) {
  for (const auto& g : guards) {
    const auto key = schema.find_attribute_key(g.attribute);
    if (!key) return false;
    const AttributeValue* v = e.attribute(*key);
    if (v == nullptr || *v != g.value) return false;
  }
  return true;
}

PruningRule rule_for(const PatternVariable& var, const std::string& node_type, const StructuralQuery& query,
                     bool trigger_stage) {
  PruningRule r;
  r.node_type = node_type;
  r.guards = var.guards;
  if (trigger_stage) {
    if (var.is_event_like()) {
      r.form = RuleForm::kTriggerOnly;
    } else {
      r.form = RuleForm::kWindowBound;
      r.window = 0;
      r.governing = Governing::kDeletion;
    }
    return r;
  }
  const auto constraints = query.kappa.for_variable(var.name);
  if (constraints.empty()) {
    r.form = RuleForm::kRetainForever;
    return r;
  }
  const auto& k = constraints.front();
  r.form = RuleForm::kWindowBound;
  switch (k.kind) {
    case ConstraintKind::kCreatedAt:
      r.form = RuleForm::kTriggerOnly;
      break;
    case ConstraintKind::kExistsAt:
      r.window = 0;
      r.governing = Governing::kDeletion;
      break;
    case ConstraintKind::kLifespanOverlap:
      r.window = k.window.upper;
      r.governing = Governing::kDeletion;
      break;
    case ConstraintKind::kCreatedWithin:
      r.window = k.window.upper;
      r.governing = Governing::kCreation;
      break;
  }
  return r;
}

}  // namespace

bool PruningRule::removable(Timepoint cts, Timepoint dts, Timepoint now) const noexcept {
  switch (form) {
    case RuleForm::kRetainForever: return false;
    case RuleForm::kTriggerOnly: return cts < now;
    case RuleForm::kWindowBound: {
      const Timepoint gov = governing == Governing::kDeletion ? dts : cts;
      if (gov.is_infinite()) return false;
      return gov.value <= now.value - window;
    }
  }
  return false;
}

bool PruningRule::dominates(const PruningRule& other) const noexcept {
  const Atom a = atom_of(*this);
  const Atom b = atom_of(other);
  if (a.retain) return true;
  if (b.retain) return false;
  return a.window >= b.window && (a.gov == Governing::kDeletion || b.gov == Governing::kCreation);
}

std::string PruningRule::to_string() const {
  std::string out = node_type;
  if (!guards.empty()) {
    out += '{';
    for (std::size_t i = 0; i < guards.size(); ++i) {
      if (i) out += ", ";
      out += guards[i].attribute + '=' + format_guard_value(guards[i].value);
    }
    out += '}';
  }
  out += ": ";
  switch (form) {
    case RuleForm::kTriggerOnly: out += "TriggerOnly"; break;
    case RuleForm::kRetainForever: out += "RetainForever"; break;
    case RuleForm::kWindowBound:
      out += "WindowBound(" + std::to_string(window) + ", " + (governing == Governing::kDeletion ? "dts" : "cts") + ")";
      break;
  }
  return out;
}

std::size_t PruneReport::removed_node_total() const noexcept {
  std::size_t n = 0;
  for (const auto& [type, count] : removed_nodes) n += count;
  return n;
}

std::vector<PruningRule> derive_rules(const std::vector<StructuralQuery>& queries, const TypeSchema& schema) {
  std::vector<PruningRule> out;
  for (TypeId n = 0; n < schema.size(); ++n) {
    if (!schema.is_node(n)) continue;
    const std::string& name = schema.name(n);
    std::vector<PruningRule> rules;
    bool unguarded_binder = false;
    for (const auto& q : queries) {
      for (std::size_t s = 0; s < q.stages.size(); ++s) {
        for (const auto& var : q.stages[s].pattern.variables) {
          const auto vt = schema.find(var.type);
          if (!vt || !schema.is_subtype(n, *vt)) continue;
          rules.push_back(rule_for(var, name, q, s == 0));
          if (var.guards.empty()) unguarded_binder = true;
        }
      }
    }
    if (rules.empty()) {
      out.push_back({name, {}, RuleForm::kRetainForever, 0, Governing::kDeletion});
      continue;
    }
    // Nodes matching none of the guarded variables can never be bound.
    if (!unguarded_binder) rules.push_back({name, {}, RuleForm::kTriggerOnly, 0, Governing::kCreation});

    // Collapse dominated atoms among rules with identical guards.
    std::vector<PruningRule> kept;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      bool dropped = false;
      for (std::size_t j = 0; j < rules.size() && !dropped; ++j) {
        if (i == j || rules[i].guards != rules[j].guards || !rules[j].dominates(rules[i])) continue;
        // Keep the first of mutually dominating (equivalent) rules.
        dropped = !rules[i].dominates(rules[j]) || j < i;
      }
      if (!dropped) kept.push_back(rules[i]);
    }
    out.insert(out.end(), kept.begin(), kept.end());
  }
  return out;
}

PruneReport prune(TemporalGraph& graph, const std::vector<PruningRule>& rules, Timepoint now) {
  const auto started = std::chrono::steady_clock::now();
  const TypeSchema& schema = graph.schema();
  std::vector<std::vector<const PruningRule*>> by_type(schema.size());
  for (const auto& r : rules) {
    const auto t = schema.find(r.node_type);
    if (!t || !schema.is_node(*t)) throw PruneError(PruneError::Code::kRuleTypeUnknown, "no node type '" + r.node_type + "'");
    by_type[*t].push_back(&r);
  }

  PruneReport report;
  report.at = now;
  std::vector<ElementId> victims;
  for (TypeId t = 0; t < schema.size(); ++t) {
    if (by_type[t].empty()) continue;
    const bool any_retain = std::any_of(by_type[t].begin(), by_type[t].end(), [](const PruningRule* r) {
      return r->form == RuleForm::kRetainForever && r->guards.empty();
    });
    if (any_retain) continue;
    victims.clear();
    for (ElementId id : graph.bucket(t)) {
      const Element& e = graph.element(id);
      bool applicable = false;
      bool removable = true;
      for (const PruningRule* r : by_type[t]) {
        if (!guards_match(schema, e, r->guards)) continue;
        applicable = true;
        if (!r->removable(e.cts, e.dts, now)) {
          removable = false;
          break;
        }
      }
      if (applicable && removable) victims.push_back(id);
    }
    for (ElementId id : victims) report.removed_edges += graph.erase_node(id);
    if (!victims.empty()) report.removed_nodes[schema.name(t)] += victims.size();
  }
  report.duration_ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - started).count());
  return report;
}

}  // namespace rtm
