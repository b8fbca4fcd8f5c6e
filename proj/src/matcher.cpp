#include "rtm/matcher.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <set>

namespace rtm {

void Binding::set(std::string variable, ElementId id) {
  auto it = std::lower_bound(entries.begin(), entries.end(), variable,
                             [](const auto& entry, const std::string& name) { return entry.first < name; });
  if (it != entries.end() && it->first == variable) {
    it->second = id;
  } else {
    entries.emplace(it, std::move(variable), id);
  }
}

std::optional<ElementId> Binding::get(std::string_view variable) const {
  for (const auto& [name, id] : entries) {
    if (name == variable) return id;
  }
  return std::nullopt;
}

std::string Binding::to_string() const {
  std::string out;
  for (const auto& [name, id] : entries) {
    if (!out.empty()) out += ';';
    out += name + '=' + std::to_string(id);
  }
  return out;
}

const char* to_string(VerdictStatus status) noexcept {
  return status == VerdictStatus::kSatisfied ? "SATISFIED" : "VIOLATED";
}

bool verdict_less(const MatchVerdict& a, const MatchVerdict& b) {
  if (a.trigger_time != b.trigger_time) return a.trigger_time < b.trigger_time;
  if (a.trigger_binding != b.trigger_binding) return a.trigger_binding < b.trigger_binding;
  return a.status < b.status;
}

void sort_verdicts(std::vector<MatchVerdict>& verdicts) { std::stable_sort(verdicts.begin(), verdicts.end(), verdict_less); }

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Var {
  std::string name;
  TypeId type = 0;
  std::vector<std::pair<AttributeKey, AttributeValue>> guards;
  std::vector<TimestampConstraint> kappa;
};

struct Conn {
  TypeId edge_type = 0;
  std::size_t source = 0;
  std::size_t target = 0;
};

struct CompiledStage {
  std::vector<std::size_t> vars;
  std::vector<Conn> connections;
};

enum class Mode : std::uint8_t { kSnapshot, kHistory };

[[noreturn]] void mismatch(const std::string& what) { throw QueryError(QueryErrorCode::kSchemaMismatch, what); }

}  // namespace

struct Monitor::Impl {
  StructuralQuery query;
  TemporalGraph* graph = nullptr;
  std::vector<Var> vars;
  std::vector<CompiledStage> stages;
  std::vector<char> trigger_type;  // indexed by TypeId
  std::vector<std::string> diagnostics;

  std::vector<ElementId> pending;
  Timepoint pending_time;
  std::set<std::vector<ElementId>> reported;  // trigger bindings of the current timepoint
  std::optional<Timepoint> reported_time;

  VerdictSink sink;
  std::vector<MatchVerdict> buffer;
  std::uint64_t evaluation_ns = 0;
  Subscription creation_sub;
  Subscription advance_sub;

  // -- compilation --------------------------------------------------------

  void compile() {
    const TypeSchema& schema = graph->schema();
    std::map<std::string, std::size_t> index;
    for (const auto& stage : query.stages) {
      for (const auto& v : stage.pattern.variables) {
        const auto type = schema.find(v.type);
        if (!type || !schema.is_node(*type)) mismatch("unknown node type '" + v.type + "'");
        Var var{v.name, *type, {}, query.kappa.for_variable(v.name)};
        for (const auto& g : v.guards) {
          const auto decl = schema.attribute(*type, g.attribute);
          if (!decl) mismatch(v.type + " has no attribute '" + g.attribute + "'");
          if (std::holds_alternative<std::int64_t>(g.value) != (decl->kind == AttributeKind::kInteger)) {
            mismatch("guard on '" + g.attribute + "' has the wrong value kind");
          }
          var.guards.emplace_back(schema.attribute_key(g.attribute), g.value);
        }
        index[v.name] = vars.size();
        vars.push_back(std::move(var));
      }
    }
    for (const auto& c : query.kappa.constraints) {
      if (!index.contains(c.variable)) mismatch("constraint on undeclared variable '" + c.variable + "'");
    }
    for (std::size_t s = 0; s < query.stages.size(); ++s) {
      const Pattern& p = query.stages[s].pattern;
      CompiledStage cs;
      for (const auto& v : p.variables) cs.vars.push_back(index.at(v.name));
      for (const auto& c : p.connections) {
        const auto type = schema.find(c.edge_type);
        if (!type || schema.is_node(*type)) mismatch("unknown edge type '" + c.edge_type + "'");
        if (!index.contains(c.source) || !index.contains(c.target)) {
          throw QueryError(QueryErrorCode::kUnboundVariable, c.source + " -" + c.edge_type + "-> " + c.target);
        }
        Conn conn{*type, index.at(c.source), index.at(c.target)};
        const auto& info = schema.info(*type);
        auto compatible = [&](TypeId var_type, TypeId end) {
          return schema.is_subtype(var_type, end) || schema.is_subtype(end, var_type);
        };
        if (!compatible(vars[conn.source].type, info.source) || !compatible(vars[conn.target].type, info.target)) {
          mismatch("edge type '" + c.edge_type + "' cannot connect " + c.source + " to " + c.target);
        }
        cs.connections.push_back(conn);
      }
      stages.push_back(std::move(cs));
    }

    trigger_type.assign(schema.size(), 0);
    for (std::size_t v : stages.front().vars) {
      for (TypeId sub : schema.subtypes(vars[v].type)) trigger_type[sub] = 1;
    }
    report_disconnected(index);
  }

  void report_disconnected(const std::map<std::string, std::size_t>& index) {
    for (std::size_t s = 0; s < stages.size(); ++s) {
      const auto& cs = stages[s];
      std::set<std::size_t> reached;
      if (s == 0) {
        if (!cs.vars.empty()) reached.insert(cs.vars.front());
      } else {
        for (const auto& name : query.stages[s].outer) reached.insert(index.at(name));
      }
      for (bool grew = true; grew;) {
        grew = false;
        for (const auto& c : cs.connections) {
          if (reached.contains(c.source) != reached.contains(c.target)) {
            reached.insert(c.source);
            reached.insert(c.target);
            grew = true;
          }
        }
      }
      std::string missing;
      for (std::size_t v : cs.vars) {
        if (!reached.contains(v)) missing += (missing.empty() ? "" : ", ") + vars[v].name;
      }
      if (!missing.empty()) {
        diagnostics.push_back("stage" + std::to_string(s) + ": {" + missing +
                              "} not connected to bound variables; falling back to type index scans");
      }
    }
  }

  // -- matching -----------------------------------------------------------

  bool guards_hold(const Var& var, const Element& e) const {
    for (const auto& [key, value] : var.guards) {
      const AttributeValue* actual = e.attribute(key);
      if (actual == nullptr || *actual != value) return false;
    }
    return true;
  }

  bool edge_usable(const Element& edge, TypeId type, Mode mode, Timepoint x) const {
    return edge.type == type && (mode == Mode::kHistory || edge.exists_at(x));
  }

  bool connected(const Conn& c, ElementId src, ElementId tgt, Mode mode, Timepoint x) const {
    const Element& s = graph->element(src);
    const Element& t = graph->element(tgt);
    const bool from_source = s.out_edges.size() <= t.in_edges.size();
    for (ElementId eid : from_source ? s.out_edges : t.in_edges) {
      const Element& edge = graph->element(eid);
      if (edge_usable(edge, c.edge_type, mode, x) && edge.source == src && edge.target == tgt) return true;
    }
    return false;
  }

  // Tentatively binds var `v` to `id` and checks everything decidable now.
  bool admit(const CompiledStage& cs, std::size_t v, ElementId id, std::size_t via, std::vector<ElementId>& b,
             Mode mode, Timepoint x) const {
    const Element* e = graph->find(id);
    if (e == nullptr || !e->is_node()) return false;
    const Var& var = vars[v];
    if (!graph->schema().is_subtype(e->type, var.type)) return false;
    if (mode == Mode::kSnapshot) {
      if (!e->exists_at(x)) return false;
    } else {
      for (const auto& k : var.kappa) {
        if (!k.holds(e->cts, e->dts, x)) return false;
      }
    }
    if (!guards_hold(var, *e)) return false;
    if (std::find(b.begin(), b.end(), id) != b.end()) return false;
    b[v] = id;
    for (std::size_t i = 0; i < cs.connections.size(); ++i) {
      const Conn& c = cs.connections[i];
      if (i == via || (c.source != v && c.target != v)) continue;
      if (b[c.source] == kNoElement || b[c.target] == kNoElement) continue;
      if (!connected(c, b[c.source], b[c.target], mode, x)) {
        b[v] = kNoElement;
        return false;
      }
    }
    return true;
  }

  // Completes the stage match; on success the binding keeps the match, on
  // failure it is restored.
  template <class Complete>
  bool extend(const CompiledStage& cs, std::vector<ElementId>& b, Mode mode, Timepoint x, Complete&& complete) const {
    std::size_t next = kNone;
    std::size_t via = kNone;
    std::size_t best = kNone;
    for (std::size_t i = 0; i < cs.connections.size(); ++i) {
      const Conn& c = cs.connections[i];
      const bool src_bound = b[c.source] != kNoElement;
      const bool tgt_bound = b[c.target] != kNoElement;
      if (src_bound == tgt_bound) continue;
      const std::size_t v = src_bound ? c.target : c.source;
      const std::size_t cost = graph->count_of_type(vars[v].type);
      if (cost < best) {
        best = cost;
        next = v;
        via = i;
      }
    }
    if (next == kNone) {
      for (std::size_t v : cs.vars) {
        if (b[v] != kNoElement) continue;
        const std::size_t cost = graph->count_of_type(vars[v].type);
        if (cost < best) {
          best = cost;
          next = v;
        }
      }
    }
    if (next == kNone) return complete();

    auto attempt = [&](ElementId id) {
      if (!admit(cs, next, id, via, b, mode, x)) return false;
      if (extend(cs, b, mode, x, complete)) return true;
      b[next] = kNoElement;
      return false;
    };

    if (via != kNone) {
      const Conn& c = cs.connections[via];
      const bool outward = b[c.source] != kNoElement;
      const Element& anchor = graph->element(outward ? b[c.source] : b[c.target]);
      for (ElementId eid : outward ? anchor.out_edges : anchor.in_edges) {
        const Element& edge = graph->element(eid);
        if (!edge_usable(edge, c.edge_type, mode, x)) continue;
        if (attempt(outward ? edge.target : edge.source)) return true;
      }
      return false;
    }
    for (TypeId sub : graph->schema().subtypes(vars[next].type)) {
      for (ElementId id : graph->bucket(sub)) {
        if (attempt(id)) return true;
      }
    }
    return false;
  }

  // On false the binding is left unchanged.
  bool holds(const Condition& c, std::vector<ElementId>& b, Timepoint x) const {
    switch (c.kind) {
      case Condition::Kind::kExists:
        return extend(stages[c.stage], b, Mode::kHistory, x,
                      [&] { return c.children.empty() || holds(c.children.front(), b, x); });
      case Condition::Kind::kNot: {
        std::vector<ElementId> scratch = b;
        return !holds(c.children.front(), scratch, x);
      }
      case Condition::Kind::kAnd: {
        const std::vector<ElementId> saved = b;
        if (holds(c.children[0], b, x) && holds(c.children[1], b, x)) return true;
        b = saved;
        return false;
      }
      case Condition::Kind::kImplies: {
        std::vector<ElementId> scratch = b;
        if (!holds(c.children[0], scratch, x)) return true;
        return holds(c.children[1], b, x);
      }
    }
    return false;
  }

  MatchVerdict verdict(const std::vector<ElementId>& b, Timepoint x) const {
    MatchVerdict out;
    out.trigger_time = x;
    for (std::size_t v : stages.front().vars) out.trigger_binding.set(vars[v].name, b[v]);
    std::vector<ElementId> body = b;
    if (holds(query.body, body, x)) {
      out.status = VerdictStatus::kSatisfied;
      Binding witness;
      for (std::size_t s = 1; s < stages.size(); ++s) {
        for (std::size_t v : stages[s].vars) {
          if (body[v] != kNoElement) witness.set(vars[v].name, body[v]);
        }
      }
      out.witness = std::move(witness);
    }
    return out;
  }

  std::vector<MatchVerdict> evaluate_pending() {
    std::vector<MatchVerdict> out;
    if (pending.empty()) return out;
    const auto started = std::chrono::steady_clock::now();
    const Timepoint x = pending_time;
    if (reported_time != x) {
      reported.clear();
      reported_time = x;
    }
    const CompiledStage& trigger = stages.front();
    std::vector<ElementId> b(vars.size(), kNoElement);
    for (ElementId anchor : pending) {
      for (std::size_t v : trigger.vars) {
        if (!admit(trigger, v, anchor, kNone, b, Mode::kSnapshot, x)) continue;
        extend(trigger, b, Mode::kSnapshot, x, [&] {
          std::vector<ElementId> key;
          key.reserve(trigger.vars.size());
          for (std::size_t t : trigger.vars) key.push_back(b[t]);
          if (reported.insert(std::move(key)).second) out.push_back(verdict(b, x));
          return false;  // enumerate every trigger match
        });
        b[v] = kNoElement;
      }
    }
    pending.clear();
    evaluation_ns += static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - started).count());
    return out;
  }

  void emit(std::vector<MatchVerdict>&& verdicts) {
    for (auto& v : verdicts) {
      if (sink) {
        sink(v);
      } else {
        buffer.push_back(std::move(v));
      }
    }
  }

  std::vector<MatchVerdict> on_creation(ElementId id, Timepoint now) {
    std::vector<MatchVerdict> out;
    if (!pending.empty() && now > pending_time) out = evaluate_pending();
    const Element* e = graph->find(id);
    if (e != nullptr && e->is_node() && trigger_type[e->type]) {
      pending.push_back(id);
      pending_time = now;
    }
    return out;
  }
};

Monitor::Monitor(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Monitor::~Monitor() = default;

std::vector<MatchVerdict> Monitor::on_creation(ElementId id, Timepoint now) { return impl_->on_creation(id, now); }

std::vector<MatchVerdict> Monitor::flush() {
  std::vector<MatchVerdict> out = std::move(impl_->buffer);
  impl_->buffer.clear();
  auto fresh = impl_->evaluate_pending();
  if (impl_->sink) {
    impl_->emit(std::move(fresh));
  } else {
    out.insert(out.end(), std::make_move_iterator(fresh.begin()), std::make_move_iterator(fresh.end()));
  }
  return out;
}

void Monitor::set_sink(VerdictSink sink) { impl_->sink = std::move(sink); }
const StructuralQuery& Monitor::query() const noexcept { return impl_->query; }
const std::vector<std::string>& Monitor::diagnostics() const noexcept { return impl_->diagnostics; }
std::uint64_t Monitor::evaluation_ns() const noexcept { return impl_->evaluation_ns; }
std::size_t Monitor::pending_anchors() const noexcept { return impl_->pending.size(); }
std::size_t Monitor::dedup_size() const noexcept { return impl_->reported.size(); }

std::unique_ptr<Monitor> attach(const StructuralQuery& query, TemporalGraph& graph) {
  if (query.stages.empty()) throw QueryError(QueryErrorCode::kNoTrigger, "query has no trigger stage");
  auto impl = std::make_unique<Monitor::Impl>();
  impl->query = query;
  impl->graph = &graph;
  impl->compile();
  Monitor::Impl* raw = impl.get();
  std::vector<std::string> types;
  for (const auto& v : query.trigger_stage().pattern.variables) types.push_back(v.type);
  impl->creation_sub = graph.subscribe_creation(types, [raw](const Element& e) { raw->emit(raw->on_creation(e.id, e.cts)); });
  impl->advance_sub = graph.subscribe_advance([raw](Timepoint, Timepoint) { raw->emit(raw->evaluate_pending()); });
  return std::unique_ptr<Monitor>(new Monitor(std::move(impl)));
}

}  // namespace rtm
