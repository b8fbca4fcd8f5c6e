// Reference evaluator. Shares only the query and schema types with the
// incremental matcher: storage, edge lookup, timestamp arithmetic and
// enumeration are implemented separately and exhaustively.

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "rtm/matcher.hpp"

namespace rtm {
namespace {

constexpr std::int64_t kOpen = std::numeric_limits<std::int64_t>::max();
constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();

struct Record {
  bool node = true;
  TypeId type = 0;
  AttributeMap attributes;
  std::int64_t cts = 0;
  std::int64_t dts = kOpen;
  ElementId source = kNoElement;
  ElementId target = kNoElement;
};

struct OVar {
  std::string name;
  TypeId type = 0;
  std::vector<AttributeGuard> guards;
  std::vector<TimestampConstraint> kappa;
};

struct OConn {
  TypeId type;
  std::size_t src;
  std::size_t tgt;
};

struct OStage {
  std::vector<std::size_t> vars;
  std::vector<OConn> conns;
};

bool satisfied(const TimestampConstraint& k, std::int64_t cts, std::int64_t dts, std::int64_t x) {
  const std::int64_t a = k.window.lower;
  const std::int64_t b = k.window.upper;
  switch (k.kind) {
    case ConstraintKind::kCreatedAt: return cts == x;
    case ConstraintKind::kExistsAt: return !(cts > x) && !(dts <= x);
    case ConstraintKind::kLifespanOverlap: return cts + a < x && (dts == kOpen || dts + b > x);
    case ConstraintKind::kCreatedWithin: return cts + b >= x && cts + a <= x;
  }
  return false;
}

class Oracle {
 public:
  Oracle(const StructuralQuery& query, const TypeSchema& schema)
      : query_(query), schema_(schema), by_type_(schema.size()) {
    std::map<std::string, std::size_t> index;
    for (const auto& st : query.stages) {
      OStage os;
      for (const auto& v : st.pattern.variables) {
        const auto t = schema.find(v.type);
        if (!t || !schema.is_node(*t)) throw QueryError(QueryErrorCode::kSchemaMismatch, "unknown node type '" + v.type + "'");
        index[v.name] = vars_.size();
        os.vars.push_back(vars_.size());
        vars_.push_back({v.name, *t, v.guards, query.kappa.for_variable(v.name)});
      }
      stages_.push_back(std::move(os));
    }
    for (std::size_t s = 0; s < query.stages.size(); ++s) {
      for (const auto& c : query.stages[s].pattern.connections) {
        const auto t = schema.find(c.edge_type);
        if (!t || schema.is_node(*t)) throw QueryError(QueryErrorCode::kSchemaMismatch, "unknown edge type '" + c.edge_type + "'");
        stages_[s].conns.push_back({*t, index.at(c.source), index.at(c.target)});
      }
    }
  }

  std::vector<MatchVerdict> run(const EventSequence& events) {
    std::size_t i = 0;
    while (i < events.size()) {
      const std::int64_t x = events[i].timestamp.value;
      if (x < last_) throw ModelError(ModelErrorCode::kTimestampRegression, "events out of order");
      bool node_created = false;
      for (; i < events.size() && events[i].timestamp.value == x; ++i) node_created |= apply(events[i]);
      last_ = x;
      if (node_created) evaluate(x);
      created_now_.clear();
    }
    sort_verdicts(out_);
    return std::move(out_);
  }

 private:
  bool apply(const ChangeEvent& ev) {
    const std::int64_t ts = ev.timestamp.value;
    if (ts < 0 || ts == kOpen) throw ModelError(ModelErrorCode::kTimestampRegression, "invalid timestamp");
    if (const auto* n = std::get_if<CreateNode>(&ev.action)) {
      const auto t = schema_.find(n->type);
      if (!t || !schema_.is_node(*t)) throw ModelError(ModelErrorCode::kUnknownType, n->type);
      std::set<std::string> seen;
      for (const auto& [name, value] : n->attributes) {
        const auto decl = schema_.attribute(*t, name);
        const bool is_int = std::holds_alternative<std::int64_t>(value);
        if (!decl || is_int != (decl->kind == AttributeKind::kInteger) || !seen.insert(name).second) {
          throw ModelError(ModelErrorCode::kAttributeMismatch, name);
        }
      }
      records_.push_back({true, *t, n->attributes, ts, kOpen, kNoElement, kNoElement});
      by_type_[*t].push_back(records_.size());
      created_now_.push_back(records_.size());
      return true;
    }
    if (const auto* e = std::get_if<CreateEdge>(&ev.action)) {
      const auto t = schema_.find(e->type);
      if (!t || schema_.is_node(*t)) throw ModelError(ModelErrorCode::kUnknownType, e->type);
      const Record* s = lookup(e->source);
      const Record* g = lookup(e->target);
      if (!s || !g || !s->node || !g->node || s->dts != kOpen || g->dts != kOpen) {
        throw ModelError(ModelErrorCode::kEndpointMissingOrDead, e->type);
      }
      const auto& info = schema_.info(*t);
      if (!schema_.is_subtype(s->type, info.source) || !schema_.is_subtype(g->type, info.target)) {
        throw ModelError(ModelErrorCode::kEndpointTypeMismatch, e->type);
      }
      records_.push_back({false, *t, {}, ts, kOpen, e->source, e->target});
      edges_[{*t, e->source, e->target}].push_back(records_.size());
      return false;
    }
    const auto& d = std::get<DeleteElement>(ev.action);
    Record* r = lookup(d.target);
    if (!r) throw ModelError(ModelErrorCode::kUnknownElement, std::to_string(d.target));
    if (r->dts != kOpen) throw ModelError(ModelErrorCode::kDoubleDeletion, std::to_string(d.target));
    r->dts = ts;
    return false;
  }

  Record* lookup(ElementId id) {
    if (id == kNoElement || id > records_.size()) return nullptr;
    return &records_[id - 1];
  }

  bool guards_match(const OVar& v, const Record& r) const {
    for (const auto& g : v.guards) {
      auto it = std::find_if(r.attributes.begin(), r.attributes.end(), [&](const auto& kv) { return kv.first == g.attribute; });
      if (it == r.attributes.end() || !(it->second == g.value)) return false;
    }
    return true;
  }

  bool alive(const Record& r, std::int64_t x) const { return r.cts <= x && x < r.dts; }

  bool edge_between(const OConn& c, ElementId s, ElementId t, std::int64_t x, bool snapshot) const {
    auto it = edges_.find({c.type, s, t});
    if (it == edges_.end()) return false;
    if (!snapshot) return true;
    return std::any_of(it->second.begin(), it->second.end(), [&](ElementId id) { return alive(records_[id - 1], x); });
  }

  // Visiting order: each variable follows one it is connected to, when
  // possible, starting from `seeds` (already bound) or the first variable.
  std::vector<std::size_t> order(const OStage& st, std::vector<std::size_t> placed, std::size_t first) const {
    std::vector<std::size_t> out;
    auto take = [&](std::size_t v) {
      out.push_back(v);
      placed.push_back(v);
    };
    auto is_placed = [&](std::size_t v) { return std::find(placed.begin(), placed.end(), v) != placed.end(); };
    if (first != kAbsent) take(first);
    while (out.size() < st.vars.size()) {
      std::size_t pick = kAbsent;
      for (std::size_t v : st.vars) {
        if (is_placed(v)) continue;
        const bool linked = std::any_of(st.conns.begin(), st.conns.end(), [&](const OConn& c) {
          return (c.src == v && is_placed(c.tgt)) || (c.tgt == v && is_placed(c.src));
        });
        if (linked) {
          pick = v;
          break;
        }
        if (pick == kAbsent) pick = v;
      }
      take(pick);
    }
    return out;
  }

  // Exhaustive backtracking over `seq`. `accept` returns true to stop.
  template <class Filter, class Accept>
  bool enumerate(const OStage& st, const std::vector<std::size_t>& seq, std::size_t pos, std::vector<ElementId>& b,
                 std::int64_t x, bool snapshot, const std::vector<ElementId>* first_pool, const Filter& candidate_ok,
                 const Accept& accept) const {
    if (pos == seq.size()) return accept();
    const std::size_t v = seq[pos];
    auto visit = [&](ElementId id) {
      const Record& r = records_[id - 1];
      if (!r.node || !schema_.is_subtype(r.type, vars_[v].type) || !guards_match(vars_[v], r)) return false;
      if (!candidate_ok(v, r)) return false;
      if (std::find(b.begin(), b.end(), id) != b.end()) return false;
      b[v] = id;
      for (const auto& c : st.conns) {
        if (c.src != v && c.tgt != v) continue;
        if (b[c.src] == kNoElement || b[c.tgt] == kNoElement) continue;
        if (!edge_between(c, b[c.src], b[c.tgt], x, snapshot)) {
          b[v] = kNoElement;
          return false;
        }
      }
      if (enumerate(st, seq, pos + 1, b, x, snapshot, nullptr, candidate_ok, accept)) return true;
      b[v] = kNoElement;
      return false;
    };
    if (pos == 0 && first_pool != nullptr) {
      for (ElementId id : *first_pool) {
        if (visit(id)) return true;
      }
      return false;
    }
    for (TypeId sub : schema_.subtypes(vars_[v].type)) {
      for (ElementId id : by_type_[sub]) {
        if (visit(id)) return true;
      }
    }
    return false;
  }

  bool eval(const Condition& c, std::vector<ElementId>& b, std::int64_t x) const {
    switch (c.kind) {
      case Condition::Kind::kExists: {
        const OStage& st = stages_[c.stage];
        auto within_kappa = [&](std::size_t v, const Record& r) {
          return std::all_of(vars_[v].kappa.begin(), vars_[v].kappa.end(),
                             [&](const auto& k) { return satisfied(k, r.cts, r.dts, x); });
        };
        std::vector<ElementId> trial = b;
        std::vector<std::size_t> bound;
        for (std::size_t v = 0; v < trial.size(); ++v) {
          if (trial[v] != kNoElement) bound.push_back(v);
        }
        const bool found = enumerate(st, order(st, bound, kAbsent), 0, trial, x, false, nullptr, within_kappa,
                                     [&] { return c.children.empty() || eval(c.children[0], trial, x); });
        if (found) b = trial;
        return found;
      }
      case Condition::Kind::kNot: {
        std::vector<ElementId> trial = b;
        return !eval(c.children[0], trial, x);
      }
      case Condition::Kind::kAnd: {
        std::vector<ElementId> trial = b;
        if (!eval(c.children[0], trial, x) || !eval(c.children[1], trial, x)) return false;
        b = trial;
        return true;
      }
      case Condition::Kind::kImplies: {
        std::vector<ElementId> trial = b;
        if (!eval(c.children[0], trial, x)) return true;
        return eval(c.children[1], b, x);
      }
    }
    return false;
  }

  void evaluate(std::int64_t x) {
    const OStage& trig = stages_.front();
    std::set<std::vector<ElementId>> found;
    for (std::size_t fresh = 0; fresh < trig.vars.size(); ++fresh) {
      std::vector<ElementId> b(vars_.size(), kNoElement);
      const std::size_t start = trig.vars[fresh];
      auto at_x = [&](std::size_t v, const Record& r) { return alive(r, x) && (v != start || r.cts == x); };
      enumerate(trig, order(trig, {}, start), 0, b, x, true, &created_now_, at_x, [&] {
        std::vector<ElementId> key;
        for (std::size_t v : trig.vars) key.push_back(b[v]);
        found.insert(key);
        return false;
      });
    }
    for (const auto& key : found) {
      if (!reported_.insert(key).second) continue;
      std::vector<ElementId> b(vars_.size(), kNoElement);
      MatchVerdict verdict;
      verdict.trigger_time = Timepoint{x};
      for (std::size_t k = 0; k < trig.vars.size(); ++k) {
        b[trig.vars[k]] = key[k];
        verdict.trigger_binding.set(vars_[trig.vars[k]].name, key[k]);
      }
      if (eval(query_.body, b, x)) {
        verdict.status = VerdictStatus::kSatisfied;
        Binding w;
        for (std::size_t s = 1; s < stages_.size(); ++s) {
          for (std::size_t v : stages_[s].vars) {
            if (b[v] != kNoElement) w.set(vars_[v].name, b[v]);
          }
        }
        verdict.witness = std::move(w);
      }
      out_.push_back(std::move(verdict));
    }
  }

  const StructuralQuery& query_;
  const TypeSchema& schema_;
  std::vector<OVar> vars_;
  std::vector<OStage> stages_;
  std::vector<Record> records_;
  std::vector<std::vector<ElementId>> by_type_;
  std::vector<ElementId> created_now_;
  std::map<std::tuple<TypeId, ElementId, ElementId>, std::vector<ElementId>> edges_;
  std::set<std::vector<ElementId>> reported_;
  std::vector<MatchVerdict> out_;
  std::int64_t last_ = std::numeric_limits<std::int64_t>::min();
};

}  // namespace

std::vector<MatchVerdict> oracle_eval(const StructuralQuery& query, const TypeSchema& schema, const EventSequence& events) {
  return Oracle(query, schema).run(events);
}

}  // namespace rtm
