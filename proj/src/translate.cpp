#include <algorithm>
#include <optional>
#include <set>
#include <sstream>

#include "rtm/query.hpp"

namespace rtm {

bool TimestampConstraint::holds(Timepoint cts, Timepoint dts, Timepoint x) const noexcept {
  const std::int64_t c = cts.value;
  const std::int64_t d = dts.value;
  const std::int64_t t = x.value;
  switch (kind) {
    case ConstraintKind::kCreatedAt: return c == t;
    case ConstraintKind::kExistsAt: return c <= t && d > t;
    case ConstraintKind::kLifespanOverlap: return c < t - window.lower && d > t - window.upper;
    case ConstraintKind::kCreatedWithin: return t - window.upper <= c && c <= t - window.lower;
  }
  return false;
}

std::string TimestampConstraint::to_string() const {
  const std::string& v = variable;
  const std::string a = std::to_string(window.lower);
  const std::string b = std::to_string(window.upper);
  switch (kind) {
    case ConstraintKind::kCreatedAt: return v + ".cts = x";
    case ConstraintKind::kExistsAt: return v + ".cts <= x && " + v + ".dts > x";
    case ConstraintKind::kLifespanOverlap: return v + ".cts < x - " + a + " && " + v + ".dts > x - " + b;
    case ConstraintKind::kCreatedWithin: return "x - " + b + " <= " + v + ".cts && " + v + ".cts <= x - " + a;
  }
  return {};
}

std::vector<TimestampConstraint> ConstraintSet::for_variable(const std::string& name) const {
  std::vector<TimestampConstraint> out;
  for (const auto& c : constraints) {
    if (c.variable == name) out.push_back(c);
  }
  return out;
}

namespace {

struct Window {
  Interval interval;
  PastSemantics semantics;
};

bool contains_forall(const Formula& f) {
  if (f.kind == FormulaKind::kForallNew) return true;
  return std::any_of(f.children.begin(), f.children.end(), contains_forall);
}

[[noreturn]] void unsupported(const std::string& what) {
  throw QueryError(QueryErrorCode::kUnsupportedOperator, what);
}

class Translator {
 public:
  explicit Translator(const TranslateOptions& options) : options_(options) {}

  StructuralQuery run(const Formula& f) {
    if (f.kind != FormulaKind::kForallNew) {
      if (contains_forall(f)) unsupported("forall-new must be the outermost operator");
      throw QueryError(QueryErrorCode::kNoTrigger, "formula has no top-level forall-new");
    }
    const Pattern& trigger = f.pattern;
    if (trigger.variables.empty()) throw QueryError(QueryErrorCode::kNoTrigger, "forall-new pattern declares no variables");

    std::vector<std::string> scope;
    declare(trigger, scope);
    check_connections(trigger, {}, nullptr);
    query_.stages.push_back(Stage{trigger, {}});

    for (const auto& v : trigger.variables) {
      if (std::find(query_.trigger.node_types.begin(), query_.trigger.node_types.end(), v.type) ==
          query_.trigger.node_types.end()) {
        query_.trigger.node_types.push_back(v.type);
      }
    }
    const PatternVariable* anchor = &trigger.variables.back();
    for (const auto& v : trigger.variables) {
      if (v.is_event_like()) anchor = &v;
    }
    query_.trigger.anchor_variable = anchor->name;
    query_.kappa.constraints.push_back({anchor->name, ConstraintKind::kCreatedAt, {}});

    query_.body = body(f.children.at(0), scope, std::nullopt);
    return std::move(query_);
  }

 private:
  void declare(const Pattern& p, std::vector<std::string>& scope) {
    for (const auto& v : p.variables) {
      if (!declared_.insert(v.name).second) {
        throw QueryError(QueryErrorCode::kDuplicateVariable, "variable '" + v.name + "' declared twice");
      }
      scope.push_back(v.name);
    }
  }

  // Connection endpoints must be declared by `p` or be visible in `outer`.
  void check_connections(const Pattern& p, const std::vector<std::string>& outer, std::vector<std::string>* referenced) {
    auto visible = [&](const std::string& name) {
      if (p.variable(name)) return true;
      if (std::find(outer.begin(), outer.end(), name) != outer.end()) {
        if (referenced && std::find(referenced->begin(), referenced->end(), name) == referenced->end()) {
          referenced->push_back(name);
        }
        return true;
      }
      return false;
    };
    for (const auto& c : p.connections) {
      for (const auto* end : {&c.source, &c.target}) {
        if (!visible(*end)) throw QueryError(QueryErrorCode::kUnboundVariable, "'" + *end + "' is not bound here");
      }
    }
  }

  Condition exists_stage(const Formula& f, const std::vector<std::string>& scope, const std::optional<Window>& window) {
    Stage stage;
    stage.pattern = f.pattern;
    check_connections(f.pattern, scope, &stage.outer);
    std::vector<std::string> inner = scope;
    declare(f.pattern, inner);
    for (const auto& v : f.pattern.variables) {
      TimestampConstraint c{v.name, ConstraintKind::kExistsAt, {}};
      if (window) {
        c.window = window->interval;
        c.kind = (window->semantics == PastSemantics::kOccurrence && v.is_event_like()) ? ConstraintKind::kCreatedWithin
                                                                                        : ConstraintKind::kLifespanOverlap;
      }
      query_.kappa.constraints.push_back(std::move(c));
    }
    Condition cond;
    cond.kind = Condition::Kind::kExists;
    cond.stage = query_.stages.size();
    query_.stages.push_back(std::move(stage));
    if (!f.children.empty()) cond.children.push_back(body(f.children[0], inner, window));
    return cond;
  }

  Window widen(const Formula& once, const std::optional<Window>& outer) {
    if (!once.interval.well_formed()) {
      throw QueryError(QueryErrorCode::kMalformedInterval, "interval [" + std::to_string(once.interval.lower) + "," +
                                                               std::to_string(once.interval.upper) + "]");
    }
    Window w{once.interval, options_.default_semantics};
    if (outer) {
      w.interval.lower += outer->interval.lower;
      w.interval.upper += outer->interval.upper;
      w.semantics = outer->semantics;
    }
    if (once.semantics) w.semantics = *once.semantics;
    return w;
  }

  Condition body(const Formula& f, const std::vector<std::string>& scope, const std::optional<Window>& window) {
    switch (f.kind) {
      case FormulaKind::kExists:
        return exists_stage(f, scope, window);
      case FormulaKind::kNot: {
        if (f.children.at(0).kind != FormulaKind::kExists) unsupported("negation is only supported directly around exists");
        Condition c{Condition::Kind::kNot, 0, {}};
        c.children.push_back(exists_stage(f.children[0], scope, window));
        return c;
      }
      case FormulaKind::kAnd:
      case FormulaKind::kImplies: {
        Condition c{f.kind == FormulaKind::kAnd ? Condition::Kind::kAnd : Condition::Kind::kImplies, 0, {}};
        c.children.push_back(body(f.children.at(0), scope, window));
        c.children.push_back(body(f.children.at(1), scope, window));
        return c;
      }
      case FormulaKind::kOnce:
        return past(f.children.at(0), scope, widen(f, window));
      case FormulaKind::kForallNew:
        unsupported("forall-new must be the outermost operator");
      case FormulaKind::kEventually:
        unsupported("eventually has no structural translation");
      case FormulaKind::kUntil:
        unsupported("until has no structural translation");
      case FormulaKind::kSince:
        unsupported("since has no structural translation");
    }
    unsupported("unknown operator");
  }

  // Operand of a once operator: exists, conjunctions of those, or a nested once.
  Condition past(const Formula& f, const std::vector<std::string>& scope, const Window& window) {
    switch (f.kind) {
      case FormulaKind::kExists:
        return exists_stage(f, scope, window);
      case FormulaKind::kAnd: {
        Condition c{Condition::Kind::kAnd, 0, {}};
        c.children.push_back(past(f.children.at(0), scope, window));
        c.children.push_back(past(f.children.at(1), scope, window));
        return c;
      }
      case FormulaKind::kOnce:
        return past(f.children.at(0), scope, widen(f, window));
      case FormulaKind::kNot:
        unsupported("negation under once is not supported");
      case FormulaKind::kImplies:
        unsupported("implication under once is not supported");
      default:
        return body(f, scope, window);  // reports the specific unsupported operator
    }
  }

  TranslateOptions options_;
  StructuralQuery query_;
  std::set<std::string> declared_;
};

void format_condition(std::ostream& out, const Condition& c) {
  switch (c.kind) {
    case Condition::Kind::kExists:
      out << "stage" << c.stage;
      if (!c.children.empty()) {
        out << '(';
        format_condition(out, c.children[0]);
        out << ')';
      }
      break;
    case Condition::Kind::kNot:
      out << "not ";
      format_condition(out, c.children.at(0));
      break;
    case Condition::Kind::kAnd:
    case Condition::Kind::kImplies:
      out << '(';
      format_condition(out, c.children.at(0));
      out << (c.kind == Condition::Kind::kAnd ? " and " : " implies ");
      format_condition(out, c.children.at(1));
      out << ')';
      break;
  }
}

}  // namespace

StructuralQuery translate(const Formula& formula, const TranslateOptions& options) {
  return Translator(options).run(formula);
}

std::vector<std::string> derive_trigger_types(const Formula& formula) {
  if (formula.kind != FormulaKind::kForallNew) {
    throw QueryError(QueryErrorCode::kNoTrigger, "formula has no top-level forall-new");
  }
  std::vector<std::string> types;
  for (const auto& v : formula.pattern.variables) {
    if (std::find(types.begin(), types.end(), v.type) == types.end()) types.push_back(v.type);
  }
  return types;
}

std::string format_plan(const StructuralQuery& query) {
  std::ostringstream out;
  out << "trigger: " << format_pattern(query.trigger_stage().pattern) << '\n';
  out << "trigger types:";
  for (const auto& t : query.trigger.node_types) out << ' ' << t;
  out << '\n';
  out << "anchor: " << query.trigger.anchor_variable << '\n';
  for (std::size_t i = 1; i < query.stages.size(); ++i) {
    const auto& s = query.stages[i];
    out << "stage" << i << ": exists " << format_pattern(s.pattern);
    if (!s.outer.empty()) {
      out << " outer {";
      for (std::size_t k = 0; k < s.outer.size(); ++k) out << (k ? ", " : "") << s.outer[k];
      out << '}';
    }
    out << '\n';
  }
  out << "condition: ";
  format_condition(out, query.body);
  out << '\n';
  out << "verdict: trigger miss -> none; condition true -> SATISFIED; condition false -> VIOLATED\n";
  out << "kappa:\n";
  for (const auto& c : query.kappa.constraints) out << "  " << c.to_string() << '\n';
  return out.str();
}

}  // namespace rtm
