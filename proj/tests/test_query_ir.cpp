#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "rtm/formula.hpp"
#include "rtm/query.hpp"
#include "support.hpp"

using namespace rtm;

namespace {

QueryErrorCode parse_error(std::string_view text) {
  try {
    parse_formula(text);
  } catch (const QueryError& e) {
    return e.code();
  }
  FAIL("expected QueryError for: " << text);
  return QueryErrorCode::kSyntax;
}

QueryErrorCode translate_error(const Formula& f) {
  try {
    translate(f);
  } catch (const QueryError& e) {
    return e.code();
  }
  FAIL("expected QueryError");
  return QueryErrorCode::kSyntax;
}

PatternVariable var(std::string name, std::string type, std::vector<AttributeGuard> guards = {}) {
  return {std::move(name), std::move(type), std::move(guards)};
}

Formula hand_built_psi() {
  Pattern phi1{{var("s", "PatientSensor"), var("d", "StringValue", {{"value", std::string("op")}})},
               {{"emits", "s", "d"}}};
  Pattern phi2{{var("p", "Pump"), var("r", "StringValue", {{"value", std::string("anti")}}), var("c", "Connector")},
               {{"takes", "p", "r"}, {"src", "c", "p"}, {"tgt", "c", "s"}}};
  return Formula::forall_new(phi1, Formula::once({0, 3600}, Formula::exists(phi2)));
}

std::string normalize(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string compact;
    bool space = false;
    for (char c : line.substr(first, last - first + 1)) {
      if (c == ' ' || c == '\t') {
        space = true;
        continue;
      }
      if (space) compact += ' ';
      space = false;
      compact += c;
    }
    out += compact + '\n';
  }
  return out;
}

// Random supported-fragment formulas with unique variable names.
class FormulaGen {
 public:
  explicit FormulaGen(std::uint64_t seed) : rng_(seed) {}

  Formula top() {
    counter_ = 0;
    std::vector<std::string> scope;
    Pattern p = pattern(scope, 1 + pick(2));
    return Formula::forall_new(p, body(scope, 3));
  }

 private:
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

  Pattern pattern(std::vector<std::string>& scope, std::size_t nvars) {
    static const char* types[] = {"PatientSensor", "Pump", "Connector", "StringValue", "AbstractEntity"};
    static const char* edges[] = {"emits", "takes", "src", "tgt"};
    Pattern p;
    const std::vector<std::string> outer = scope;
    for (std::size_t i = 0; i < nvars; ++i) {
      PatternVariable v{"v" + std::to_string(counter_++), types[pick(5)], {}};
      if (v.type == "StringValue" && pick(2)) {
        if (pick(2)) {
          v.guards.push_back({"value", std::string(pick(2) ? "op" : "say \"hi\"\\")});
        } else {
          v.guards.push_back({"value", static_cast<std::int64_t>(pick(100)) - 50});
        }
      }
      p.variables.push_back(v);
      scope.push_back(v.name);
    }
    const std::size_t nconn = pick(3);
    for (std::size_t i = 0; i < nconn; ++i) {
      const auto& src = p.variables[pick(p.variables.size())].name;
      std::string tgt = scope[pick(scope.size())];
      p.connections.push_back({edges[pick(4)], src, tgt});
    }
    return p;
  }

  Formula body(const std::vector<std::string>& scope, int depth) {
    const std::size_t choice = depth <= 0 ? pick(2) : pick(7);
    switch (choice) {
      case 0: return exists(scope, depth);
      case 1: return Formula::negation(exists(scope, depth));
      case 2: return Formula::conjunction(body(scope, depth - 1), body(scope, depth - 1));
      case 3: return Formula::implication(body(scope, depth - 1), body(scope, depth - 1));
      default: return once(scope, depth - 1);
    }
  }

  Formula once(const std::vector<std::string>& scope, int depth) {
    const Seconds a = static_cast<Seconds>(pick(100));
    const Interval iv{a, a + static_cast<Seconds>(pick(5000))};
    std::optional<PastSemantics> sem;
    if (pick(3) == 0) sem = PastSemantics::kOccurrence;
    if (pick(3) == 0) sem = PastSemantics::kLifespan;
    Formula inner = depth > 0 && pick(3) == 0 ? once(scope, depth - 1)
                    : depth > 0 && pick(2)    ? Formula::conjunction(exists(scope, 0), exists(scope, 0))
                                              : exists(scope, depth);
    return Formula::once(iv, std::move(inner), sem);
  }

  Formula exists(const std::vector<std::string>& scope, int depth) {
    std::vector<std::string> inner = scope;
    Pattern p = pattern(inner, 1 + pick(3));
    if (depth > 0 && pick(3) == 0) return Formula::exists(p, body(inner, depth - 1));
    return Formula::exists(p);
  }

  std::mt19937_64 rng_;
  int counter_ = 0;
};

}  // namespace

TEST_CASE("parse the monitoring formula into the hand-built AST") {
  CHECK(parse_formula(test::kPsiText) == hand_built_psi());
  CHECK(parse_formula(print_formula(hand_built_psi())) == hand_built_psi());
}

TEST_CASE("parser errors") {
  CHECK(parse_error("forall-new [s:PatientSensor] implies once[10,5] exists [p:Pump]") ==
        QueryErrorCode::kMalformedInterval);
  CHECK(parse_error("once[10,5] exists [p:Pump]") == QueryErrorCode::kMalformedInterval);
  CHECK(parse_error("forall-new [s:PatientSensor implies exists [p:Pump]") == QueryErrorCode::kSyntax);
  CHECK(parse_error("exists [p:Pump] and") == QueryErrorCode::kSyntax);
  CHECK(parse_error("exists [p:Pump{value=}]") == QueryErrorCode::kSyntax);
  CHECK(parse_error("exists [p]") == QueryErrorCode::kSyntax);
  CHECK(parse_error("exists [p:Pump] exists [q:Pump]") == QueryErrorCode::kSyntax);
  try {
    parse_formula("exists [p:Pump]\n  and ?");
    FAIL("expected syntax error");
  } catch (const QueryError& e) {
    CHECK(e.code() == QueryErrorCode::kSyntax);
    CHECK(e.line() == 2);
    CHECK(e.column() == 7);
  }
}

TEST_CASE("parse accepts comments, semantics tags and temporal operators") {
  const Formula f = parse_formula(
      "# header comment\n"
      "forall-new [s:PatientSensor] implies once[0,10]@occurrence exists [p:Pump] # trailing\n");
  REQUIRE(f.kind == FormulaKind::kForallNew);
  CHECK(f.children[0].kind == FormulaKind::kOnce);
  CHECK(f.children[0].semantics == PastSemantics::kOccurrence);
  const Formula u = parse_formula("exists [a:Pump] until[1,2] exists [b:Pump]");
  CHECK(u.kind == FormulaKind::kUntil);
  CHECK(parse_formula(print_formula(u)) == u);
}

TEST_CASE("translate the monitoring formula: trigger, stages and kappa") {
  const StructuralQuery q = test::psi();
  CHECK(q.trigger.node_types == std::vector<std::string>{"PatientSensor", "StringValue"});
  CHECK(q.trigger.anchor_variable == "d");
  REQUIRE(q.stages.size() == 2);
  CHECK(q.stages[1].outer == std::vector<std::string>{"s"});
  CHECK(q.body.kind == Condition::Kind::kExists);
  CHECK(q.body.stage == 1);

  std::size_t created_at = 0;
  for (const auto& c : q.kappa.constraints) {
    if (c.kind == ConstraintKind::kCreatedAt) {
      ++created_at;
      CHECK(c.variable == "d");
    }
  }
  CHECK(created_at == 1);
  for (const char* beta : {"p", "r", "c"}) {
    const auto cs = q.kappa.for_variable(beta);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].kind == ConstraintKind::kLifespanOverlap);
    CHECK(cs[0].window == Interval{0, 3600});
    CHECK(cs[0].to_string() == std::string(beta) + ".cts < x - 0 && " + beta + ".dts > x - 3600");
  }
}

TEST_CASE("golden plan for the monitoring formula") {
  std::ifstream file(std::filesystem::path(RTM_TEST_DATA) / "psi_plan.txt");
  std::stringstream golden;
  golden << file.rdbuf();
  CHECK(normalize(format_plan(test::psi())) == normalize(golden.str()));
}

TEST_CASE("occurrence semantics constrains only event-like variables by creation time") {
  const StructuralQuery q = test::psi(PastSemantics::kOccurrence);
  const auto r = q.kappa.for_variable("r");
  REQUIRE(r.size() == 1);
  CHECK(r[0].kind == ConstraintKind::kCreatedWithin);
  CHECK(r[0].to_string() == "x - 3600 <= r.cts && r.cts <= x - 0");
  CHECK(q.kappa.for_variable("p")[0].kind == ConstraintKind::kLifespanOverlap);
  CHECK(q.kappa.for_variable("c")[0].kind == ConstraintKind::kLifespanOverlap);

  // An explicit tag on the operator overrides the option.
  const auto tagged = translate(parse_formula(
      "forall-new [s:PatientSensor] implies once[0,5]@lifespan exists [v:StringValue{value=\"x\"}]"),
      TranslateOptions{PastSemantics::kOccurrence});
  CHECK(tagged.kappa.for_variable("v")[0].kind == ConstraintKind::kLifespanOverlap);
}

TEST_CASE("constraint arithmetic") {
  const TimestampConstraint life{"b", ConstraintKind::kLifespanOverlap, {0, 3600}};
  CHECK(life.holds(Timepoint{100}, kInfinity, Timepoint{200}));
  CHECK_FALSE(life.holds(Timepoint{200}, kInfinity, Timepoint{200}));  // strict cts < x - a
  CHECK(life.holds(Timepoint{100}, Timepoint{1500}, Timepoint{5000}));
  CHECK_FALSE(life.holds(Timepoint{100}, Timepoint{1400}, Timepoint{5000}));  // strict dts > x - b
  const TimestampConstraint occ{"b", ConstraintKind::kCreatedWithin, {0, 3600}};
  CHECK_FALSE(occ.holds(Timepoint{100}, kInfinity, Timepoint{5000}));
  CHECK(occ.holds(Timepoint{1400}, kInfinity, Timepoint{5000}));
  CHECK(occ.holds(Timepoint{5000}, kInfinity, Timepoint{5000}));
  const TimestampConstraint now{"b", ConstraintKind::kExistsAt, {}};
  CHECK(now.holds(Timepoint{3}, Timepoint{9}, Timepoint{8}));
  CHECK_FALSE(now.holds(Timepoint{3}, Timepoint{9}, Timepoint{9}));
}

TEST_CASE("zero-width once degenerates to existence strictly before and at x") {
  const auto q = translate(parse_formula(
      "forall-new [s:PatientSensor -emits-> d:StringValue{value=\"op\"}] implies once[0,0] exists [p:Pump]"));
  const auto p = q.kappa.for_variable("p");
  REQUIRE(p.size() == 1);
  CHECK(p[0].to_string() == "p.cts < x - 0 && p.dts > x - 0");
}

TEST_CASE("nested once windows add up; plain exists checks existence at x") {
  const auto q = translate(parse_formula(
      "forall-new [s:PatientSensor] implies (exists [a:Pump] and once[10,20] once[1,2] exists [b:Pump])"));
  CHECK(q.kappa.for_variable("a")[0].kind == ConstraintKind::kExistsAt);
  CHECK(q.kappa.for_variable("b")[0].window == Interval{11, 22});
  CHECK(q.body.kind == Condition::Kind::kAnd);
}

TEST_CASE("translation errors") {
  CHECK(translate_error(parse_formula("forall-new [s:Pump] implies exists [a:Pump] until[0,5] exists [b:Pump]")) ==
        QueryErrorCode::kUnsupportedOperator);
  CHECK(translate_error(parse_formula("forall-new [s:Pump] implies eventually[0,5] exists [b:Pump]")) ==
        QueryErrorCode::kUnsupportedOperator);
  CHECK(translate_error(parse_formula("forall-new [s:Pump] implies exists [a:Pump] since[0,5] exists [b:Pump]")) ==
        QueryErrorCode::kUnsupportedOperator);
  CHECK(translate_error(parse_formula("forall-new [s:Pump] implies not once[0,5] exists [b:Pump]")) ==
        QueryErrorCode::kUnsupportedOperator);
  CHECK(translate_error(parse_formula("forall-new [s:Pump] implies once[0,5] not exists [b:Pump]")) ==
        QueryErrorCode::kUnsupportedOperator);
  CHECK(translate_error(parse_formula("forall-new [s:Pump] implies forall-new [t:Pump] implies exists [b:Pump]")) ==
        QueryErrorCode::kUnsupportedOperator);
  CHECK(translate_error(parse_formula("exists [p:Pump]")) == QueryErrorCode::kNoTrigger);
  CHECK(translate_error(parse_formula("exists [p:Pump] and forall-new [s:Pump] implies exists [q:Pump]")) ==
        QueryErrorCode::kUnsupportedOperator);
  CHECK(translate_error(parse_formula("forall-new [s:Pump] implies exists [p:Pump, p -takes-> ghost]")) ==
        QueryErrorCode::kUnboundVariable);
  CHECK(translate_error(parse_formula("forall-new [s:Pump] implies (exists [a:Pump] implies exists [b:Pump, b -takes-> a])")) ==
        QueryErrorCode::kUnboundVariable);
  CHECK(translate_error(parse_formula("forall-new [s:Pump] implies exists [s:Pump]")) ==
        QueryErrorCode::kDuplicateVariable);
  CHECK(translate_error(Formula::forall_new(Pattern{{var("s", "Pump")}, {}},
                                            Formula::once({5, 1}, Formula::exists(Pattern{{var("b", "Pump")}, {}})))) ==
        QueryErrorCode::kMalformedInterval);
}

TEST_CASE("derive_trigger_types") {
  CHECK(derive_trigger_types(parse_formula(test::kPsiText)) == std::vector<std::string>{"PatientSensor", "StringValue"});
  CHECK(derive_trigger_types(parse_formula("forall-new [p:Pump] implies exists [q:Pump]")) ==
        std::vector<std::string>{"Pump"});
  CHECK_THROWS_AS(derive_trigger_types(parse_formula("exists [p:Pump]")), QueryError);
}

TEST_CASE("property: parse(print(f)) == f and translation is total on the fragment") {
  FormulaGen gen(77);
  for (int i = 0; i < 2000; ++i) {
    const Formula f = gen.top();
    const std::string text = print_formula(f);
    INFO(text);
    REQUIRE(parse_formula(text) == f);
    StructuralQuery q;
    REQUIRE_NOTHROW(q = translate(f));
    // Every constraint references a declared variable; trigger types come from stage 0.
    for (const auto& c : q.kappa.constraints) {
      bool declared = false;
      for (const auto& s : q.stages) declared |= s.pattern.variable(c.variable) != nullptr;
      CHECK(declared);
    }
    CHECK(q.trigger.node_types == derive_trigger_types(f));
    CHECK(format_plan(q) == format_plan(translate(parse_formula(text))));
  }
}
