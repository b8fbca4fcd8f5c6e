#include "rtm/formula.hpp"

#include <sstream>

namespace rtm {

const char* to_string(QueryErrorCode code) noexcept {
  switch (code) {
    case QueryErrorCode::kSyntax: return "SyntaxError";
    case QueryErrorCode::kMalformedInterval: return "MalformedInterval";
    case QueryErrorCode::kUnsupportedOperator: return "UnsupportedOperator";
    case QueryErrorCode::kUnboundVariable: return "UnboundVariable";
    case QueryErrorCode::kDuplicateVariable: return "DuplicateVariable";
    case QueryErrorCode::kNoTrigger: return "NoTrigger";
    case QueryErrorCode::kSchemaMismatch: return "SchemaMismatch";
  }
  return "QueryError";
}

namespace {
std::string located(QueryErrorCode code, const std::string& detail, std::size_t line, std::size_t column) {
  std::string out = to_string(code);
  if (line != 0) out += " at " + std::to_string(line) + ":" + std::to_string(column);
  return out + ": " + detail;
}
}  // namespace

QueryError::QueryError(QueryErrorCode code, const std::string& detail, std::size_t line, std::size_t column)
    : std::runtime_error(located(code, detail, line, column)), code_(code), line_(line), column_(column) {}

const char* to_string(PastSemantics semantics) noexcept {
  return semantics == PastSemantics::kOccurrence ? "occurrence" : "lifespan";
}

// ---------------------------------------------------------------------------
// Builders

Formula Formula::forall_new(Pattern pattern, Formula body) {
  Formula f;
  f.kind = FormulaKind::kForallNew;
  f.pattern = std::move(pattern);
  f.children.push_back(std::move(body));
  return f;
}

Formula Formula::exists(Pattern pattern) {
  Formula f;
  f.kind = FormulaKind::kExists;
  f.pattern = std::move(pattern);
  return f;
}

Formula Formula::exists(Pattern pattern, Formula nested) {
  Formula f = exists(std::move(pattern));
  f.children.push_back(std::move(nested));
  return f;
}

Formula Formula::negation(Formula inner) {
  Formula f;
  f.kind = FormulaKind::kNot;
  f.children.push_back(std::move(inner));
  return f;
}

namespace {
Formula binary(FormulaKind kind, Formula lhs, Formula rhs, Interval interval = {}) {
  Formula f;
  f.kind = kind;
  f.interval = interval;
  f.children.push_back(std::move(lhs));
  f.children.push_back(std::move(rhs));
  return f;
}
}  // namespace

Formula Formula::conjunction(Formula lhs, Formula rhs) { return binary(FormulaKind::kAnd, std::move(lhs), std::move(rhs)); }
Formula Formula::implication(Formula lhs, Formula rhs) { return binary(FormulaKind::kImplies, std::move(lhs), std::move(rhs)); }
Formula Formula::until(Interval interval, Formula lhs, Formula rhs) {
  return binary(FormulaKind::kUntil, std::move(lhs), std::move(rhs), interval);
}
Formula Formula::since(Interval interval, Formula lhs, Formula rhs) {
  return binary(FormulaKind::kSince, std::move(lhs), std::move(rhs), interval);
}

Formula Formula::once(Interval interval, Formula inner, std::optional<PastSemantics> semantics) {
  Formula f;
  f.kind = FormulaKind::kOnce;
  f.interval = interval;
  f.semantics = semantics;
  f.children.push_back(std::move(inner));
  return f;
}

Formula Formula::eventually(Interval interval, Formula inner) {
  Formula f;
  f.kind = FormulaKind::kEventually;
  f.interval = interval;
  f.children.push_back(std::move(inner));
  return f;
}

// ---------------------------------------------------------------------------
// Printing

std::string format_guard_value(const AttributeValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  std::string out = "\"";
  for (char c : std::get<std::string>(value)) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_pattern(const Pattern& pattern) {
  std::ostringstream out;
  out << '[';
  bool first = true;
  auto sep = [&] {
    if (!first) out << ", ";
    first = false;
  };
  for (const auto& v : pattern.variables) {
    sep();
    out << v.name << ':' << v.type;
    if (!v.guards.empty()) {
      out << '{';
      for (std::size_t i = 0; i < v.guards.size(); ++i) {
        if (i) out << ", ";
        out << v.guards[i].attribute << '=' << format_guard_value(v.guards[i].value);
      }
      out << '}';
    }
  }
  for (const auto& c : pattern.connections) {
    sep();
    out << c.source << " -" << c.edge_type << "-> " << c.target;
  }
  out << ']';
  return out.str();
}

namespace {

int precedence(FormulaKind kind) {
  switch (kind) {
    case FormulaKind::kForallNew: return 0;
    case FormulaKind::kImplies: return 1;
    case FormulaKind::kAnd: return 2;
    case FormulaKind::kUntil:
    case FormulaKind::kSince: return 3;
    case FormulaKind::kNot:
    case FormulaKind::kOnce:
    case FormulaKind::kEventually: return 4;
    case FormulaKind::kExists: return 5;
  }
  return 0;
}

std::string interval_text(const Interval& i) {
  return "[" + std::to_string(i.lower) + "," + std::to_string(i.upper) + "]";
}

void print(std::ostream& out, const Formula& f, int min_prec) {
  const bool wrap = precedence(f.kind) < min_prec;
  if (wrap) out << '(';
  switch (f.kind) {
    case FormulaKind::kForallNew:
      out << "forall-new " << format_pattern(f.pattern) << " implies ";
      print(out, f.children.at(0), 0);
      break;
    case FormulaKind::kExists:
      out << "exists " << format_pattern(f.pattern);
      if (!f.children.empty()) {
        out << " (";
        print(out, f.children[0], 0);
        out << ')';
      }
      break;
    case FormulaKind::kNot:
      out << "not ";
      print(out, f.children.at(0), 4);
      break;
    case FormulaKind::kOnce:
      out << "once" << interval_text(f.interval);
      if (f.semantics) out << '@' << to_string(*f.semantics);
      out << ' ';
      print(out, f.children.at(0), 4);
      break;
    case FormulaKind::kEventually:
      out << "eventually" << interval_text(f.interval) << ' ';
      print(out, f.children.at(0), 4);
      break;
    case FormulaKind::kAnd:
      print(out, f.children.at(0), 2);
      out << " and ";
      print(out, f.children.at(1), 3);
      break;
    case FormulaKind::kImplies:
      print(out, f.children.at(0), 2);
      out << " implies ";
      print(out, f.children.at(1), 1);
      break;
    case FormulaKind::kUntil:
    case FormulaKind::kSince:
      print(out, f.children.at(0), 4);
      out << (f.kind == FormulaKind::kUntil ? " until" : " since") << interval_text(f.interval) << ' ';
      print(out, f.children.at(1), 4);
      break;
  }
  if (wrap) out << ')';
}

}  // namespace

std::string print_formula(const Formula& formula) {
  std::ostringstream out;
  print(out, formula, 0);
  return out.str();
}

}  // namespace rtm
