#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rtm/pattern.hpp"
#include "rtm/timepoint.hpp"

namespace rtm {

enum class QueryErrorCode : std::uint8_t {
  kSyntax,
  kMalformedInterval,
  kUnsupportedOperator,
  kUnboundVariable,
  kDuplicateVariable,
  kNoTrigger,
  kSchemaMismatch,
};

const char* to_string(QueryErrorCode code) noexcept;

class QueryError : public std::runtime_error {
 public:
  QueryError(QueryErrorCode code, const std::string& detail, std::size_t line = 0, std::size_t column = 0);
  QueryErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  QueryErrorCode code_;
  std::size_t line_;
  std::size_t column_;
};

struct Interval {
  Seconds lower = 0;
  Seconds upper = 0;
  bool operator==(const Interval&) const = default;
  bool well_formed() const noexcept { return 0 <= lower && lower <= upper; }
};

/// How a past-time window constrains an element: by lifespan overlap
/// (cts/dts) or by its creation instant alone.
enum class PastSemantics : std::uint8_t { kLifespan, kOccurrence };

const char* to_string(PastSemantics semantics) noexcept;

enum class FormulaKind : std::uint8_t {
  kForallNew,   // pattern, children = {body}
  kExists,      // pattern, children = {} or {nested}
  kNot,         // {f}
  kAnd,         // {lhs, rhs}
  kImplies,     // {lhs, rhs}
  kOnce,        // interval, optional semantics, {f}
  kEventually,  // interval, {f}
  kUntil,       // interval, {lhs, rhs}
  kSince,       // interval, {lhs, rhs}
};

/// Metric-temporal graph formula. Until, Since and Eventually parse and print
/// but have no structural translation.
struct Formula {
  FormulaKind kind = FormulaKind::kExists;
  Pattern pattern;
  Interval interval;
  std::optional<PastSemantics> semantics;
  std::vector<Formula> children;

  bool operator==(const Formula&) const = default;

  static Formula forall_new(Pattern pattern, Formula body);
  static Formula exists(Pattern pattern);
  static Formula exists(Pattern pattern, Formula nested);
  static Formula negation(Formula f);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula implication(Formula lhs, Formula rhs);
  static Formula once(Interval interval, Formula f, std::optional<PastSemantics> semantics = std::nullopt);
  static Formula eventually(Interval interval, Formula f);
  static Formula until(Interval interval, Formula lhs, Formula rhs);
  static Formula since(Interval interval, Formula lhs, Formula rhs);
};

/// Canonical text; parse_formula(print_formula(f)) == f.
std::string print_formula(const Formula& formula);

/// Grammar (keywords are reserved):
///   formula  := conj [ "implies" formula ]
///   conj     := binary { "and" binary }
///   binary   := unary [ ("until" | "since") interval unary ]
///   unary    := "not" unary
///             | "once" interval [ "@" ("lifespan" | "occurrence") ] unary
///             | "eventually" interval unary
///             | "forall-new" pattern "implies" formula
///             | "exists" pattern [ "(" formula ")" ]
///             | "(" formula ")"
///   interval := "[" int "," int "]"
///   pattern  := "[" [ path { "," path } ] "]"
///   path     := node { "-" edge-type "->" node }
///   node     := name [ ":" type [ "{" attr "=" literal { "," attr "=" literal } "}" ]
///                              [ "(" name "," name ")" ] ]
/// `c:T(a,b)` declares c and connects it with `c -src-> a` and `c -tgt-> b`.
/// `#` starts a comment running to end of line.
Formula parse_formula(std::string_view text);

}  // namespace rtm
