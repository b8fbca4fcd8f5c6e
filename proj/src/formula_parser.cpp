#include <charconv>

#include "rtm/formula.hpp"

namespace rtm {
namespace {

enum class Tok : std::uint8_t {
  kIdent, kInt, kString,
  kLBracket, kRBracket, kLBrace, kRBrace, kLParen, kRParen,
  kComma, kColon, kEquals, kAt, kMinus, kArrow, kEnd,
};

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  std::int64_t number = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (is_ident_start(c)) {
        t.kind = Tok::kIdent;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) t.text.push_back(advance());
        if (t.text == "forall" && src_.substr(pos_, 4) == "-new" &&
            (pos_ + 4 >= src_.size() || !is_ident_char(src_[pos_ + 4]))) {
          for (int i = 0; i < 4; ++i) advance();
          t.text = "forall-new";
        }
      } else if (c >= '0' && c <= '9') {
        t.kind = Tok::kInt;
        while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') t.text.push_back(advance());
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
        if (ec != std::errc()) throw QueryError(QueryErrorCode::kSyntax, "integer out of range", t.line, t.column);
      } else if (c == '"') {
        t.kind = Tok::kString;
        advance();
        bool closed = false;
        while (pos_ < src_.size()) {
          char d = advance();
          if (d == '\\' && pos_ < src_.size()) {
            t.text.push_back(advance());
          } else if (d == '"') {
            closed = true;
            break;
          } else {
            t.text.push_back(d);
          }
        }
        if (!closed) throw QueryError(QueryErrorCode::kSyntax, "unterminated string", t.line, t.column);
      } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
        advance();
        advance();
        t.kind = Tok::kArrow;
      } else {
        switch (c) {
          case '[': t.kind = Tok::kLBracket; break;
          case ']': t.kind = Tok::kRBracket; break;
          case '{': t.kind = Tok::kLBrace; break;
          case '}': t.kind = Tok::kRBrace; break;
          case '(': t.kind = Tok::kLParen; break;
          case ')': t.kind = Tok::kRParen; break;
          case ',': t.kind = Tok::kComma; break;
          case ':': t.kind = Tok::kColon; break;
          case '=': t.kind = Tok::kEquals; break;
          case '@': t.kind = Tok::kAt; break;
          case '-': t.kind = Tok::kMinus; break;
          default:
            throw QueryError(QueryErrorCode::kSyntax, std::string("unexpected character '") + c + "'", t.line, t.column);
        }
        t.text = std::string(1, advance());
      }
      out.push_back(std::move(t));
    }
  }

 private:
  static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

bool is_keyword(const std::string& s) {
  return s == "forall-new" || s == "exists" || s == "not" || s == "and" || s == "implies" || s == "once" ||
         s == "eventually" || s == "until" || s == "since";
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Formula parse() {
    Formula f = formula();
    if (peek().kind != Tok::kEnd) error("unexpected '" + peek().text + "' after formula");
    return f;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at_keyword(std::string_view kw) const { return peek().kind == Tok::kIdent && peek().text == kw; }

  [[noreturn]] void error(const std::string& what) const {
    throw QueryError(QueryErrorCode::kSyntax, what, peek().line, peek().column);
  }

  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) error(std::string("expected ") + what);
    return next();
  }

  std::string name(const char* what) {
    if (peek().kind != Tok::kIdent || is_keyword(peek().text)) error(std::string("expected ") + what);
    return next().text;
  }

  Formula formula() {
    Formula lhs = conjunction();
    if (at_keyword("implies")) {
      next();
      return Formula::implication(std::move(lhs), formula());
    }
    return lhs;
  }

  Formula conjunction() {
    Formula lhs = temporal_binary();
    while (at_keyword("and")) {
      next();
      lhs = Formula::conjunction(std::move(lhs), temporal_binary());
    }
    return lhs;
  }

  Formula temporal_binary() {
    Formula lhs = unary();
    if (at_keyword("until") || at_keyword("since")) {
      const bool until = next().text == "until";
      const Interval i = interval();
      Formula rhs = unary();
      return until ? Formula::until(i, std::move(lhs), std::move(rhs)) : Formula::since(i, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Formula unary() {
    if (at_keyword("not")) {
      next();
      return Formula::negation(unary());
    }
    if (at_keyword("once")) {
      next();
      const Interval i = interval();
      std::optional<PastSemantics> semantics;
      if (peek().kind == Tok::kAt) {
        next();
        const std::string s = name("'lifespan' or 'occurrence'");
        if (s == "lifespan") {
          semantics = PastSemantics::kLifespan;
        } else if (s == "occurrence") {
          semantics = PastSemantics::kOccurrence;
        } else {
          --pos_;
          error("expected 'lifespan' or 'occurrence'");
        }
      }
      return Formula::once(i, unary(), semantics);
    }
    if (at_keyword("eventually")) {
      next();
      const Interval i = interval();
      return Formula::eventually(i, unary());
    }
    if (at_keyword("forall-new")) {
      next();
      Pattern p = pattern();
      if (!at_keyword("implies")) error("expected 'implies' after forall-new pattern");
      next();
      return Formula::forall_new(std::move(p), formula());
    }
    if (at_keyword("exists")) {
      next();
      Pattern p = pattern();
      if (peek().kind == Tok::kLParen) {
        next();
        Formula nested = formula();
        expect(Tok::kRParen, "')'");
        return Formula::exists(std::move(p), std::move(nested));
      }
      return Formula::exists(std::move(p));
    }
    if (peek().kind == Tok::kLParen) {
      next();
      Formula f = formula();
      expect(Tok::kRParen, "')'");
      return f;
    }
    if (peek().kind == Tok::kEnd) error("unexpected end of input");
    error("unexpected '" + peek().text + "'");
  }

  Interval interval() {
    const Token& open = expect(Tok::kLBracket, "'[' starting an interval");
    const std::size_t line = open.line;
    const std::size_t col = open.column;
    const std::int64_t a = expect(Tok::kInt, "interval lower bound").number;
    expect(Tok::kComma, "','");
    const std::int64_t b = expect(Tok::kInt, "interval upper bound").number;
    expect(Tok::kRBracket, "']'");
    Interval i{a, b};
    if (!i.well_formed()) {
      throw QueryError(QueryErrorCode::kMalformedInterval,
                       "[" + std::to_string(a) + "," + std::to_string(b) + "] has lower > upper", line, col);
    }
    return i;
  }

  Pattern pattern() {
    expect(Tok::kLBracket, "'[' starting a pattern");
    Pattern p;
    if (peek().kind == Tok::kRBracket) {
      next();
      return p;
    }
    for (;;) {
      path(p);
      if (peek().kind == Tok::kComma) {
        next();
        continue;
      }
      expect(Tok::kRBracket, "',' or ']' in pattern");
      return p;
    }
  }

  void path(Pattern& p) {
    bool declared = false;
    std::string current = node(p, declared);
    bool connected = false;
    while (peek().kind == Tok::kMinus) {
      next();
      const std::string edge = name("edge type");
      expect(Tok::kArrow, "'->'");
      bool next_declared = false;
      std::string target = node(p, next_declared);
      p.connections.push_back({edge, current, target});
      current = std::move(target);
      connected = true;
    }
    if (!declared && !connected) error("reference to '" + current + "' must take part in a connection");
  }

  std::string node(Pattern& p, bool& declared) {
    std::string var = name("variable name");
    if (peek().kind != Tok::kColon) return var;
    next();
    declared = true;
    PatternVariable v{var, name("type name"), {}};
    if (peek().kind == Tok::kLBrace) {
      next();
      for (;;) {
        AttributeGuard g;
        g.attribute = name("attribute name");
        expect(Tok::kEquals, "'='");
        if (peek().kind == Tok::kString) {
          g.value = next().text;
        } else if (peek().kind == Tok::kInt) {
          g.value = next().number;
        } else if (peek().kind == Tok::kMinus && toks_[pos_ + 1].kind == Tok::kInt) {
          next();
          g.value = -next().number;
        } else {
          error("expected string or integer literal");
        }
        v.guards.push_back(std::move(g));
        if (peek().kind == Tok::kComma) {
          next();
          continue;
        }
        expect(Tok::kRBrace, "',' or '}'");
        break;
      }
    }
    std::vector<Connection> shorthand;
    if (peek().kind == Tok::kLParen) {
      next();
      std::string a = name("connector source");
      expect(Tok::kComma, "','");
      std::string b = name("connector target");
      expect(Tok::kRParen, "')'");
      shorthand.push_back({"src", var, a});
      shorthand.push_back({"tgt", var, b});
    }
    p.variables.push_back(std::move(v));
    for (auto& c : shorthand) p.connections.push_back(std::move(c));
    return var;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse_formula(std::string_view text) {
  return Parser(Lexer(text).run()).parse();
}

}  // namespace rtm
