#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "rtm/events.hpp"

namespace rtm {
namespace {

struct Token {
  std::string text;
  bool quoted = false;
};

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw EventFileError("line " + std::to_string(line) + ": " + what, line);
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return v;
}

// Splits on whitespace; a double-quoted run (possibly after "name=") is kept
// as one token with escapes resolved.
std::vector<Token> tokenize(std::string_view line, std::size_t lineno) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    Token tok;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
      if (line[i] == '"') {
        tok.quoted = true;
        ++i;
        bool closed = false;
        while (i < line.size()) {
          char c = line[i++];
          if (c == '\\' && i < line.size()) {
            tok.text.push_back(line[i++]);
          } else if (c == '"') {
            closed = true;
            break;
          } else {
            tok.text.push_back(c);
          }
        }
        if (!closed) fail(lineno, "unterminated string");
      } else {
        tok.text.push_back(line[i++]);
      }
    }
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

bool is_bare_safe(const std::string& s) {
  if (s.empty() || parse_int(s)) return false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '"' || c == '\\' || c == '=' || c == '#' || c == '\n' || c == '\r') return false;
  }
  return true;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

EventSequence parse_events(const std::string& text) {
  EventSequence events;
  std::unordered_map<std::string, ElementId> symbols;
  ElementId next = kFirstElementId;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;

  auto resolve = [&](const Token& tok) {
    auto it = symbols.find(tok.text);
    if (it == symbols.end()) fail(lineno, "unknown symbol '" + tok.text + "'");
    return it->second;
  };
  auto declare = [&](const Token& tok) {
    if (tok.text.empty()) fail(lineno, "empty symbol");
    if (!symbols.emplace(tok.text, next).second) fail(lineno, "duplicate symbol '" + tok.text + "'");
    ++next;
  };

  while (std::getline(in, line)) {
    ++lineno;
    const auto tokens = tokenize(line, lineno);
    if (tokens.empty() || (!tokens[0].quoted && tokens[0].text.starts_with('#'))) continue;
    if (tokens.size() < 2) fail(lineno, "expected '<timestamp> <action> ...'");
    const auto ts = parse_int(tokens[0].text);
    if (!ts || *ts < 0) fail(lineno, "bad timestamp '" + tokens[0].text + "'");
    ChangeEvent event;
    event.timestamp = Timepoint{*ts};
    const std::string& verb = tokens[1].text;
    if (verb == "CREATE_NODE") {
      if (tokens.size() < 4) fail(lineno, "CREATE_NODE needs <type> <symbol>");
      CreateNode node{tokens[2].text, {}, tokens[3].text};
      for (std::size_t k = 4; k < tokens.size(); ++k) {
        const auto& tok = tokens[k];
        const auto eq = tok.text.find('=');
        if (eq == std::string::npos || eq == 0) fail(lineno, "expected <attr>=<value>, got '" + tok.text + "'");
        std::string name = tok.text.substr(0, eq);
        std::string raw = tok.text.substr(eq + 1);
        AttributeValue value = raw;
        if (!tok.quoted) {
          if (auto v = parse_int(raw)) value = *v;
        }
        node.attributes.emplace_back(std::move(name), std::move(value));
      }
      declare(tokens[3]);
      event.action = std::move(node);
    } else if (verb == "CREATE_EDGE") {
      if (tokens.size() != 6) fail(lineno, "CREATE_EDGE needs <type> <symbol> <src> <tgt>");
      CreateEdge edge{tokens[2].text, resolve(tokens[4]), resolve(tokens[5]), tokens[3].text};
      declare(tokens[3]);
      event.action = std::move(edge);
    } else if (verb == "DELETE") {
      if (tokens.size() != 3) fail(lineno, "DELETE needs <symbol>");
      event.action = DeleteElement{resolve(tokens[2])};
    } else {
      fail(lineno, "unknown action '" + verb + "'");
    }
    events.push_back(std::move(event));
  }
  return events;
}

std::string format_events(const EventSequence& events, const std::vector<std::string>& header) {
  std::ostringstream out;
  for (const auto& h : header) out << "# " << h << '\n';
  std::unordered_map<ElementId, std::string> names;
  ElementId next = kFirstElementId;
  auto name_of = [&](ElementId id) -> const std::string& {
    auto it = names.find(id);
    if (it == names.end()) throw std::invalid_argument("event references element " + std::to_string(id) + " not created in the sequence");
    return it->second;
  };
  auto declare = [&](const std::string& symbol) -> const std::string& {
    const ElementId id = next++;
    return names.emplace(id, symbol.empty() ? "_" + std::to_string(id) : symbol).first->second;
  };
  for (const auto& event : events) {
    out << event.timestamp.value << ' ';
    if (const auto* node = std::get_if<CreateNode>(&event.action)) {
      out << "CREATE_NODE " << node->type << ' ' << declare(node->symbol);
      for (const auto& [name, value] : node->attributes) {
        out << ' ' << name << '=';
        if (const auto* i = std::get_if<std::int64_t>(&value)) {
          out << *i;
        } else {
          const auto& s = std::get<std::string>(value);
          out << (is_bare_safe(s) ? s : quote(s));
        }
      }
    } else if (const auto* edge = std::get_if<CreateEdge>(&event.action)) {
      const std::string src = name_of(edge->source);
      const std::string tgt = name_of(edge->target);
      out << "CREATE_EDGE " << edge->type << ' ' << declare(edge->symbol) << ' ' << src << ' ' << tgt;
    } else {
      out << "DELETE " << name_of(std::get<DeleteElement>(event.action).target);
    }
    out << '\n';
  }
  return out.str();
}

EventSequence read_events(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EventFileError("cannot open '" + path.string() + "'", 0);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw EventFileError("read failure on '" + path.string() + "'", 0);
  return parse_events(buffer.str());
}

void write_events(const std::filesystem::path& path, const EventSequence& events, const std::vector<std::string>& header) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EventFileError("cannot write '" + path.string() + "'", 0);
  out << format_events(events, header);
  if (!out.flush()) throw EventFileError("write failure on '" + path.string() + "'", 0);
}

}  // namespace rtm
