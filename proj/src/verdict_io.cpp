#include "rtm/verdict_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <tuple>

namespace rtm {

std::string format_verdicts_csv(const std::vector<MatchVerdict>& verdicts) {
  std::string out = std::string(kVerdictCsvHeader) + '\n';
  for (const auto& v : verdicts) {
    out += std::to_string(v.trigger_time.value);
    out += ',';
    out += to_string(v.status);
    out += ',';
    out += v.trigger_binding.to_string();
    out += ',';
    if (v.witness) out += v.witness->to_string();
    out += '\n';
  }
  return out;
}

void write_verdicts_csv(const std::filesystem::path& path, const std::vector<MatchVerdict>& verdicts) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw VerdictFileError("cannot open " + path.string() + " for writing", 0);
  file << format_verdicts_csv(verdicts);
  if (!file) throw VerdictFileError("write failed for " + path.string(), 0);
}

std::vector<VerdictRow> parse_verdicts_csv(const std::string& text) {
  std::vector<VerdictRow> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kVerdictCsvHeader) throw VerdictFileError("missing verdict CSV header", number);
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t comma; (comma = line.find(',', start)) != std::string::npos; start = comma + 1) {
      fields.push_back(line.substr(start, comma - start));
    }
    fields.push_back(line.substr(start));
    if (fields.size() != 4) throw VerdictFileError("expected 4 fields", number);
    VerdictRow row;
    row.line = number;
    const auto& t = fields[0];
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), row.trigger_time);
    if (ec != std::errc{} || ptr != t.data() + t.size()) throw VerdictFileError("bad trigger_time '" + t + "'", number);
    if (fields[1] != "SATISFIED" && fields[1] != "VIOLATED") throw VerdictFileError("bad status '" + fields[1] + "'", number);
    row.status = fields[1];
    row.trigger_binding = fields[2];
    row.witness_binding = fields[3];
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw VerdictFileError("missing verdict CSV header", number + 1);
  return rows;
}

VerdictComparison compare_verdicts(const std::string& csv_a, const std::string& csv_b) {
  auto a = parse_verdicts_csv(csv_a);
  auto b = parse_verdicts_csv(csv_b);
  auto key = [](const VerdictRow& r) { return std::tie(r.trigger_time, r.trigger_binding, r.status); };
  auto less = [&](const VerdictRow& x, const VerdictRow& y) { return key(x) < key(y); };
  std::stable_sort(a.begin(), a.end(), less);
  std::stable_sort(b.begin(), b.end(), less);

  VerdictComparison result;
  auto diverge = [&](const VerdictRow* ra, const VerdictRow* rb, std::string message) {
    result.equal = false;
    result.line_a = ra ? ra->line : 0;
    result.line_b = rb ? rb->line : 0;
    result.message = std::move(message);
    return result;
  };
  auto describe = [](const VerdictRow& r) {
    return std::to_string(r.trigger_time) + "," + r.status + "," + r.trigger_binding;
  };
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const auto& x = a[i];
    const auto& y = b[j];
    if (key(x) == key(y)) {
      ++i;
      ++j;
      continue;
    }
    if (x.trigger_time == y.trigger_time && x.trigger_binding == y.trigger_binding) {
      return diverge(&x, &y, "status differs for " + describe(x) + " vs " + y.status);
    }
    if (key(x) < key(y)) return diverge(&x, nullptr, "only in first: " + describe(x));
    return diverge(nullptr, &y, "only in second: " + describe(y));
  }
  if (i < a.size()) return diverge(&a[i], nullptr, "only in first: " + describe(a[i]));
  if (j < b.size()) return diverge(nullptr, &b[j], "only in second: " + describe(b[j]));
  return result;
}

namespace {
std::string slurp(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw VerdictFileError("cannot open " + path.string(), 0);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}
}  // namespace

VerdictComparison compare_verdict_files(const std::filesystem::path& a, const std::filesystem::path& b) {
  return compare_verdicts(slurp(a), slurp(b));
}

}  // namespace rtm
