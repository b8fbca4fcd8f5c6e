#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtm/matcher.hpp"

namespace rtm {

inline constexpr const char* kVerdictCsvHeader = "trigger_time,status,trigger_binding,witness_binding";

class VerdictFileError : public std::runtime_error {
 public:
  VerdictFileError(const std::string& what, std::size_t line) : std::runtime_error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// One parsed CSV row; bindings stay textual.
struct VerdictRow {
  std::size_t line = 0;
  std::int64_t trigger_time = 0;
  std::string status;
  std::string trigger_binding;
  std::string witness_binding;
};

std::string format_verdicts_csv(const std::vector<MatchVerdict>& verdicts);
void write_verdicts_csv(const std::filesystem::path& path, const std::vector<MatchVerdict>& verdicts);

std::vector<VerdictRow> parse_verdicts_csv(const std::string& text);

struct VerdictComparison {
  bool equal = true;
  std::size_t line_a = 0;  // 0 when the divergence has no row on that side
  std::size_t line_b = 0;
  std::string message;
};

/// Order-insensitive comparison on (trigger_time, trigger_binding, status);
/// witnesses are ignored.
VerdictComparison compare_verdicts(const std::string& csv_a, const std::string& csv_b);
VerdictComparison compare_verdict_files(const std::filesystem::path& a, const std::filesystem::path& b);

}  // namespace rtm
