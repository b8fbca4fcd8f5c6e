#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rtm/events.hpp"
#include "rtm/matcher.hpp"
#include "rtm/pruner.hpp"
#include "rtm/query.hpp"
#include "rtm/shs.hpp"

namespace rtm {

enum class Variant : std::uint8_t { kIntempo, kIntempoPlus, kOracle };
const char* to_string(Variant v) noexcept;
std::optional<Variant> parse_variant(std::string_view text);
std::optional<PastSemantics> parse_semantics(std::string_view text);

/// Byte estimates used for est_memory_bytes: element record plus its index
/// and adjacency entries.
struct MemoryModel {
  std::size_t node_bytes;
  std::size_t edge_bytes;
  static MemoryModel standard() noexcept;
};

struct LoopReport {
  Timepoint loop_end;
  std::size_t events_applied = 0;
  std::uint64_t query_time_ns = 0;
  std::uint64_t prune_time_ns = 0;
  std::size_t satisfied = 0;
  std::size_t violated = 0;
  std::size_t retained_elements = 0;
  std::size_t est_memory_bytes = 0;
  std::size_t removed_elements = 0;  // not part of loops.csv
};

struct RunOptions {
  Variant variant = Variant::kIntempo;
  Seconds loop_interval = 3600;
  /// Loops cover (0, max(horizon, last timestamp)].
  Seconds horizon = 0;
};

struct RunResult {
  std::vector<LoopReport> loops;
  std::vector<MatchVerdict> verdicts;  // in emission order
  std::vector<PruningRule> rules;
  std::vector<std::string> diagnostics;
};

/// Replays `events` through a monitor (and the pruner for INTEMPO_PLUS),
/// closing a loop at every multiple of the loop interval. Events stamped
/// exactly at a boundary belong to the loop that ends there. ORACLE
/// produces verdicts only.
RunResult run_workload(const StructuralQuery& query, const TypeSchema& schema, const EventSequence& events,
                       const RunOptions& options);

inline constexpr const char* kLoopCsvHeader =
    "loop_end,events_applied,query_time_ns,prune_time_ns,satisfied,violated,retained_elements,est_memory_bytes";
std::string format_loops_csv(const std::vector<LoopReport>& loops);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};
/// Ordinary least squares; r_squared is 0 for constant y.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct RunSummary {
  std::size_t loops = 0;
  std::size_t warmup_loops = 0;
  LinearFit query_vs_events;  // query_time_ns against cumulative events
  double first_quartile_mean_ns = 0;  // after warm-up
  double last_quartile_mean_ns = 0;
  std::uint64_t total_query_ns = 0;
  std::uint64_t total_prune_ns = 0;
  std::size_t total_removed = 0;
  std::size_t loops_prune_over_20_percent = 0;
  std::size_t max_retained_after_warmup = 0;
  std::size_t satisfied = 0;
  std::size_t violated = 0;
};
RunSummary summarize(const std::vector<LoopReport>& loops, std::optional<std::size_t> warmup_loops = std::nullopt);
std::string format_summary(const RunSummary& summary);

/// Current resident set size, when the platform exposes it.
std::optional<std::size_t> resident_bytes();

}  // namespace rtm
