#include "rtm/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <unistd.h>

namespace rtm {

const char* to_string(Variant v) noexcept {
  switch (v) {
    case Variant::kIntempo: return "intempo";
    case Variant::kIntempoPlus: return "intempo-plus";
    case Variant::kOracle: return "oracle";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view text) {
  if (text == "intempo") return Variant::kIntempo;
  if (text == "intempo-plus") return Variant::kIntempoPlus;
  if (text == "oracle") return Variant::kOracle;
  return std::nullopt;
}

std::optional<PastSemantics> parse_semantics(std::string_view text) {
  if (text == "lifespan") return PastSemantics::kLifespan;
  if (text == "occurrence") return PastSemantics::kOccurrence;
  return std::nullopt;
}

MemoryModel MemoryModel::standard() noexcept {
  constexpr std::size_t record = sizeof(std::optional<Element>);
  constexpr std::size_t bucket_entry = sizeof(ElementId);
  // One string attribute per node on average; edges occupy two adjacency entries.
  constexpr std::size_t attribute = sizeof(std::pair<AttributeKey, AttributeValue>);
  return {record + bucket_entry + attribute, record + bucket_entry + 2 * sizeof(ElementId)};
}

RunResult run_workload(const StructuralQuery& query, const TypeSchema& schema, const EventSequence& events,
                       const RunOptions& options) {
  RunResult result;
  if (options.variant == Variant::kOracle) {
    result.verdicts = oracle_eval(query, schema, events);
    return result;
  }
  if (options.loop_interval < 1) throw std::invalid_argument("loop interval must be >= 1");

  TemporalGraph graph(schema);
  auto monitor = attach(query, graph);
  result.diagnostics = monitor->diagnostics();
  std::size_t satisfied = 0;
  std::size_t violated = 0;
  monitor->set_sink([&](const MatchVerdict& v) {
    ++(v.status == VerdictStatus::kSatisfied ? satisfied : violated);
    result.verdicts.push_back(v);
  });
  const bool pruning = options.variant == Variant::kIntempoPlus;
  if (pruning) result.rules = derive_rules({query}, schema);

  const Seconds last = events.empty() ? 0 : events.back().timestamp.value;
  const Seconds span = std::max(options.horizon, last);
  const Seconds loops = std::max<Seconds>(1, (span + options.loop_interval - 1) / options.loop_interval);
  const MemoryModel memory = MemoryModel::standard();

  std::size_t next = 0;
  std::uint64_t query_before = 0;
  for (Seconds k = 1; k <= loops; ++k) {
    LoopReport row;
    row.loop_end = Timepoint{k * options.loop_interval};
    for (; next < events.size() && events[next].timestamp <= row.loop_end; ++next) {
      graph.apply_event(events[next]);
      ++row.events_applied;
    }
    monitor->flush();
    row.query_time_ns = monitor->evaluation_ns() - query_before;
    query_before = monitor->evaluation_ns();
    if (pruning) {
      const PruneReport pr = prune(graph, result.rules, row.loop_end);
      row.prune_time_ns = pr.duration_ns;
      row.removed_elements = pr.removed_node_total() + pr.removed_edges;
    }
    row.satisfied = std::exchange(satisfied, 0);
    row.violated = std::exchange(violated, 0);
    row.retained_elements = graph.stored_count();
    row.est_memory_bytes = graph.node_count() * memory.node_bytes + graph.edge_count() * memory.edge_bytes;
    result.loops.push_back(row);
  }
  return result;
}

std::string format_loops_csv(const std::vector<LoopReport>& loops) {
  std::ostringstream out;
  out << kLoopCsvHeader << '\n';
  for (const auto& r : loops) {
    out << r.loop_end.value << ',' << r.events_applied << ',' << r.query_time_ns << ',' << r.prune_time_ns << ','
        << r.satisfied << ',' << r.violated << ',' << r.retained_elements << ',' << r.est_memory_bytes << '\n';
  }
  return out.str();
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit fit;
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return fit;
  const double mx = std::accumulate(x.begin(), x.begin() + n, 0.0) / n;
  const double my = std::accumulate(y.begin(), y.begin() + n, 0.0) / n;
  double sxx = 0;
  double sxy = 0;
  double syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0 ? 0.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

RunSummary summarize(const std::vector<LoopReport>& loops, std::optional<std::size_t> warmup_loops) {
  RunSummary s;
  s.loops = loops.size();
  s.warmup_loops = warmup_loops.value_or((loops.size() * 5 + 99) / 100);
  s.warmup_loops = std::min(s.warmup_loops, loops.size());

  std::vector<double> cumulative;
  std::vector<double> query;
  double events = 0;
  for (const auto& r : loops) {
    events += static_cast<double>(r.events_applied);
    cumulative.push_back(events);
    query.push_back(static_cast<double>(r.query_time_ns));
    s.total_query_ns += r.query_time_ns;
    s.total_prune_ns += r.prune_time_ns;
    s.total_removed += r.removed_elements;
    s.satisfied += r.satisfied;
    s.violated += r.violated;
    if (r.prune_time_ns * 5 > r.query_time_ns && r.prune_time_ns > 0) ++s.loops_prune_over_20_percent;
  }
  s.query_vs_events = linear_fit(cumulative, query);

  const std::size_t rest = loops.size() - s.warmup_loops;
  const std::size_t quarter = rest / 4;
  if (quarter > 0) {
    auto mean = [&](std::size_t from) {
      double sum = 0;
      for (std::size_t i = from; i < from + quarter; ++i) sum += query[i];
      return sum / static_cast<double>(quarter);
    };
    s.first_quartile_mean_ns = mean(s.warmup_loops);
    s.last_quartile_mean_ns = mean(loops.size() - quarter);
  }
  for (std::size_t i = s.warmup_loops; i < loops.size(); ++i) {
    s.max_retained_after_warmup = std::max(s.max_retained_after_warmup, loops[i].retained_elements);
  }
  return s;
}

std::string format_summary(const RunSummary& s) {
  std::ostringstream out;
  out << "loops: " << s.loops << " (warm-up " << s.warmup_loops << ")\n";
  out << "verdicts: " << s.satisfied << " satisfied, " << s.violated << " violated\n";
  out << "query time: total " << s.total_query_ns / 1000000.0 << " ms; fit vs cumulative events slope "
      << s.query_vs_events.slope << " ns/event, R^2 " << s.query_vs_events.r_squared << '\n';
  out << "query time quartile means after warm-up: first " << s.first_quartile_mean_ns / 1e6 << " ms, last "
      << s.last_quartile_mean_ns / 1e6 << " ms\n";
  out << "prune time: total " << s.total_prune_ns / 1000000.0 << " ms, removed " << s.total_removed << " elements\n";
  if (s.loops_prune_over_20_percent > 0) {
    out << "note: prune time exceeded 20% of query time in " << s.loops_prune_over_20_percent << " loops\n";
  }
  out << "max retained elements after warm-up: " << s.max_retained_after_warmup << '\n';
  return out.str();
}

std::optional<std::size_t> resident_bytes() {
  std::ifstream statm("/proc/self/statm");
  std::size_t total = 0;
  std::size_t resident = 0;
  if (!(statm >> total >> resident)) return std::nullopt;
  const long page = sysconf(_SC_PAGESIZE);
  if (page <= 0) return std::nullopt;
  return resident * static_cast<std::size_t>(page);
}

}  // namespace rtm
