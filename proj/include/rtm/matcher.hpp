#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rtm/graph.hpp"
#include "rtm/query.hpp"

namespace rtm {

/// Variable-to-element assignment, kept sorted by variable name.
struct Binding {
  std::vector<std::pair<std::string, ElementId>> entries;
  bool operator==(const Binding&) const = default;
  auto operator<=>(const Binding&) const = default;

  void set(std::string variable, ElementId id);
  std::optional<ElementId> get(std::string_view variable) const;
  bool empty() const noexcept { return entries.empty(); }
  /// `a=1;b=7`
  std::string to_string() const;
};

enum class VerdictStatus : std::uint8_t { kSatisfied, kViolated };
const char* to_string(VerdictStatus status) noexcept;

struct MatchVerdict {
  Timepoint trigger_time;
  Binding trigger_binding;
  VerdictStatus status = VerdictStatus::kViolated;
  std::optional<Binding> witness;  // present iff SATISFIED
  bool operator==(const MatchVerdict&) const = default;
};

/// Total order on (trigger_time, trigger_binding, status), used to normalize
/// verdict lists before comparison.
bool verdict_less(const MatchVerdict& a, const MatchVerdict& b);
void sort_verdicts(std::vector<MatchVerdict>& verdicts);

using VerdictSink = std::function<void(const MatchVerdict&)>;

/// Incremental evaluator of one structural query over one graph.
///
/// Creations of trigger-type elements are queued and evaluated when their
/// timepoint closes, i.e. when the graph advances to a later timestamp or on
/// flush(). This lets every trigger match see all elements created at the
/// same timepoint, including the edge that connects a new node.
///
/// The graph must stay at a fixed address while the monitor is attached, and
/// the monitor must be driven from the graph's writer context.
class Monitor {
 public:
  Monitor(const Monitor&) = delete;
  Monitor& operator=(const Monitor&) = delete;
  ~Monitor();

  /// Records the creation of `id` at `now`. If this closes an earlier
  /// pending timepoint, the verdicts of that timepoint are returned.
  /// Called by the creation subscription; verdicts produced that way go to
  /// the sink (or the internal buffer).
  std::vector<MatchVerdict> on_creation(ElementId id, Timepoint now);

  /// Evaluates any pending timepoint and returns the verdicts it produced
  /// together with buffered ones.
  std::vector<MatchVerdict> flush();

  /// Receives verdicts produced from graph notifications. Without a sink
  /// they are buffered until flush().
  void set_sink(VerdictSink sink);

  const StructuralQuery& query() const noexcept;
  const std::vector<std::string>& diagnostics() const noexcept;
  /// Wall-clock nanoseconds spent evaluating trigger and body patterns.
  std::uint64_t evaluation_ns() const noexcept;
  std::size_t pending_anchors() const noexcept;
  /// Trigger bindings reported at the current timepoint (the dedup store).
  std::size_t dedup_size() const noexcept;

 private:
  friend std::unique_ptr<Monitor> attach(const StructuralQuery&, TemporalGraph&);
  struct Impl;
  explicit Monitor(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

/// Compiles `query` against the graph schema and subscribes to its trigger
/// types. Throws QueryError(kSchemaMismatch) on unknown types, attributes or
/// edge types whose endpoints cannot connect the variables.
std::unique_ptr<Monitor> attach(const StructuralQuery& query, TemporalGraph& graph);

/// Brute-force evaluator: replays `events` into its own store and, at every
/// timestamp, enumerates all trigger matches exhaustively. Output sorted.
std::vector<MatchVerdict> oracle_eval(const StructuralQuery& query, const TypeSchema& schema,
                                      const EventSequence& events);

}  // namespace rtm
