#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtm/events.hpp"
#include "rtm/schema.hpp"

namespace rtm {

inline constexpr Seconds kMonthSeconds = 30 * 24 * 3600;

/// Smart-healthcare monitoring schema:
///   AbstractMonitoringResult
///     AbstractEntity { PatientSensor, Pump }
///     Connector      (src -> AbstractEntity, tgt -> AbstractEntity)
///     StringValue    value: string
///   PatientSensor -emits-> StringValue, Pump -takes-> StringValue
TypeSchema shs_schema();

class SimConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SimConfig {
  std::int64_t num_sensors = 10;
  std::int64_t datum_events_per_sensor = 10000;
  std::int64_t reaction_events_per_pump = 30000;
  double op_probability = 0.5;
  Seconds horizon = kMonthSeconds;
  Seconds loop_interval = 3600;
  std::uint64_t seed = 1;

  /// Throws SimConfigError.
  void validate() const;
  /// Comment lines recording the generator and configuration.
  std::vector<std::string> header() const;
};

enum class ObservationKind : std::uint8_t { kDatum, kReaction };

/// One datum (sensor output) or reaction (pump intake): a StringValue node
/// plus the edge attaching it to its device.
struct Observation {
  Timepoint timestamp;
  ObservationKind kind = ObservationKind::kDatum;
  std::int64_t device = 0;  // sensor or pump index
  std::string value;        // "op", "noise" or "anti"
};

struct Workload {
  EventSequence initial;                  // topology at t = 0
  std::vector<Observation> observations;  // sorted by timestamp

  std::size_t initial_elements() const noexcept { return initial.size(); }
  /// Initial topology followed by two events per observation.
  EventSequence events() const;
};

/// Deterministic for a given config. Uses std::mt19937_64 seeded with
/// `seed`; each datum draws its timestamp and then its value, reactions
/// draw only a timestamp. Timestamps are 1 + (draw mod horizon).
Workload generate(const SimConfig& config);

}  // namespace rtm
