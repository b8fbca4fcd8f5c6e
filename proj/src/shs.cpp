#include "rtm/shs.hpp"

#include <algorithm>
#include <random>

namespace rtm {

TypeSchema shs_schema() {
  TypeSchema s;
  s.add_node_type("AbstractMonitoringResult");
  s.add_node_type("AbstractEntity", {}, {"AbstractMonitoringResult"});
  s.add_node_type("PatientSensor", {}, {"AbstractEntity"});
  s.add_node_type("Pump", {}, {"AbstractEntity"});
  s.add_node_type("Connector", {}, {"AbstractMonitoringResult"});
  s.add_node_type("StringValue", {{"value", AttributeKind::kString}}, {"AbstractMonitoringResult"});
  s.add_edge_type("emits", "PatientSensor", "StringValue");
  s.add_edge_type("takes", "Pump", "StringValue");
  s.add_edge_type("src", "Connector", "AbstractEntity");
  s.add_edge_type("tgt", "Connector", "AbstractEntity");
  return s;
}

void SimConfig::validate() const {
  if (num_sensors < 0) throw SimConfigError("num_sensors must be >= 0");
  if (datum_events_per_sensor < 0) throw SimConfigError("datum_events_per_sensor must be >= 0");
  if (reaction_events_per_pump < 0) throw SimConfigError("reaction_events_per_pump must be >= 0");
  if (!(op_probability >= 0.0 && op_probability <= 1.0)) throw SimConfigError("op_probability must lie in [0, 1]");
  if (horizon < 1) throw SimConfigError("horizon must be >= 1");
  if (loop_interval < 1) throw SimConfigError("loop_interval must be >= 1");
}

std::vector<std::string> SimConfig::header() const {
  return {
      "rng=mt19937_64 seed=" + std::to_string(seed),
      "sensors=" + std::to_string(num_sensors) + " datums_per_sensor=" + std::to_string(datum_events_per_sensor) +
          " reactions_per_pump=" + std::to_string(reaction_events_per_pump),
      "op_probability=" + std::to_string(op_probability) + " horizon=" + std::to_string(horizon) +
          " loop_interval=" + std::to_string(loop_interval),
  };
}

Workload generate(const SimConfig& config) {
  config.validate();
  Workload w;
  const Timepoint t0{0};
  const auto n = config.num_sensors;
  // Ids follow creation order: per sensor i, s_i, p_i, c_i, src edge, tgt edge.
  for (std::int64_t i = 0; i < n; ++i) {
    const auto base = static_cast<ElementId>(kFirstElementId + 5 * i);
    const auto idx = std::to_string(i);
    w.initial.push_back({t0, CreateNode{"PatientSensor", {}, "s" + idx}});
    w.initial.push_back({t0, CreateNode{"Pump", {}, "p" + idx}});
    w.initial.push_back({t0, CreateNode{"Connector", {}, "c" + idx}});
    w.initial.push_back({t0, CreateEdge{"src", base + 2, base + 1, "cs" + idx}});
    w.initial.push_back({t0, CreateEdge{"tgt", base + 2, base, "ct" + idx}});
  }

  std::mt19937_64 rng(config.seed);
  const auto horizon = static_cast<std::uint64_t>(config.horizon);
  auto timestamp = [&] { return Timepoint{static_cast<std::int64_t>(1 + rng() % horizon)}; };
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  w.observations.reserve(static_cast<std::size_t>(n * (config.datum_events_per_sensor + config.reaction_events_per_pump)));
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t k = 0; k < config.datum_events_per_sensor; ++k) {
      const Timepoint ts = timestamp();
      const bool op = unit() < config.op_probability;
      w.observations.push_back({ts, ObservationKind::kDatum, i, op ? "op" : "noise"});
    }
  }
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t k = 0; k < config.reaction_events_per_pump; ++k) {
      w.observations.push_back({timestamp(), ObservationKind::kReaction, i, "anti"});
    }
  }
  std::stable_sort(w.observations.begin(), w.observations.end(),
                   [](const Observation& a, const Observation& b) { return a.timestamp < b.timestamp; });
  return w;
}

EventSequence Workload::events() const {
  EventSequence out = initial;
  out.reserve(initial.size() + 2 * observations.size());
  ElementId next = kFirstElementId + initial.size();
  std::size_t datums = 0;
  std::size_t reactions = 0;
  for (const auto& o : observations) {
    const bool datum = o.kind == ObservationKind::kDatum;
    const auto device = static_cast<ElementId>(kFirstElementId + 5 * o.device + (datum ? 0 : 1));
    const std::string k = std::to_string(datum ? datums++ : reactions++);
    const ElementId node = next++;
    out.push_back({o.timestamp, CreateNode{"StringValue", {{"value", o.value}}, (datum ? "d" : "r") + k}});
    out.push_back({o.timestamp, CreateEdge{datum ? "emits" : "takes", device, node, (datum ? "ed" : "er") + k}});
    ++next;
  }
  return out;
}

}  // namespace rtm
