#pragma once

#include <random>
#include <string>
#include <vector>

#include "rtm/events.hpp"
#include "rtm/formula.hpp"
#include "rtm/query.hpp"
#include "rtm/shs.hpp"

namespace rtm::test {

inline const char* const kPsiText =
    "forall-new [s:PatientSensor -emits-> d:StringValue{value=\"op\"}] implies once[0,3600] exists "
    "[p:Pump -takes-> r:StringValue{value=\"anti\"}, c:Connector(p,s)]";

inline StructuralQuery psi(PastSemantics semantics = PastSemantics::kLifespan) {
  return translate(parse_formula(kPsiText), TranslateOptions{semantics});
}

/// Builds event sequences while predicting the ids a fresh graph assigns.
class Trace {
 public:
  ElementId node(Seconds ts, std::string type, AttributeMap attributes = {}) {
    events.push_back({Timepoint{ts}, CreateNode{std::move(type), std::move(attributes), {}}});
    return next_++;
  }
  ElementId value(Seconds ts, const std::string& v) { return node(ts, "StringValue", {{"value", v}}); }
  ElementId edge(Seconds ts, std::string type, ElementId src, ElementId tgt) {
    events.push_back({Timepoint{ts}, CreateEdge{std::move(type), src, tgt, {}}});
    return next_++;
  }
  void remove(Seconds ts, ElementId id) { events.push_back({Timepoint{ts}, DeleteElement{id}}); }

  struct Device {
    ElementId sensor, pump, connector;
  };
  /// Sensor, pump and a connector linking them.
  Device device(Seconds ts) {
    Device d{};
    d.sensor = node(ts, "PatientSensor");
    d.pump = node(ts, "Pump");
    d.connector = node(ts, "Connector");
    edge(ts, "src", d.connector, d.pump);
    edge(ts, "tgt", d.connector, d.sensor);
    return d;
  }
  ElementId datum(Seconds ts, ElementId sensor, const std::string& v = "op") {
    const ElementId id = value(ts, v);
    edge(ts, "emits", sensor, id);
    return id;
  }
  ElementId reaction(Seconds ts, ElementId pump, const std::string& v = "anti") {
    const ElementId id = value(ts, v);
    edge(ts, "takes", pump, id);
    return id;
  }

  EventSequence events;

 private:
  ElementId next_ = kFirstElementId;
};

/// Random SHS-typed trace: devices appear over time, observations arrive,
/// connectors, pumps, reactions and datums are occasionally deleted.
/// Timestamps are non-decreasing with frequent ties.
inline EventSequence random_shs_trace(std::uint64_t seed, std::size_t length, Seconds max_step = 400) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  Trace t;
  Seconds now = 0;
  std::vector<ElementId> sensors, pumps, connectors, values;
  auto live_erase = [](std::vector<ElementId>& v, std::size_t i) {
    v[i] = v.back();
    v.pop_back();
  };
  while (t.events.size() < length) {
    if (pick(3) != 0) now += static_cast<Seconds>(pick(static_cast<std::size_t>(max_step)));
    const std::size_t action = pick(100);
    if (sensors.empty() || action < 4) {
      const auto d = t.device(now);
      sensors.push_back(d.sensor);
      pumps.push_back(d.pump);
      connectors.push_back(d.connector);
    } else if (action < 8 && !pumps.empty() && !sensors.empty()) {
      const ElementId c = t.node(now, "Connector");
      t.edge(now, "src", c, pumps[pick(pumps.size())]);
      t.edge(now, "tgt", c, sensors[pick(sensors.size())]);
      connectors.push_back(c);
    } else if (action < 40) {
      values.push_back(t.datum(now, sensors[pick(sensors.size())], pick(2) ? "op" : "noise"));
    } else if (action < 85 && !pumps.empty()) {
      values.push_back(t.reaction(now, pumps[pick(pumps.size())], pick(8) ? "anti" : "noise"));
    } else if (action < 90 && !connectors.empty()) {
      const std::size_t i = pick(connectors.size());
      t.remove(now, connectors[i]);
      live_erase(connectors, i);
    } else if (action < 93 && pumps.size() > 1) {
      const std::size_t i = pick(pumps.size());
      t.remove(now, pumps[i]);
      live_erase(pumps, i);
    } else if (!values.empty()) {
      const std::size_t i = pick(values.size());
      t.remove(now, values[i]);
      live_erase(values, i);
    }
  }
  return t.events;
}

inline SimConfig desk_config(std::uint64_t seed) {
  SimConfig c;
  c.num_sensors = 3;
  c.datum_events_per_sensor = 200;
  c.reaction_events_per_pump = 600;
  c.horizon = 50000;
  c.seed = seed;
  return c;
}

}  // namespace rtm::test
