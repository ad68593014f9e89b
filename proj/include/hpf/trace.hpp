#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hpf/monitor.hpp"
#include "hpf/safety_field.hpp"

namespace hpf {

struct TraceStep {
  PoseSample sample;
  Zone zone = Zone::Safe;
  FieldEvaluation eval;
  std::vector<MonitorEvent> events;

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

/// Time series produced by one scenario run or loaded from a trace file.
struct Trace {
  std::uint64_t fingerprint = 0;
  double dt = 0.0;
  std::string label;  // free-form grouping tag, e.g. the experimental condition
  SafetyParams params;
  std::vector<TraceStep> steps;
  // Reaction latencies drawn during the run; not persisted.
  std::vector<double> latencies;

  bool empty() const { return steps.empty(); }
  double duration() const { return dt * static_cast<double>(steps.size()); }
};

}  // namespace hpf
