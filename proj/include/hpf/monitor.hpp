#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "hpf/errors.hpp"
#include "hpf/safety_field.hpp"

namespace hpf {

/// Proximity classification, ordered from most to least dangerous.
enum class Zone { Stop = 0, Haptic = 1, Safe = 2 };

enum class EventKind { HapticOn, HapticOff, RobotStop, RobotResume };

struct MonitorEvent {
  double t = 0.0;
  EventKind kind = EventKind::HapticOn;

  friend bool operator==(const MonitorEvent&, const MonitorEvent&) = default;
};

constexpr std::string_view to_string(Zone z) {
  switch (z) {
    case Zone::Stop: return "STOP";
    case Zone::Haptic: return "HAPTIC";
    case Zone::Safe: return "SAFE";
  }
  return "?";
}

constexpr std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::HapticOn: return "HapticOn";
    case EventKind::HapticOff: return "HapticOff";
    case EventKind::RobotStop: return "RobotStop";
    case EventKind::RobotResume: return "RobotResume";
  }
  return "?";
}

inline std::optional<Zone> zone_from_string(std::string_view s) {
  if (s == "STOP") return Zone::Stop;
  if (s == "HAPTIC") return Zone::Haptic;
  if (s == "SAFE") return Zone::Safe;
  return std::nullopt;
}

inline std::optional<EventKind> event_kind_from_string(std::string_view s) {
  if (s == "HapticOn") return EventKind::HapticOn;
  if (s == "HapticOff") return EventKind::HapticOff;
  if (s == "RobotStop") return EventKind::RobotStop;
  if (s == "RobotResume") return EventKind::RobotResume;
  return std::nullopt;
}

/// Memoryless classification with closed boundaries toward the more
/// protective zone: d == d_ps is STOP, d == d_ha is HAPTIC.
constexpr Zone classify_zone(double d, double d_ps, double d_ha) {
  if (d <= d_ps) return Zone::Stop;
  if (d <= d_ha) return Zone::Haptic;
  return Zone::Safe;
}

struct MonitorState {
  Zone zone = Zone::Safe;
  bool haptic_active = false;
  bool stop_latched = false;
  FieldEvaluation last;
  std::optional<double> last_t;

  friend bool operator==(const MonitorState&, const MonitorState&) = default;
};

struct StepResult {
  MonitorState state;
  Zone zone = Zone::Safe;
  std::vector<MonitorEvent> events;
};

/// Pristine state: SAFE, no haptic output, no latched stop.
inline MonitorState reset(const MonitorState& = {}) { return MonitorState{}; }

/// Advances the monitor by one sample.
///
/// The reported zone carries the haptic hysteresis: once the haptic output is
/// on, the zone stays HAPTIC until d exceeds d_ha + hysteresis. While a stop
/// is latched the robot velocity is dropped from the weighted relative
/// velocity. Coincident TCP and hand classify as STOP instead of throwing.
inline StepResult step(const MonitorState& state, const PoseSample& sample,
                       const SafetyParams& params) {
  if (state.last_t && !(sample.t > *state.last_t)) {
    throw StreamError(0, "non-monotonic timestamp " + std::to_string(sample.t));
  }
  if (!std::isfinite(sample.t) || !is_finite(sample.tcp) || !is_finite(sample.hand) ||
      !is_finite(sample.tcp_v) || !is_finite(sample.hand_v)) {
    throw StreamError(0, "non-finite sample value");
  }

  PoseSample effective = sample;
  if (state.stop_latched) effective.tcp_v = {};

  FieldEvaluation eval;
  Zone raw;
  try {
    eval = evaluate_field(effective, params);
    raw = classify_zone(eval.d, params.d_ps, eval.d_ha);
  } catch (const DegenerateGeometry&) {
    eval = {};
    eval.d = tcp_hand_distance(sample.tcp, sample.hand);
    eval.v_w = weighted_relative_velocity(effective.tcp_v, effective.hand_v, params.k_r,
                                          params.k_h);
    eval.v_a = norm(eval.v_w);
    eval.r_h = haptic_radius(eval.v_a, params.t_r);
    eval.d_ha = params.fixed_d_ha ? *params.fixed_d_ha : params.d_hmax;
    raw = Zone::Stop;
  }

  StepResult out;
  out.state = state;
  out.state.last_t = sample.t;
  out.state.last = eval;

  Zone zone = raw;
  if (zone == Zone::Safe && state.haptic_active && eval.d <= eval.d_ha + params.hysteresis) {
    zone = Zone::Haptic;
  }

  if (zone != Zone::Safe && !state.haptic_active) {
    out.events.push_back({sample.t, EventKind::HapticOn});
    out.state.haptic_active = true;
  }
  if (zone == Zone::Stop && !state.stop_latched) {
    out.events.push_back({sample.t, EventKind::RobotStop});
    out.state.stop_latched = true;
  } else if (state.stop_latched && params.resume.enabled &&
             eval.d > params.d_ps + params.resume.margin) {
    out.events.push_back({sample.t, EventKind::RobotResume});
    out.state.stop_latched = false;
  }
  if (zone == Zone::Safe && state.haptic_active) {
    out.events.push_back({sample.t, EventKind::HapticOff});
    out.state.haptic_active = false;
  }

  out.state.zone = zone;
  out.zone = zone;
  return out;
}

/// Single-owner wrapper around step() that keeps the running state.
class Monitor {
 public:
  explicit Monitor(SafetyParams params) : params_(std::move(params)) { validate(params_); }

  const std::vector<MonitorEvent>& step(const PoseSample& sample) {
    auto r = hpf::step(state_, sample, params_);
    state_ = r.state;
    events_ = std::move(r.events);
    return events_;
  }

  void reset() {
    state_ = hpf::reset(state_);
    events_.clear();
  }

  const MonitorState& state() const { return state_; }
  const SafetyParams& params() const { return params_; }

 private:
  SafetyParams params_;
  MonitorState state_;
  std::vector<MonitorEvent> events_;
};

}  // namespace hpf
