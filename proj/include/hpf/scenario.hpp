#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "hpf/errors.hpp"
#include "hpf/safety_field.hpp"
#include "hpf/vec3.hpp"

namespace hpf {

/// Piecewise-linear TCP motion at constant speed with exact arrival at each
/// waypoint. The robot starts at the first waypoint.
struct RobotScript {
  std::vector<Point3> waypoints;
  double speed = 0.1;
  bool obeys_stop = true;
  bool loop = false;   // after the last waypoint, head back to the first
  double dwell = 0.0;  // seconds held at every reached waypoint

  friend bool operator==(const RobotScript&, const RobotScript&) = default;
};

struct StaticHand {
  Point3 position;

  friend bool operator==(const StaticHand&, const StaticHand&) = default;
};

struct ScriptedHand {
  std::vector<Point3> waypoints;
  double speed = 0.1;
  bool loop = false;

  friend bool operator==(const ScriptedHand&, const ScriptedHand&) = default;
};

enum class TriggerKind {
  HapticEvent,     // reacts to the haptic stimulus (VH condition)
  VisualDistance,  // reacts on seeing the TCP inside a distance (V condition)
};

/// Operator hand that idles with sub-threshold jitter, reacts to a cue after
/// a sampled latency, retreats away from the TCP, holds, and returns to work
/// once the robot has cleared the home position.
struct ReactiveHand {
  Point3 home;
  TriggerKind trigger = TriggerKind::HapticEvent;
  double latency_mean = 0.3243;
  double latency_std = 0.0;
  double visual_threshold = 0.45;  // VisualDistance only
  double miss_probability = 0.0;   // VisualDistance only, per approach
  double retreat_speed = 0.5;
  double retreat_accel = std::numeric_limits<double>::infinity();
  double retreat_clearance = 0.5;  // TCP distance that ends the retreat
  bool returns = false;
  double return_clearance = 0.6;   // TCP-to-home distance required to return
  double return_speed = 0.3;
  double jitter_amplitude = 0.05;

  friend bool operator==(const ReactiveHand&, const ReactiveHand&) = default;
};

using HandModel = std::variant<StaticHand, ScriptedHand, ReactiveHand>;

struct Scenario {
  RobotScript robot;
  HandModel hand;
  SafetyParams params;
  double dt = 0.001;
  double duration = 1.0;
  std::uint64_t seed = 0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Lower and upper truncation bounds applied to sampled reaction latencies.
inline std::pair<double, double> latency_bounds(const ReactiveHand& h) {
  return {std::max(0.0, h.latency_mean - 3.0 * h.latency_std),
          h.latency_mean + 3.0 * h.latency_std};
}

inline Point3 hand_start(const HandModel& hand) {
  struct {
    Point3 operator()(const StaticHand& h) const { return h.position; }
    Point3 operator()(const ScriptedHand& h) const { return h.waypoints.front(); }
    Point3 operator()(const ReactiveHand& h) const { return h.home; }
  } visitor;
  return std::visit(visitor, hand);
}

/// Re-checks every scenario-level invariant; throws InvalidInput.
inline void validate(const Scenario& sc) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidInput("scenario: " + what);
  };
  validate(sc.params);
  require(std::isfinite(sc.dt) && sc.dt > 0.0, "dt > 0");
  require(std::isfinite(sc.duration) && sc.duration > 0.0, "duration > 0");
  require(!sc.robot.waypoints.empty(), "robot needs at least one waypoint");
  require(std::isfinite(sc.robot.speed) && sc.robot.speed > 0.0, "robot speed > 0");
  require(std::isfinite(sc.robot.dwell) && sc.robot.dwell >= 0.0, "robot dwell >= 0");
  for (const auto& p : sc.robot.waypoints) require(is_finite(p), "robot waypoints finite");

  if (const auto* h = std::get_if<StaticHand>(&sc.hand)) {
    require(is_finite(h->position), "hand position finite");
  } else if (const auto* h = std::get_if<ScriptedHand>(&sc.hand)) {
    require(!h->waypoints.empty(), "scripted hand needs at least one waypoint");
    require(std::isfinite(h->speed) && h->speed > 0.0, "scripted hand speed > 0");
    for (const auto& p : h->waypoints) require(is_finite(p), "hand waypoints finite");
  } else {
    const auto& r = std::get<ReactiveHand>(sc.hand);
    const double v_intent = sc.params.v_intent;
    require(is_finite(r.home), "hand home finite");
    require(r.latency_mean >= 0.0 && std::isfinite(r.latency_mean), "latency >= 0");
    require(r.latency_std >= 0.0 && std::isfinite(r.latency_std), "latency std >= 0");
    require(r.retreat_speed > v_intent && std::isfinite(r.retreat_speed),
            "retreat_speed > v_intent");
    require(r.retreat_accel > 0.0, "retreat_accel > 0");
    require(r.jitter_amplitude >= 0.0 && r.jitter_amplitude < v_intent,
            "0 <= jitter_amplitude < v_intent");
    require(r.retreat_clearance > sc.params.d_ps && std::isfinite(r.retreat_clearance),
            "retreat_clearance > d_ps");
    require(r.visual_threshold > 0.0 && std::isfinite(r.visual_threshold),
            "visual_threshold > 0");
    require(r.miss_probability >= 0.0 && r.miss_probability <= 1.0,
            "0 <= miss_probability <= 1");
    require(r.return_speed > 0.0 && std::isfinite(r.return_speed), "return_speed > 0");
    require(r.return_clearance > 0.0 && std::isfinite(r.return_clearance),
            "return_clearance > 0");
  }
}

/// Reaction-time protocol: PSD 0.20 m, constant haptic field of 0.40 m, the
/// robot creeping at 0.1 m/s toward a static, blindfolded operator hand.
inline Scenario exp1_preset() {
  Scenario sc;
  sc.params.d_ps = 0.20;
  sc.params.d_pdd = 0.40;
  sc.params.fixed_d_ha = 0.40;
  sc.robot.waypoints = {{0.0, 0.0, 0.3}, {0.6, 0.0, 0.3}};
  sc.robot.speed = 0.1;
  ReactiveHand hand;
  hand.home = {0.6, 0.0, 0.3};
  hand.trigger = TriggerKind::HapticEvent;
  hand.latency_mean = 0.3243;
  hand.latency_std = 0.0715;
  hand.retreat_speed = 0.5;
  hand.retreat_clearance = 0.6;
  sc.hand = hand;
  sc.dt = 0.001;
  sc.duration = 4.0;
  sc.seed = 1;
  return sc;
}

/// Collaborative assembly: PSD 0.25 m, PDD 0.40 m, the robot cycling parts
/// between a bin and a drop point next to the worker's hand, resume enabled.
/// Defaults to the visual-plus-haptic condition.
inline Scenario exp2_preset() {
  Scenario sc;
  sc.params.d_ps = 0.25;
  sc.params.d_pdd = 0.40;
  sc.params.k_r = 2.0;
  sc.params.k_h = 1.0;
  sc.params.resume.enabled = true;
  sc.params.resume.margin = 0.05;
  sc.robot.waypoints = {{0.0, 0.7, 0.3}, {0.6, 0.12, 0.05}};
  sc.robot.speed = 0.25;
  sc.robot.loop = true;
  sc.robot.dwell = 1.5;
  ReactiveHand hand;
  hand.home = {0.6, 0.0, 0.0};
  hand.trigger = TriggerKind::HapticEvent;
  hand.latency_mean = 0.3243;
  hand.latency_std = 0.0715;
  hand.visual_threshold = 0.45;
  hand.retreat_speed = 0.5;
  hand.retreat_accel = 8.0;
  hand.retreat_clearance = 0.5;
  hand.returns = true;
  hand.return_clearance = 0.6;
  hand.return_speed = 0.3;
  sc.hand = hand;
  sc.dt = 0.001;
  sc.duration = 120.0;
  sc.seed = 1;
  return sc;
}

enum class Condition { Visual, VisualHaptic };

inline std::string to_string(Condition c) { return c == Condition::Visual ? "V" : "VH"; }

/// Applies the condition-specific operator model on top of an assembly
/// scenario. The visual model is a tuning knob, not a measured value.
inline Scenario with_condition(Scenario sc, Condition c) {
  auto& hand = std::get<ReactiveHand>(sc.hand);
  if (c == Condition::VisualHaptic) {
    hand.trigger = TriggerKind::HapticEvent;
    hand.latency_mean = sc.params.t_r;
    hand.latency_std = 0.0715;
    hand.miss_probability = 0.0;
  } else {
    hand.trigger = TriggerKind::VisualDistance;
    hand.latency_mean = 0.7;
    hand.latency_std = 0.3;
    hand.visual_threshold = 0.45;
    hand.miss_probability = 0.3;
  }
  return sc;
}

}  // namespace hpf
