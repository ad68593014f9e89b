#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hpf/errors.hpp"
#include "hpf/io/config.hpp"
#include "hpf/monitor.hpp"
#include "hpf/rng.hpp"
#include "hpf/scenario.hpp"
#include "hpf/trace.hpp"

namespace hpf {

namespace detail {

/// Constant-speed traversal of a polyline with exact arrival and optional
/// dwell at each vertex.
class PathFollower {
 public:
  PathFollower(std::vector<Point3> waypoints, double speed, bool loop, double dwell)
      : waypoints_(std::move(waypoints)),
        speed_(speed),
        loop_(loop),
        dwell_(dwell),
        position_(waypoints_.front()) {}

  const Point3& position() const { return position_; }

  /// Velocity the follower will move with over the next interval, ignoring
  /// dwell boundaries inside that interval.
  Vector3 commanded_velocity() const {
    if (dwell_left_ > 0.0 || finished()) return {};
    const Vec3 to = waypoints_[target_] - position_;
    const double len = norm(to);
    if (len == 0.0) return {};
    return to * (speed_ / len);
  }

  void advance(double dt) {
    double time_left = dt;
    // Bounded so a zero-length loop cannot spin forever.
    for (std::size_t guard = 0; time_left > 0.0 && guard < 4 * waypoints_.size() + 8; ++guard) {
      if (dwell_left_ > 0.0) {
        const double used = std::min(time_left, dwell_left_);
        dwell_left_ -= used;
        time_left -= used;
        continue;
      }
      if (finished()) return;
      const Point3 target = waypoints_[target_];
      const double dist = norm(target - position_);
      const double reach = speed_ * time_left;
      if (reach >= dist) {
        position_ = target;
        time_left -= dist / speed_;
        next_target();
        dwell_left_ = dwell_;
      } else {
        position_ += (target - position_) * (reach / dist);
        time_left = 0.0;
      }
    }
  }

 private:
  bool finished() const { return target_ >= waypoints_.size(); }

  void next_target() {
    ++target_;
    if (loop_ && target_ >= waypoints_.size()) target_ = 0;
  }

  std::vector<Point3> waypoints_;
  double speed_;
  bool loop_;
  double dwell_;
  Point3 position_;
  std::size_t target_ = 1;
  double dwell_left_ = 0.0;
};

inline Vec3 clamp_norm(const Vec3& v, double max_len) {
  const double n = norm(v);
  return n > max_len && n > 0.0 ? v * (max_len / n) : v;
}

/// Operator hand driven by one of the HandModel alternatives.
class HandAgent {
 public:
  HandAgent(const HandModel& model, const SafetyParams& params, std::uint64_t seed)
      : model_(model), params_(params), rng_(seed), position_(hand_start(model)) {
    if (const auto* s = std::get_if<ScriptedHand>(&model_)) {
      path_.emplace(s->waypoints, s->speed, s->loop, 0.0);
    }
    anchor_ = position_;
  }

  const Point3& position() const { return position_; }
  const std::vector<double>& latencies() const { return latencies_; }

  /// Velocity for the interval starting at `t`, given the TCP state seen in
  /// the previous monitor step.
  Vector3 plan(double t, const Point3& tcp, const Vector3& tcp_v, double dt) {
    if (std::holds_alternative<StaticHand>(model_)) {
      velocity_ = {};
    } else if (path_) {
      velocity_ = path_->commanded_velocity();
    } else {
      velocity_ = plan_reactive(t, tcp, tcp_v, dt);
    }
    return velocity_;
  }

  /// Feeds the monitor outcome of the step at time `t`.
  void observe(double t, double d, const MonitorState& state) {
    const auto* r = std::get_if<ReactiveHand>(&model_);
    if (!r) return;
    if (mode_ != Mode::Idle && mode_ != Mode::Returning) return;

    bool cue = false;
    if (r->trigger == TriggerKind::HapticEvent) {
      cue = state.haptic_active;
    } else {
      if (d > r->visual_threshold + kEpisodeRearm) {
        episode_open_ = false;
        missed_ = false;
      } else if (d <= r->visual_threshold) {
        if (!episode_open_) {
          episode_open_ = true;
          missed_ = rng_.bernoulli(r->miss_probability);
        }
        // A missed cue is caught once the robot visibly halts nearby.
        cue = !missed_ || state.stop_latched;
      }
    }
    if (cue) {
      const auto [lo, hi] = latency_bounds(*r);
      const double latency = rng_.truncated_normal(r->latency_mean, r->latency_std, lo, hi);
      latencies_.push_back(latency);
      trigger_t_ = t;
      latency_ = latency;
      anchor_ = position_;
      mode_ = Mode::Waiting;
    }
  }

  void advance(double dt) {
    if (path_) {
      path_->advance(dt);
      position_ = path_->position();
    } else {
      position_ += velocity_ * dt;
    }
  }

 private:
  enum class Mode { Idle, Waiting, Retreating, Holding, Returning };

  static constexpr double kJitterPull = 2.0;      // 1/s, pull back to the anchor
  static constexpr double kEpisodeRearm = 0.05;   // m beyond the visual threshold
  static constexpr double kHoldSlack = 0.05;      // m below clearance to re-retreat

  Vector3 jitter(const ReactiveHand& r) {
    const Vec3 noise = rng_.unit_vector() * (r.jitter_amplitude * rng_.uniform());
    const Vec3 pull = (anchor_ - position_) * kJitterPull;
    // Strictly below the amplitude so jitter never reaches the intent threshold.
    return clamp_norm(noise + pull, r.jitter_amplitude * (1.0 - 1e-9));
  }

  Vector3 plan_reactive(double t, const Point3& tcp, const Vector3& tcp_v, double dt) {
    const auto& r = std::get<ReactiveHand>(model_);
    const double d = norm(position_ - tcp);

    if (mode_ == Mode::Waiting && t - trigger_t_ >= latency_) {
      mode_ = Mode::Retreating;
      speed_ = 0.0;
    }
    if (mode_ == Mode::Retreating && d >= r.retreat_clearance) {
      mode_ = Mode::Holding;
      anchor_ = position_;
    }
    if (mode_ == Mode::Holding) {
      if (d < r.retreat_clearance - kHoldSlack) {
        mode_ = Mode::Retreating;
        speed_ = 0.0;
      } else if (r.returns && norm(tcp - r.home) >= r.return_clearance &&
                 dot(tcp_v, r.home - tcp) <= 0.0) {
        mode_ = Mode::Returning;
      }
    }
    if (mode_ == Mode::Returning && norm(tcp - r.home) < r.return_clearance) {
      mode_ = Mode::Holding;
      anchor_ = position_;
    }

    switch (mode_) {
      case Mode::Idle:
      case Mode::Waiting:
      case Mode::Holding:
        return jitter(r);
      case Mode::Retreating: {
        Vec3 away = position_ - tcp;
        const double len = norm(away);
        if (len > kCoincidenceTolerance) retreat_dir_ = away / len;
        speed_ = std::isinf(r.retreat_accel) ? r.retreat_speed
                                             : std::min(r.retreat_speed, speed_ + r.retreat_accel * dt);
        return retreat_dir_ * speed_;
      }
      case Mode::Returning: {
        const Vec3 to = r.home - position_;
        const double len = norm(to);
        if (len <= r.return_speed * dt) {
          mode_ = Mode::Idle;
          anchor_ = r.home;
          return to / dt;
        }
        return to * (r.return_speed / len);
      }
    }
    return {};
  }

  HandModel model_;
  SafetyParams params_;
  Rng rng_;
  Point3 position_;
  Vector3 velocity_;
  std::optional<PathFollower> path_;

  Mode mode_ = Mode::Idle;
  Point3 anchor_;
  Vec3 retreat_dir_{0.0, 0.0, 1.0};
  double speed_ = 0.0;
  double trigger_t_ = 0.0;
  double latency_ = 0.0;
  bool episode_open_ = false;
  bool missed_ = false;
  std::vector<double> latencies_;
};

}  // namespace detail

inline std::size_t step_count(double duration, double dt) {
  return static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
}

/// Runs a scenario in a deterministic lockstep loop.
///
/// Each step samples robot and hand, advances the monitor, lets the hand react
/// to the outcome, and moves both agents. A robot that obeys stops does not
/// move after the step in which RobotStop fires, until RobotResume.
inline Trace run_scenario(const Scenario& sc) {
  validate(sc);
  Trace trace;
  trace.fingerprint = io::fingerprint(sc);
  trace.dt = sc.dt;
  trace.params = sc.params;

  const std::size_t n = step_count(sc.duration, sc.dt);
  trace.steps.reserve(n);

  detail::PathFollower robot(sc.robot.waypoints, sc.robot.speed, sc.robot.loop, sc.robot.dwell);
  detail::HandAgent hand(sc.hand, sc.params, mix_seed(sc.seed, 1));
  MonitorState state;

  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * sc.dt;
    const bool halted = sc.robot.obeys_stop && state.stop_latched;
    PoseSample s;
    s.t = t;
    s.tcp = robot.position();
    s.tcp_v = halted ? Vector3{} : robot.commanded_velocity();
    s.hand = hand.position();
    s.hand_v = hand.plan(t, s.tcp, s.tcp_v, sc.dt);

    auto r = step(state, s, sc.params);
    state = r.state;
    hand.observe(t, r.state.last.d, state);

    if (!(sc.robot.obeys_stop && state.stop_latched)) robot.advance(sc.dt);
    hand.advance(sc.dt);

    trace.steps.push_back({s, r.zone, r.state.last, std::move(r.events)});
  }
  trace.latencies = hand.latencies();
  return trace;
}

/// One stopwatch reading of the reaction-time protocol.
struct ReactionTrial {
  std::optional<double> measured;  // nullopt when the field was never entered
  std::optional<double> latency;   // configured latency drawn for the trial
};

/// Stopwatch over a trace: starts at the first step with d <= d_ha and stops
/// at the first later step whose hand speed exceeds v_intent.
inline std::optional<double> stopwatch(const Trace& trace) {
  const auto& steps = trace.steps;
  std::size_t start = steps.size();
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (steps[k].eval.d <= steps[k].eval.d_ha) {
      start = k;
      break;
    }
  }
  if (start == steps.size()) return std::nullopt;
  for (std::size_t k = start + 1; k < steps.size(); ++k) {
    if (norm(steps[k].sample.hand_v) > trace.params.v_intent) {
      return steps[k].sample.t - steps[start].sample.t;
    }
  }
  return std::nullopt;
}

struct ReactionMeasurement {
  std::vector<ReactionTrial> trials;
  bool all_missing = false;
};

/// Repeats the reaction-time protocol `trials` times. Trial i runs with the
/// seed mix_seed(sc.seed, first_trial + i).
inline ReactionMeasurement measure_reaction_time(const Scenario& sc, std::size_t trials,
                                                 std::uint64_t first_trial = 0) {
  const auto* hand = std::get_if<ReactiveHand>(&sc.hand);
  if (!hand || hand->trigger != TriggerKind::HapticEvent) {
    throw InvalidInput("reaction-time protocol needs a reactive hand with a haptic trigger");
  }
  ReactionMeasurement out;
  out.trials.reserve(trials);
  bool any = false;
  for (std::size_t i = 0; i < trials; ++i) {
    Scenario trial = sc;
    trial.seed = mix_seed(sc.seed, first_trial + i);
    const Trace trace = run_scenario(trial);
    ReactionTrial rt;
    rt.measured = stopwatch(trace);
    if (!trace.latencies.empty()) rt.latency = trace.latencies.front();
    any = any || rt.measured.has_value();
    out.trials.push_back(rt);
  }
  out.all_missing = !any;
  return out;
}

/// One trace per simulated subject under the given feedback condition.
/// Subject i uses the seed mix_seed(seed, 2 * i + condition).
inline std::vector<Trace> run_assembly_experiment(Condition condition, std::size_t subjects,
                                                  std::uint64_t seed,
                                                  const Scenario& base = exp2_preset()) {
  if (!std::holds_alternative<ReactiveHand>(base.hand)) {
    throw InvalidInput("assembly experiment needs a reactive hand");
  }
  std::vector<Trace> traces;
  traces.reserve(subjects);
  const std::uint64_t cond = condition == Condition::Visual ? 0 : 1;
  for (std::size_t i = 0; i < subjects; ++i) {
    Scenario sc = with_condition(base, condition);
    sc.seed = mix_seed(seed, 2 * i + cond);
    Trace t = run_scenario(sc);
    t.label = to_string(condition);
    traces.push_back(std::move(t));
  }
  return traces;
}

}  // namespace hpf
