#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "hpf/errors.hpp"
#include "hpf/geometry.hpp"
#include "hpf/vec3.hpp"

namespace hpf {

/// Separation below which TCP and hand are treated as coincident.
inline constexpr double kCoincidenceTolerance = 1e-6;

/// When the monitor lets a latched stop go.
struct ResumePolicy {
  bool enabled = false;
  double margin = 0.05;  // resume once d > d_ps + margin

  friend bool operator==(const ResumePolicy&, const ResumePolicy&) = default;
};

/// Speed-and-separation constants plus the haptic-field extension.
/// Distances in meters, speeds in m/s, times in seconds.
struct SafetyParams {
  double d_ps = 0.25;     // protective separation distance
  double d_hmax = 1.3;    // upper bound on the haptic activation distance
  double k_r = 1.0;       // robot velocity weight
  double k_h = 1.0;       // hand velocity weight
  double t_r = 0.3243;    // operator reaction time
  double d_pdd = 0.40;    // potentially dangerous distance (metrics only)
  double v_intent = 0.1;  // hand speed separating intent from jitter
  double hysteresis = 0.02;
  ResumePolicy resume;
  // Pins d_ha to a constant instead of d_ps + r_h (reaction-time protocol).
  std::optional<double> fixed_d_ha;

  friend bool operator==(const SafetyParams&, const SafetyParams&) = default;
};

/// Throws InvalidInput naming the first violated invariant.
inline void validate(const SafetyParams& p) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidInput(std::string("safety params: ") + what);
  };
  require(std::isfinite(p.d_ps) && std::isfinite(p.d_hmax), "distances must be finite");
  require(p.d_ps > 0.0, "0 < d_ps");
  require(p.d_ps <= p.d_hmax, "d_ps <= d_hmax");
  require(p.k_r >= 0.0 && std::isfinite(p.k_r), "k_r >= 0");
  require(p.k_h >= 0.0 && std::isfinite(p.k_h), "k_h >= 0");
  require(p.t_r > 0.0 && std::isfinite(p.t_r), "t_r > 0");
  require(p.d_pdd >= p.d_ps && std::isfinite(p.d_pdd), "d_pdd >= d_ps");
  require(p.v_intent > 0.0 && std::isfinite(p.v_intent), "v_intent > 0");
  require(p.hysteresis >= 0.0 && std::isfinite(p.hysteresis), "hysteresis >= 0");
  require(p.resume.margin >= 0.0 && std::isfinite(p.resume.margin), "resume margin >= 0");
  if (p.fixed_d_ha) {
    require(*p.fixed_d_ha >= p.d_ps && *p.fixed_d_ha <= p.d_hmax,
            "d_ps <= fixed d_ha <= d_hmax");
  }
}

/// One timestamped snapshot of TCP and hand kinematics.
struct PoseSample {
  double t = 0.0;
  Point3 tcp;
  Vector3 tcp_v;
  Point3 hand;
  Vector3 hand_v;

  friend bool operator==(const PoseSample&, const PoseSample&) = default;
};

struct FieldEvaluation {
  Vector3 v_w;       // weighted relative velocity
  double v_a = 0.0;  // signed approaching speed, > 0 when closing
  double r_h = 0.0;  // haptic radius extension
  double d_ha = 0.0; // haptic activation distance
  double d = 0.0;    // current TCP-hand distance

  friend bool operator==(const FieldEvaluation&, const FieldEvaluation&) = default;
};

inline Vector3 weighted_relative_velocity(const Vector3& v_r, const Vector3& v_h,
                                          double k_r, double k_h) {
  return k_r * v_r - k_h * v_h;
}

/// Projection of the weighted relative velocity onto the TCP-to-hand unit
/// vector. Positive values mean the pair is closing.
inline double approaching_speed(const Vector3& v_w, const Point3& tcp, const Point3& hand) {
  const Vec3 offset = hand - tcp;
  const double len = norm(offset);
  if (len <= kCoincidenceTolerance) {
    throw DegenerateGeometry("TCP and hand coincide; approach direction undefined");
  }
  return dot(v_w, offset) / len;
}

/// Zero for non-closing motion, otherwise the distance covered during the
/// operator's reaction time.
inline double haptic_radius(double v_a, double t_r) {
  if (!(t_r > 0.0)) throw InvalidInput("t_r must be > 0");
  return v_a > 0.0 ? v_a * t_r : 0.0;
}

inline double haptic_activation_distance(double d_ps, double r_h, double d_hmax) {
  if (!(d_ps > 0.0) || !(d_ps <= d_hmax)) {
    throw InvalidInput("haptic activation distance requires 0 < d_ps <= d_hmax");
  }
  if (!(r_h >= 0.0)) throw InvalidInput("haptic radius must be >= 0");
  return std::min(d_hmax, d_ps + r_h);
}

/// Full field pipeline for one sample. Throws DegenerateGeometry when the
/// TCP and hand coincide.
inline FieldEvaluation evaluate_field(const PoseSample& s, const SafetyParams& p) {
  FieldEvaluation e;
  e.d = tcp_hand_distance(s.tcp, s.hand);
  e.v_w = weighted_relative_velocity(s.tcp_v, s.hand_v, p.k_r, p.k_h);
  e.v_a = approaching_speed(e.v_w, s.tcp, s.hand);
  e.r_h = haptic_radius(e.v_a, p.t_r);
  e.d_ha = p.fixed_d_ha ? *p.fixed_d_ha : haptic_activation_distance(p.d_ps, e.r_h, p.d_hmax);
  return e;
}

}  // namespace hpf
