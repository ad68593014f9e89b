#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hpf/rng.hpp"
#include "hpf/safety_field.hpp"

namespace hpf {
namespace {

void expect_vec_near(const Vec3& a, const Vec3& b, double tol = 1e-15) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

TEST(WeightedRelativeVelocity, Examples) {
  expect_vec_near(weighted_relative_velocity({0.2, 0, 0}, {-0.1, 0, 0}, 1, 1), {0.3, 0, 0});
  expect_vec_near(weighted_relative_velocity({}, {}, 1, 1), {});
  expect_vec_near(weighted_relative_velocity({0.1, 0.2, 0}, {0.05, 0, 0}, 2, 0.5),
                  {0.175, 0.4, 0});
}

TEST(WeightedRelativeVelocity, UnitWeightsSelectOneAgent) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vec3 vr = rng.unit_vector() * rng.uniform(0, 2);
    const Vec3 vh = rng.unit_vector() * rng.uniform(0, 2);
    EXPECT_EQ(weighted_relative_velocity(vr, vh, 1, 0), vr);
    EXPECT_EQ(weighted_relative_velocity(vr, vh, 0, 1), -vh);
  }
}

TEST(ApproachingSpeed, Examples) {
  EXPECT_DOUBLE_EQ(approaching_speed({0.3, 0, 0}, {0, 0, 0}, {1, 0, 0}), 0.3);
  EXPECT_DOUBLE_EQ(approaching_speed({0.3, 0, 0}, {0, 0, 0}, {-1, 0, 0}), -0.3);
  EXPECT_DOUBLE_EQ(approaching_speed({0.3, 0.4, 0}, {0, 0, 0}, {0, 1, 0}), 0.4);
}

TEST(ApproachingSpeed, CoincidentPointsAreDegenerate) {
  EXPECT_THROW(approaching_speed({1, 0, 0}, {0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}), DegenerateGeometry);
  EXPECT_THROW(approaching_speed({1, 0, 0}, {0, 0, 0}, {5e-7, 0, 0}), DegenerateGeometry);
}

TEST(ApproachingSpeed, AntisymmetricUnderVelocityNegation) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = rng.unit_vector() * rng.uniform(0, 3);
    const Point3 tcp{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Point3 hand = tcp + rng.unit_vector() * rng.uniform(0.01, 2);
    EXPECT_EQ(approaching_speed(-v, tcp, hand), -approaching_speed(v, tcp, hand));
  }
}

TEST(HapticRadius, Examples) {
  EXPECT_EQ(haptic_radius(-0.1, 0.3243), 0.0);
  EXPECT_EQ(haptic_radius(0.0, 0.3243), 0.0);
  EXPECT_NEAR(haptic_radius(0.5, 0.3243), 0.16215, 1e-12);
  EXPECT_THROW(haptic_radius(0.5, 0.0), InvalidInput);
}

TEST(HapticRadius, NondecreasingAndZeroForNonClosing) {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const double a = rng.uniform(-2, 2);
    const double b = a + rng.uniform(0, 1);
    const double tr = rng.uniform(0.01, 1);
    EXPECT_LE(haptic_radius(a, tr), haptic_radius(b, tr));
    if (a <= 0) {
      EXPECT_EQ(haptic_radius(a, tr), 0.0);
    }
  }
}

TEST(HapticActivationDistance, Examples) {
  EXPECT_NEAR(haptic_activation_distance(0.25, 0.10, 1.3), 0.35, 1e-12);
  EXPECT_EQ(haptic_activation_distance(0.25, 2.0, 1.3), 1.3);
  EXPECT_EQ(haptic_activation_distance(0.25, 0.0, 1.3), 0.25);
  EXPECT_THROW(haptic_activation_distance(0.5, 0.1, 0.4), InvalidInput);
  EXPECT_THROW(haptic_activation_distance(0.0, 0.1, 0.4), InvalidInput);
  EXPECT_THROW(haptic_activation_distance(0.2, -0.1, 0.4), InvalidInput);
}

TEST(HapticActivationDistance, ClampedAndNondecreasing) {
  Rng rng(6);
  for (int i = 0; i < 500; ++i) {
    const double dps = rng.uniform(0.05, 0.5);
    const double dh = dps + rng.uniform(0, 1);
    const double r1 = rng.uniform(0, 2);
    const double r2 = r1 + rng.uniform(0, 1);
    const double a = haptic_activation_distance(dps, r1, dh);
    EXPECT_GE(a, dps);
    EXPECT_LE(a, dh);
    EXPECT_LE(a, haptic_activation_distance(dps, r2, dh));
  }
}

TEST(EvaluateField, HeadOnApproach) {
  SafetyParams p;
  p.d_ps = 0.25;
  p.d_hmax = 1.3;
  p.t_r = 0.3243;
  PoseSample s{0.0, {0, 0, 0}, {0.5, 0, 0}, {0.8, 0, 0}, {}};
  const auto e = evaluate_field(s, p);
  EXPECT_NEAR(e.v_a, 0.5, 1e-15);
  EXPECT_NEAR(e.r_h, 0.16215, 1e-12);
  EXPECT_NEAR(e.d_ha, 0.41215, 1e-12);
  EXPECT_NEAR(e.d, 0.8, 1e-15);
}

TEST(EvaluateField, StaticAgentsCollapseToPsd) {
  SafetyParams p;
  PoseSample s{0.0, {0, 0, 0}, {}, {0, 0.6, 0}, {}};
  EXPECT_EQ(evaluate_field(s, p).d_ha, p.d_ps);
}

TEST(EvaluateField, RecedingRobotYieldsPsd) {
  SafetyParams p;
  PoseSample s{0.0, {0, 0, 0}, {-0.4, 0.1, 0}, {0.7, 0, 0}, {0.05, 0, 0}};
  const auto e = evaluate_field(s, p);
  EXPECT_LT(e.v_a, 0.0);
  EXPECT_EQ(e.d_ha, p.d_ps);
}

TEST(EvaluateField, MatchesIndependentRecomputation) {
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    SafetyParams p;
    p.d_ps = rng.uniform(0.1, 0.4);
    p.d_hmax = p.d_ps + rng.uniform(0.0, 1.0);
    p.k_r = rng.uniform(0, 3);
    p.k_h = rng.uniform(0, 3);
    p.t_r = rng.uniform(0.05, 1.0);
    PoseSample s;
    s.tcp = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    s.hand = s.tcp + rng.unit_vector() * rng.uniform(0.01, 1.5);
    s.tcp_v = rng.unit_vector() * rng.uniform(0, 1);
    s.hand_v = rng.unit_vector() * rng.uniform(0, 1);

    const double ux = s.hand.x - s.tcp.x, uy = s.hand.y - s.tcp.y, uz = s.hand.z - s.tcp.z;
    const double len = std::sqrt(ux * ux + uy * uy + uz * uz);
    const double wx = p.k_r * s.tcp_v.x - p.k_h * s.hand_v.x;
    const double wy = p.k_r * s.tcp_v.y - p.k_h * s.hand_v.y;
    const double wz = p.k_r * s.tcp_v.z - p.k_h * s.hand_v.z;
    const double va = (wx * ux + wy * uy + wz * uz) / len;
    const double rh = va > 0 ? va * p.t_r : 0.0;
    const double dha = std::min(p.d_hmax, p.d_ps + rh);

    const auto e = evaluate_field(s, p);
    EXPECT_NEAR(e.d_ha, dha, 1e-12);
    EXPECT_NEAR(e.d, len, 1e-12);
  }
}

TEST(SafetyParams, ValidationNamesInvariant) {
  SafetyParams p;
  p.d_ps = 1.5;
  try {
    validate(p);
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("d_ps <= d_hmax"), std::string::npos);
  }
  p = {};
  p.t_r = 0;
  EXPECT_THROW(validate(p), InvalidInput);
  p = {};
  p.d_pdd = 0.1;
  EXPECT_THROW(validate(p), InvalidInput);
  p = {};
  p.fixed_d_ha = 0.1;
  EXPECT_THROW(validate(p), InvalidInput);
  EXPECT_NO_THROW(validate(SafetyParams{}));
}

}  // namespace
}  // namespace hpf
