#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "hpf/metrics.hpp"
#include "hpf/rng.hpp"
#include "oracles.hpp"

namespace hpf {
namespace {

Trace trace_of(const std::vector<double>& d, double dt) {
  Trace t;
  t.dt = dt;
  for (std::size_t k = 0; k < d.size(); ++k) {
    TraceStep s;
    s.sample.t = static_cast<double>(k) * dt;
    s.eval.d = d[k];
    t.steps.push_back(s);
  }
  return t;
}

TEST(MinDistance, Examples) {
  EXPECT_EQ(min_distance(trace_of(std::vector<double>(50, 0.5), 0.01)), 0.5);
  EXPECT_EQ(min_distance(trace_of({0.5, 0.3, 0.4}, 0.01)), 0.3);
  EXPECT_THROW(min_distance(Trace{}), InvalidInput);
}

TEST(MinDistance, SinusoidWithinOneStepOfAnalyticMinimum) {
  // d(t) = 0.5 + 0.2 sin(2 pi t / 1.37): minimum 0.3, |d'| <= 0.2 * 2 pi / 1.37.
  const double dt = 0.001;
  const double period = 1.37;
  std::vector<double> d;
  for (int k = 0; k < 3000; ++k) {
    d.push_back(0.5 + 0.2 * std::sin(2 * std::numbers::pi * k * dt / period));
  }
  const double got = min_distance(trace_of(d, dt));
  EXPECT_GE(got, 0.3 - 1e-15);
  EXPECT_LE(got, 0.3 + 0.2 * 2 * std::numbers::pi / period * dt);
}

TEST(MinDistance, BoundsEverySampleAndIsAttained) {
  Rng rng(31);
  std::vector<double> d;
  for (int i = 0; i < 500; ++i) d.push_back(rng.uniform(0, 2));
  const double m = min_distance(d);
  bool attained = false;
  for (double v : d) {
    EXPECT_LE(m, v);
    attained = attained || v == m;
  }
  EXPECT_TRUE(attained);
}

TEST(TimeInside, Examples) {
  EXPECT_EQ(time_inside(trace_of(std::vector<double>(100, 0.5), 0.001), 0.4), 0.0);
  EXPECT_NEAR(time_inside(trace_of(std::vector<double>(1000, 0.3), 0.001), 0.4), 1.0, 1e-12);
  EXPECT_NEAR(time_inside(trace_of({0.4, 0.41}, 0.5), 0.4), 0.5, 0.0);
  EXPECT_THROW(time_inside(trace_of({0.1}, 0.001), 0.0), InvalidInput);
}

TEST(TimeInside, RampCrossingMatchesClosedForm) {
  // d(t) = 1 - 0.25 t on [0, 4): below 0.4 for t >= 2.4, i.e. 1.6 s.
  const double dt = 0.001;
  std::vector<double> d;
  for (int k = 0; k < 4000; ++k) d.push_back(1.0 - 0.25 * k * dt);
  EXPECT_NEAR(time_inside(trace_of(d, dt), 0.4), 1.6, dt);
}

TEST(TimeInside, MonotoneInThreshold) {
  Rng rng(32);
  std::vector<double> d;
  for (int i = 0; i < 400; ++i) d.push_back(rng.uniform(0, 1));
  double prev = 0.0;
  for (double th = 0.01; th < 1.2; th += 0.01) {
    const double cur = time_inside(d, 0.01, th);
    EXPECT_GE(cur, prev);
    prev = cur;
  }
}

TEST(PsdViolations, CountsStrictlyInside) {
  const std::vector<double> d{0.3, 0.25, 0.2, 0.1, 0.26};
  EXPECT_EQ(psd_violations(d, 0.25), 2u);
  EXPECT_EQ(psd_violations(d, 0.05), 0u);
}

TEST(Summary, Examples) {
  const std::vector<double> ones{1, 1, 1};
  EXPECT_EQ(summary(ones), (Summary{1, 0}));
  const std::vector<double> two{0, 2};
  const auto s = summary(two);
  EXPECT_EQ(s.mean, 1.0);
  EXPECT_NEAR(s.stddev, std::sqrt(2.0), 1e-15);
  const std::vector<double> one{1};
  EXPECT_THROW(summary(one), InvalidInput);
}

TEST(Summary, MatchesCompensatedOracle) {
  Rng rng(33);
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back(rng.normal(0.3, 0.07));
  const auto got = summary(v);
  const auto want = oracle::mean_std(v);
  EXPECT_NEAR(got.mean, want.mean, 1e-12);
  EXPECT_NEAR(got.stddev, want.stddev, 1e-12);
}

TEST(IncompleteBeta, KnownValues) {
  // I_x(a, b) = P(Binomial(a + b - 1, x) >= a) for integer a, b.
  EXPECT_NEAR(regularized_incomplete_beta(2, 3, 0.5), 11.0 / 16.0, 1e-12);
  EXPECT_NEAR(regularized_incomplete_beta(1, 1, 0.3), 0.3, 1e-12);
  EXPECT_NEAR(regularized_incomplete_beta(3, 2, 0.2), 0.0272, 1e-12);
  EXPECT_EQ(regularized_incomplete_beta(2, 2, 0.0), 0.0);
  EXPECT_EQ(regularized_incomplete_beta(2, 2, 1.0), 1.0);
  EXPECT_THROW(regularized_incomplete_beta(0, 2, 0.5), InvalidInput);
  EXPECT_THROW(regularized_incomplete_beta(2, 2, 1.5), InvalidInput);
}

TEST(FDistribution, TailMatchesIntegratedDensity) {
  for (double d1 : {1.0, 2.0, 3.0}) {
    for (double d2 : {4.0, 8.0, 18.0}) {
      for (double f : {0.1, 0.8, 2.5, 6.4553, 11.3057}) {
        EXPECT_NEAR(f_distribution_sf(f, d1, d2), oracle::f_upper_tail(f, d1, d2), 1e-6)
            << "F(" << d1 << "," << d2 << ") at " << f;
      }
    }
  }
  EXPECT_EQ(f_distribution_sf(0.0, 1, 8), 1.0);
  EXPECT_EQ(f_distribution_sf(std::numeric_limits<double>::infinity(), 1, 8), 0.0);
}

TEST(OnewayAnova, IdenticalGroupsGiveZeroF) {
  const auto r = oneway_anova({{1, 2, 3}, {1, 2, 3}});
  EXPECT_EQ(r.f_value, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.df_between, 1);
  EXPECT_EQ(r.df_within, 4);
}

TEST(OnewayAnova, ZeroWithinVarianceIsInfinite) {
  const auto r = oneway_anova({{0, 0}, {1, 1}});
  EXPECT_TRUE(std::isinf(r.f_value));
  EXPECT_EQ(r.p_value, 0.0);
  EXPECT_THROW(oneway_anova({{2, 2}, {2, 2}}), InvalidInput);
}

TEST(OnewayAnova, RejectsMalformedGroups) {
  EXPECT_THROW(oneway_anova({{1, 2, 3}}), InvalidInput);
  EXPECT_THROW(oneway_anova({{1, 2}, {3}}), InvalidInput);
  EXPECT_THROW(oneway_anova({{1, std::nan("")}, {3, 4}}), InvalidInput);
}

TEST(OnewayAnova, TwoByFiveMatchesLonghand) {
  Rng rng(34);
  std::vector<double> a, b;
  for (int i = 0; i < 5; ++i) {
    a.push_back(rng.normal(0.20, 0.03));
    b.push_back(rng.normal(0.29, 0.03));
  }
  const auto got = oneway_anova({a, b});
  const auto want = oracle::longhand_anova({a, b});
  EXPECT_EQ(got.df_between, 1);
  EXPECT_EQ(got.df_within, 8);
  EXPECT_NEAR(got.f_value, want.f, 1e-9 * std::max(1.0, want.f));
  EXPECT_NEAR(got.p_value, want.p, 1e-6);
  const double t = oracle::pooled_t(a, b);
  EXPECT_NEAR(got.f_value, t * t, 1e-9 * std::max(1.0, t * t));
}

TEST(OnewayAnova, ShiftInvariant) {
  Rng rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> g(3);
    for (auto& grp : g)
      for (int i = 0; i < 6; ++i) grp.push_back(rng.normal(rng.uniform(0, 1), 0.2));
    const double c = rng.uniform(-50, 50);
    auto shifted = g;
    for (auto& grp : shifted)
      for (auto& x : grp) x += c;
    EXPECT_NEAR(oneway_anova(g).f_value, oneway_anova(shifted).f_value, 1e-9);
  }
}

TEST(Improvement, ReferenceAggregates) {
  EXPECT_NEAR(improvement_percent(0.1997, 0.2877), 44.07, 0.005);
  EXPECT_NEAR(ratio_percent(22.69, 5.57), 407.4, 0.05);
  EXPECT_EQ(improvement_percent(3.0, 3.0), 0.0);
  EXPECT_EQ(ratio_percent(3.0, 3.0), 100.0);
  EXPECT_THROW(improvement_percent(0.0, 1.0), InvalidInput);
  EXPECT_THROW(ratio_percent(1.0, 0.0), InvalidInput);
}

}  // namespace
}  // namespace hpf
