#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hpf/errors.hpp"
#include "hpf/trace.hpp"

namespace hpf {

struct TrialStats {
  double min_distance = 0.0;  // m
  double time_in_pdd = 0.0;   // s
  std::size_t psd_violations = 0;  // samples strictly inside the PSD
  std::optional<std::vector<double>> reaction_times;

  friend bool operator==(const TrialStats&, const TrialStats&) = default;
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1) standard deviation

  friend bool operator==(const Summary&, const Summary&) = default;
};

struct AnovaResult {
  double f_value = 0.0;
  int df_between = 0;
  int df_within = 0;
  double p_value = 1.0;

  friend bool operator==(const AnovaResult&, const AnovaResult&) = default;
};

inline std::vector<double> distances(const Trace& trace) {
  std::vector<double> d;
  d.reserve(trace.steps.size());
  for (const auto& s : trace.steps) d.push_back(s.eval.d);
  return d;
}

inline double min_distance(std::span<const double> d) {
  if (d.empty()) throw InvalidInput("min_distance of an empty trace");
  return *std::min_element(d.begin(), d.end());
}

inline double min_distance(const Trace& trace) { return min_distance(distances(trace)); }

/// dt times the number of samples with d <= threshold.
inline double time_inside(std::span<const double> d, double dt, double threshold) {
  if (!(threshold > 0.0)) throw InvalidInput("time_inside threshold must be > 0");
  const auto n = std::count_if(d.begin(), d.end(), [&](double v) { return v <= threshold; });
  return dt * static_cast<double>(n);
}

inline double time_inside(const Trace& trace, double threshold) {
  return time_inside(distances(trace), trace.dt, threshold);
}

inline std::size_t psd_violations(std::span<const double> d, double d_ps) {
  return static_cast<std::size_t>(
      std::count_if(d.begin(), d.end(), [&](double v) { return v < d_ps; }));
}

inline TrialStats trial_stats(const Trace& trace) {
  const auto d = distances(trace);
  TrialStats s;
  s.min_distance = min_distance(d);
  s.time_in_pdd = time_inside(d, trace.dt, trace.params.d_pdd);
  s.psd_violations = psd_violations(d, trace.params.d_ps);
  return s;
}

inline Summary summary(std::span<const double> values) {
  if (values.size() < 2) throw InvalidInput("sample standard deviation needs at least 2 values");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-10;
  constexpr int kMaxIter = 10'000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidInput("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("incomplete beta needs 0 <= x <= 1");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Upper tail P(X > f) of the F distribution with (df1, df2) degrees of freedom.
inline double f_distribution_sf(double f, double df1, double df2) {
  if (std::isinf(f)) return 0.0;
  if (f <= 0.0) return 1.0;
  return regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

/// Between-groups one-way ANOVA. Zero within-group variance with distinct
/// group means yields F = +inf and p = 0; fully identical data throws.
inline AnovaResult oneway_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw InvalidInput("ANOVA needs at least 2 groups");
  std::size_t total_n = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw InvalidInput("ANOVA needs at least 2 values per group");
    for (double v : g) {
      if (!std::isfinite(v)) throw InvalidInput("ANOVA values must be finite");
      grand += v;
    }
    total_n += g.size();
  }
  grand /= static_cast<double>(total_n);

  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& g : groups) {
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(g.size());
    ss_between += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
    for (double v : g) ss_within += (v - mean) * (v - mean);
  }

  AnovaResult r;
  r.df_between = static_cast<int>(groups.size()) - 1;
  r.df_within = static_cast<int>(total_n - groups.size());
  if (ss_within == 0.0) {
    if (ss_between == 0.0) throw InvalidInput("ANOVA F undefined: all values identical");
    r.f_value = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    return r;
  }
  r.f_value = (ss_between / r.df_between) / (ss_within / r.df_within);
  r.p_value = f_distribution_sf(r.f_value, r.df_between, r.df_within);
  return r;
}

/// Relative change in percent, (improved - baseline) / baseline * 100.
/// Used for distances, where larger is better.
inline double improvement_percent(double baseline, double improved) {
  if (baseline == 0.0) throw InvalidInput("improvement_percent: baseline must be nonzero");
  return (improved - baseline) / baseline * 100.0;
}

/// Ratio in percent, baseline / improved * 100. Used for times, where a
/// 22.69 s baseline against 5.57 s reads as roughly 407 %.
inline double ratio_percent(double baseline, double improved) {
  if (improved == 0.0) throw InvalidInput("ratio_percent: improved value must be nonzero");
  return baseline / improved * 100.0;
}

}  // namespace hpf
