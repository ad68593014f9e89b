#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hpf/errors.hpp"
#include "hpf/io/trace_file.hpp"
#include "hpf/metrics.hpp"
#include "hpf/monitor.hpp"

namespace hpf::io {

struct TraceReport {
  std::string name;
  std::string label;
  TrialStats stats;

  friend bool operator==(const TraceReport&, const TraceReport&) = default;
};

/// Per-label aggregate. Standard deviations are absent for single traces.
struct ConditionAggregate {
  std::string label;
  std::size_t traces = 0;
  double mean_min_distance = 0.0;
  std::optional<double> std_min_distance;
  double mean_time_in_pdd = 0.0;
  std::optional<double> std_time_in_pdd;
  std::size_t traces_crossing_psd = 0;

  friend bool operator==(const ConditionAggregate&, const ConditionAggregate&) = default;
};

/// Outcome of re-running stored samples through a fresh monitor.
struct ReplayCheck {
  bool params_match = true;
  std::size_t steps = 0;
  std::size_t zone_mismatches = 0;
  std::size_t event_mismatches = 0;
  std::optional<std::size_t> first_mismatch;  // step index

  bool consistent() const { return zone_mismatches == 0 && event_mismatches == 0; }
  friend bool operator==(const ReplayCheck&, const ReplayCheck&) = default;
};

struct ReactionReport {
  std::vector<std::optional<double>> measured;
  std::vector<std::optional<double>> latencies;
  std::size_t missing = 0;
  std::optional<Summary> summary;

  friend bool operator==(const ReactionReport&, const ReactionReport&) = default;
};

struct Report {
  std::vector<TraceReport> traces;
  std::vector<ConditionAggregate> conditions;
  std::optional<AnovaResult> anova_min_distance;
  std::optional<AnovaResult> anova_time_in_pdd;
  std::optional<double> min_distance_improvement_pct;  // (improved - baseline) / baseline
  std::optional<double> time_in_pdd_ratio_pct;         // baseline / improved
  std::optional<ReplayCheck> replay;
  std::optional<ReactionReport> reaction;

  friend bool operator==(const Report&, const Report&) = default;
};

/// Groups traces by label and fills the per-condition aggregates. With
/// `anova`, runs one-way ANOVA on min distance and time in PDD across labels.
/// When exactly two labels exist, the one named "V" (else the first) is the
/// baseline for the improvement figures.
inline Report build_report(const std::vector<std::pair<std::string, Trace>>& named,
                           bool anova) {
  Report rep;
  std::map<std::string, std::vector<const TraceReport*>> groups;
  std::vector<std::string> order;
  rep.traces.reserve(named.size());
  for (const auto& [name, trace] : named) {
    if (trace.empty()) throw InvalidInput("trace '" + name + "' has no samples");
    rep.traces.push_back({name, trace.label, trial_stats(trace)});
  }
  for (const auto& tr : rep.traces) {
    if (!groups.contains(tr.label)) order.push_back(tr.label);
    groups[tr.label].push_back(&tr);
  }
  std::vector<std::vector<double>> mins;
  std::vector<std::vector<double>> times;
  for (const auto& label : order) {
    const auto& g = groups[label];
    ConditionAggregate agg;
    agg.label = label;
    agg.traces = g.size();
    std::vector<double> m;
    std::vector<double> t;
    for (const auto* tr : g) {
      m.push_back(tr->stats.min_distance);
      t.push_back(tr->stats.time_in_pdd);
      if (tr->stats.psd_violations > 0) ++agg.traces_crossing_psd;
    }
    if (g.size() >= 2) {
      const auto sm = summary(m);
      const auto st = summary(t);
      agg.mean_min_distance = sm.mean;
      agg.std_min_distance = sm.stddev;
      agg.mean_time_in_pdd = st.mean;
      agg.std_time_in_pdd = st.stddev;
    } else {
      agg.mean_min_distance = m.front();
      agg.mean_time_in_pdd = t.front();
    }
    mins.push_back(std::move(m));
    times.push_back(std::move(t));
    rep.conditions.push_back(std::move(agg));
  }
  if (anova) {
    if (order.size() < 2) throw InvalidInput("ANOVA needs traces from at least 2 labels");
    rep.anova_min_distance = oneway_anova(mins);
    rep.anova_time_in_pdd = oneway_anova(times);
  }
  if (rep.conditions.size() == 2) {
    std::size_t base = rep.conditions[1].label == "V" ? 1 : 0;
    const auto& b = rep.conditions[base];
    const auto& i = rep.conditions[1 - base];
    if (b.mean_min_distance != 0.0) {
      rep.min_distance_improvement_pct = improvement_percent(b.mean_min_distance, i.mean_min_distance);
    }
    if (i.mean_time_in_pdd != 0.0) {
      rep.time_in_pdd_ratio_pct = ratio_percent(b.mean_time_in_pdd, i.mean_time_in_pdd);
    }
  }
  return rep;
}

/// Feeds the stored samples of a trace file back through a fresh monitor.
/// `params` overrides the header parameters (re-scoring); the recomputed
/// zones and events are compared with the stored ones.
inline Report replay(std::istream& in, const std::string& name,
                     const std::optional<SafetyParams>& params = std::nullopt) {
  TraceReader reader(in);
  const SafetyParams p = params.value_or(reader.header().params);
  validate(p);
  ReplayCheck check;
  check.params_match = p == reader.header().params;

  Trace rescored;
  rescored.fingerprint = reader.header().fingerprint;
  rescored.dt = reader.header().dt;
  rescored.label = reader.header().label;
  rescored.params = p;

  MonitorState state;
  std::size_t index = 0;
  while (auto s = reader.next()) {
    StepResult r;
    try {
      r = step(state, s->sample, p);
    } catch (const StreamError& e) {
      throw StreamError(index + 1, e.what());
    }
    state = r.state;
    bool events_equal = r.events.size() == s->events.size();
    for (std::size_t i = 0; events_equal && i < r.events.size(); ++i) {
      events_equal = r.events[i].kind == s->events[i];
    }
    if (r.zone != s->zone) ++check.zone_mismatches;
    if (!events_equal) ++check.event_mismatches;
    if ((r.zone != s->zone || !events_equal) && !check.first_mismatch) check.first_mismatch = index;
    rescored.steps.push_back({s->sample, r.zone, r.state.last, std::move(r.events)});
    ++index;
  }
  check.steps = index;
  if (rescored.empty()) throw StreamError(1, "trace has no step records");

  Report rep = build_report({{name, std::move(rescored)}}, false);
  rep.replay = check;
  return rep;
}

inline Report replay(const std::filesystem::path& path,
                     const std::optional<SafetyParams>& params = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return replay(in, path.filename().string(), params);
}

// JSON has no infinities; non-finite doubles are stored as strings.
namespace detail {

inline json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double number_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw std::invalid_argument("expected a number, got '" + s + "'");
}

template <typename T, typename F>
json opt(const std::optional<T>& v, F&& f) {
  return v ? f(*v) : json(nullptr);
}

template <typename F>
auto opt_from(const json& j, const char* key, F&& f)
    -> std::optional<decltype(f(j))> {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return f(j.at(key));
}

inline json anova_json(const AnovaResult& a) {
  return {{"f", number(a.f_value)},
          {"df_between", a.df_between},
          {"df_within", a.df_within},
          {"p", number(a.p_value)}};
}

inline AnovaResult anova_from(const json& j) {
  return {number_from(j.at("f")), j.at("df_between").get<int>(), j.at("df_within").get<int>(),
          number_from(j.at("p"))};
}

inline json optional_values(const std::vector<std::optional<double>>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(x ? number(*x) : json(nullptr));
  return a;
}

inline std::vector<std::optional<double>> optional_values_from(const json& j) {
  std::vector<std::optional<double>> v;
  for (const auto& x : j) {
    if (x.is_null()) v.emplace_back();
    else v.emplace_back(number_from(x));
  }
  return v;
}

}  // namespace detail

inline json report_to_json(const Report& r) {
  using namespace detail;
  json j;
  j["format"] = "hpf-report";
  j["version"] = 1;
  json traces = json::array();
  for (const auto& t : r.traces) {
    json s{{"name", t.name},
           {"label", t.label},
           {"min_distance_m", number(t.stats.min_distance)},
           {"time_in_pdd_s", number(t.stats.time_in_pdd)},
           {"psd_violations", t.stats.psd_violations}};
    s["reaction_times_s"] = opt(t.stats.reaction_times, [](const std::vector<double>& v) {
      json a = json::array();
      for (double x : v) a.push_back(number(x));
      return a;
    });
    traces.push_back(std::move(s));
  }
  j["traces"] = std::move(traces);
  json conds = json::array();
  for (const auto& c : r.conditions) {
    conds.push_back({{"label", c.label},
                     {"traces", c.traces},
                     {"mean_min_distance_m", number(c.mean_min_distance)},
                     {"std_min_distance_m", opt(c.std_min_distance, number)},
                     {"mean_time_in_pdd_s", number(c.mean_time_in_pdd)},
                     {"std_time_in_pdd_s", opt(c.std_time_in_pdd, number)},
                     {"traces_crossing_psd", c.traces_crossing_psd}});
  }
  j["conditions"] = std::move(conds);
  j["anova_min_distance"] = opt(r.anova_min_distance, anova_json);
  j["anova_time_in_pdd"] = opt(r.anova_time_in_pdd, anova_json);
  j["min_distance_improvement_pct"] = opt(r.min_distance_improvement_pct, number);
  j["time_in_pdd_ratio_pct"] = opt(r.time_in_pdd_ratio_pct, number);
  j["replay"] = opt(r.replay, [](const ReplayCheck& c) {
    return json{{"params_match", c.params_match},
                {"steps", c.steps},
                {"zone_mismatches", c.zone_mismatches},
                {"event_mismatches", c.event_mismatches},
                {"first_mismatch", c.first_mismatch ? json(*c.first_mismatch) : json(nullptr)},
                {"consistent", c.consistent()}};
  });
  j["reaction"] = opt(r.reaction, [](const ReactionReport& rr) {
    return json{{"measured_s", optional_values(rr.measured)},
                {"latency_s", optional_values(rr.latencies)},
                {"missing", rr.missing},
                {"summary", opt(rr.summary, [](const Summary& s) {
                   return json{{"mean_s", number(s.mean)}, {"std_s", number(s.stddev)}};
                 })}};
  });
  return j;
}

inline Report report_from_json(const json& j) {
  using namespace detail;
  if (j.at("format").get<std::string>() != "hpf-report") {
    throw InvalidInput("not an hpf report");
  }
  Report r;
  for (const auto& s : j.at("traces")) {
    TraceReport t;
    t.name = s.at("name").get<std::string>();
    t.label = s.at("label").get<std::string>();
    t.stats.min_distance = number_from(s.at("min_distance_m"));
    t.stats.time_in_pdd = number_from(s.at("time_in_pdd_s"));
    t.stats.psd_violations = s.at("psd_violations").get<std::size_t>();
    t.stats.reaction_times = opt_from(s, "reaction_times_s", [](const json& a) {
      std::vector<double> v;
      for (const auto& x : a) v.push_back(number_from(x));
      return v;
    });
    r.traces.push_back(std::move(t));
  }
  for (const auto& c : j.at("conditions")) {
    ConditionAggregate a;
    a.label = c.at("label").get<std::string>();
    a.traces = c.at("traces").get<std::size_t>();
    a.mean_min_distance = number_from(c.at("mean_min_distance_m"));
    a.std_min_distance = opt_from(c, "std_min_distance_m", number_from);
    a.mean_time_in_pdd = number_from(c.at("mean_time_in_pdd_s"));
    a.std_time_in_pdd = opt_from(c, "std_time_in_pdd_s", number_from);
    a.traces_crossing_psd = c.at("traces_crossing_psd").get<std::size_t>();
    r.conditions.push_back(std::move(a));
  }
  r.anova_min_distance = opt_from(j, "anova_min_distance", anova_from);
  r.anova_time_in_pdd = opt_from(j, "anova_time_in_pdd", anova_from);
  r.min_distance_improvement_pct = opt_from(j, "min_distance_improvement_pct", number_from);
  r.time_in_pdd_ratio_pct = opt_from(j, "time_in_pdd_ratio_pct", number_from);
  r.replay = opt_from(j, "replay", [](const json& c) {
    ReplayCheck rc;
    rc.params_match = c.at("params_match").get<bool>();
    rc.steps = c.at("steps").get<std::size_t>();
    rc.zone_mismatches = c.at("zone_mismatches").get<std::size_t>();
    rc.event_mismatches = c.at("event_mismatches").get<std::size_t>();
    if (!c.at("first_mismatch").is_null()) rc.first_mismatch = c.at("first_mismatch").get<std::size_t>();
    return rc;
  });
  r.reaction = opt_from(j, "reaction", [](const json& rj) {
    ReactionReport rr;
    rr.measured = optional_values_from(rj.at("measured_s"));
    rr.latencies = optional_values_from(rj.at("latency_s"));
    rr.missing = rj.at("missing").get<std::size_t>();
    rr.summary = opt_from(rj, "summary", [](const json& s) {
      return Summary{number_from(s.at("mean_s")), number_from(s.at("std_s"))};
    });
    return rr;
  });
  return r;
}

inline void save_report(const std::filesystem::path& path, const Report& r) {
  write_file(path, report_to_json(r).dump(2) + "\n");
}

inline Report load_report(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return report_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw InvalidInput("malformed report '" + path.string() + "': " + e.what());
  }
}

}  // namespace hpf::io
