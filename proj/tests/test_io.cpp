#include <gtest/gtest.h>

#include <filesystem>
#include <limits>
#include <sstream>
#include <string>

#include "hpf/io/config.hpp"
#include "hpf/io/plot.hpp"
#include "hpf/io/report.hpp"
#include "hpf/io/trace_file.hpp"
#include "hpf/simulation.hpp"

namespace hpf {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "hpf_test_io";
  fs::create_directories(dir);
  return dir / name;
}

Trace short_exp1(std::uint64_t seed = 3) {
  Scenario sc = exp1_preset();
  sc.seed = seed;
  return run_scenario(sc);
}

std::string serialized(const Trace& t) {
  std::ostringstream os;
  io::write_trace(os, t);
  return os.str();
}

TEST(Config, Presets) {
  const Scenario e1 = io::load_scenario("exp1");
  EXPECT_EQ(e1.params.d_ps, 0.2);
  ASSERT_TRUE(e1.params.fixed_d_ha);
  EXPECT_EQ(*e1.params.fixed_d_ha, 0.4);
  const Scenario e2 = io::load_scenario("exp2");
  EXPECT_EQ(e2.params.d_ps, 0.25);
  EXPECT_EQ(e2.params.d_pdd, 0.4);
  EXPECT_FALSE(e2.params.fixed_d_ha);
}

TEST(Config, RoundTripIsStructurallyEqual) {
  for (const Scenario& sc : {exp1_preset(), exp2_preset()}) {
    const std::string text = io::to_config_text(sc);
    const Scenario back = io::parse_scenario(text);
    EXPECT_EQ(back, sc);
    EXPECT_EQ(io::to_config_text(back), text);
  }
  Scenario sc;
  sc.robot.waypoints = {{0.1, 0.2, 0.3}, {1.0 / 3.0, 0, 0}};
  sc.hand = ScriptedHand{{{1, 0, 0}, {0.5, 0.5, 0}}, 0.2, true};
  sc.params.k_h = 0.7;
  EXPECT_EQ(io::parse_scenario(io::to_config_text(sc)), sc);

  const auto path = scratch("roundtrip.ini");
  io::save_scenario(path, exp2_preset());
  EXPECT_EQ(io::load_scenario(path.string()), exp2_preset());
}

TEST(Config, SemanticErrorNamesInvariant) {
  std::string text = io::to_config_text(exp2_preset());
  const auto at = text.find("d_ps_m = 0.25");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 13, "d_ps_m = 1.5");
  try {
    io::parse_scenario(text);
    FAIL() << "expected a config error";
  } catch (const io::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("d_ps <= d_hmax"), std::string::npos) << e.what();
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Config, SyntaxErrorCarriesLocation) {
  try {
    io::parse_scenario("[safety]\nd_ps_m = 0.2\nd_hmax_m 1.3\n");
    FAIL() << "expected a config error";
  } catch (const io::ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_GE(e.column(), 1);
  }
  try {
    io::parse_scenario("[safety]\nd_ps_m = abc\n");
    FAIL() << "expected a config error";
  } catch (const io::ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_GT(e.column(), 1);
  }
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_THROW(io::parse_scenario("[safety]\nd_pss_m = 0.2\n"), io::ConfigError);
  EXPECT_THROW(io::parse_scenario("[bogus]\n"), io::ConfigError);
}

TEST(Config, ShippedScenariosMatchPresets) {
  const fs::path dir = fs::path(HPF_SOURCE_DIR) / "scenarios";
  EXPECT_EQ(io::load_scenario((dir / "exp1.ini").string()), exp1_preset());
  EXPECT_EQ(io::load_scenario((dir / "exp2.ini").string()), exp2_preset());
  const Scenario h = io::load_scenario((dir / "head_on.ini").string());
  EXPECT_TRUE(std::holds_alternative<StaticHand>(h.hand));
  EXPECT_EQ(h.params.fixed_d_ha, 0.4);
}

TEST(Config, MissingFileIsIoError) {
  EXPECT_THROW(io::load_scenario("/nonexistent/dir/none.ini"), IoError);
}

TEST(Config, FingerprintTracksSeed) {
  Scenario a = exp1_preset();
  Scenario b = a;
  EXPECT_EQ(io::fingerprint(a), io::fingerprint(b));
  b.seed = 2;
  EXPECT_NE(io::fingerprint(a), io::fingerprint(b));
}

TEST(TraceFile, RoundTripPreservesStoredColumns) {
  const Trace t = short_exp1();
  std::istringstream in(serialized(t));
  const Trace back = io::read_trace(in);
  EXPECT_EQ(back.fingerprint, t.fingerprint);
  EXPECT_EQ(back.dt, t.dt);
  EXPECT_EQ(back.params, t.params);
  ASSERT_EQ(back.steps.size(), t.steps.size());
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    EXPECT_EQ(back.steps[k].sample, t.steps[k].sample);
    EXPECT_EQ(back.steps[k].zone, t.steps[k].zone);
    EXPECT_EQ(back.steps[k].eval.d, t.steps[k].eval.d);
    EXPECT_EQ(back.steps[k].eval.d_ha, t.steps[k].eval.d_ha);
    EXPECT_EQ(back.steps[k].events, t.steps[k].events);
  }
  EXPECT_EQ(serialized(back), serialized(t));
}

TEST(TraceFile, TruncatedRecordReportsIndex) {
  const std::string text = serialized(short_exp1());
  // Cut in the middle of the 11th record (step 10).
  std::size_t pos = 0;
  for (int i = 0; i < 11; ++i) pos = text.find('\n', pos) + 1;
  const std::string cut = text.substr(0, pos + 20);
  std::istringstream in(cut);
  try {
    io::read_trace(in);
    FAIL() << "expected a stream error";
  } catch (const StreamError& e) {
    EXPECT_EQ(e.index(), 11u);
  }
}

TEST(TraceFile, UnorderedRecordReportsIndex) {
  std::string text = serialized(short_exp1());
  std::istringstream lines(text);
  std::string line, out;
  int n = 0;
  while (std::getline(lines, line)) {
    if (n == 5) {
      const auto p = line.find("\"t\":");
      const auto e = line.find(',', p);
      line.replace(p, e - p, "\"t\":0.0");
    }
    out += line + "\n";
    ++n;
  }
  std::istringstream in(out);
  try {
    io::read_trace(in);
    FAIL() << "expected a stream error";
  } catch (const StreamError& e) {
    EXPECT_EQ(e.index(), 5u);
  }
}

TEST(TraceFile, BadHeaderIsRecordZero) {
  std::istringstream in("{\"type\":\"step\"}\n");
  try {
    io::read_trace(in);
    FAIL();
  } catch (const StreamError& e) {
    EXPECT_EQ(e.index(), 0u);
  }
}

TEST(Replay, SelfProducedTraceIsConsistent) {
  for (std::uint64_t seed : {1, 2, 3}) {
    std::istringstream in(serialized(short_exp1(seed)));
    const auto rep = io::replay(in, "t");
    ASSERT_TRUE(rep.replay);
    EXPECT_TRUE(rep.replay->params_match);
    EXPECT_TRUE(rep.replay->consistent());
  }
  Scenario sc = exp2_preset();
  sc.duration = 20.0;
  std::istringstream in(serialized(run_scenario(sc)));
  EXPECT_TRUE(io::replay(in, "t").replay->consistent());
}

TEST(Replay, TighterPsdNeverReducesViolations) {
  Scenario sc = exp2_preset();
  sc = with_condition(sc, Condition::Visual);
  sc.duration = 30.0;
  const std::string text = serialized(run_scenario(sc));
  std::size_t prev = 0;
  for (double d_ps : {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35}) {
    SafetyParams p = sc.params;
    p.d_ps = d_ps;
    std::istringstream in(text);
    const auto rep = io::replay(in, "t", p);
    const auto v = rep.traces.front().stats.psd_violations;
    EXPECT_GE(v, prev) << "d_ps " << d_ps;
    prev = v;
  }
}

TEST(Report, JsonRoundTripIncludingInfinity) {
  std::vector<std::pair<std::string, Trace>> named;
  for (std::uint64_t s : {1, 2}) {
    Trace a = short_exp1(s);
    a.label = "V";
    named.emplace_back("v" + std::to_string(s), a);
    Trace b = short_exp1(s + 10);
    b.label = "VH";
    named.emplace_back("vh" + std::to_string(s), b);
  }
  io::Report rep = io::build_report(named, true);
  ASSERT_EQ(rep.conditions.size(), 2u);
  EXPECT_EQ(io::report_from_json(io::report_to_json(rep)), rep);

  rep.anova_min_distance = AnovaResult{std::numeric_limits<double>::infinity(), 1, 8, 0.0};
  const auto path = scratch("report.json");
  io::save_report(path, rep);
  EXPECT_EQ(io::load_report(path), rep);
}

TEST(Report, BaselineIsVisualCondition) {
  std::vector<std::pair<std::string, Trace>> named;
  for (std::uint64_t s : {1, 2}) {
    Trace b = short_exp1(s);
    b.label = "VH";
    named.emplace_back("vh", b);
    Trace a = short_exp1(s + 5);
    a.label = "V";
    named.emplace_back("v", a);
  }
  const auto rep = io::build_report(named, false);
  const auto& v = rep.conditions[1];
  const auto& vh = rep.conditions[0];
  ASSERT_EQ(v.label, "V");
  ASSERT_TRUE(rep.min_distance_improvement_pct);
  EXPECT_DOUBLE_EQ(*rep.min_distance_improvement_pct,
                   improvement_percent(v.mean_min_distance, vh.mean_min_distance));
}

TEST(Report, EmptyTraceRejected) {
  Trace t;
  t.dt = 0.001;
  EXPECT_THROW(io::build_report({{"e", t}}, false), InvalidInput);
}

TEST(Plot, TracePlotHasTwoPanelsAndRules) {
  const std::string svg = io::trace_plot_svg(short_exp1());
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("Hand speed"), std::string::npos);
  EXPECT_NE(svg.find("PSD 0.2"), std::string::npos);
  EXPECT_NE(svg.find("HAD 0.4"), std::string::npos);
}

TEST(Plot, AssemblyTraceHasDashedPdd) {
  Scenario sc = exp2_preset();
  sc.duration = 10.0;
  const Trace t = run_scenario(sc);
  const std::string svg = io::trace_plot_svg(t);
  const auto at = svg.find("PDD 0.4");
  ASSERT_NE(at, std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  const std::vector<Trace> ts{t, t};
  EXPECT_NE(io::distance_overlay_svg(ts, "overlay").find("PDD 0.4"), std::string::npos);
}

TEST(Plot, EmptyTraceRejected) {
  EXPECT_THROW(io::trace_plot_svg(Trace{}), InvalidInput);
}

TEST(Plot, UnwritableDirectoryIsIoError) {
  const auto file = scratch("not_a_dir");
  io::write_file(file, "x");
  EXPECT_THROW(io::emit_plots(short_exp1(), file / "sub", "t"), IoError);
}

TEST(Plot, EmitsFiles) {
  const auto dir = scratch("plots");
  const auto p = io::emit_plots(short_exp1(), dir, "exp1");
  EXPECT_TRUE(fs::exists(p));
  EXPECT_GT(fs::file_size(p), 1000u);
}

}  // namespace
}  // namespace hpf
