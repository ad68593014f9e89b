// hpf: command-line front end for the haptic potential field monitor and
// its simulation harness.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hpf/hpf.hpp"

namespace fs = std::filesystem;
using namespace hpf;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kIo = 2;

void write_output(const std::optional<std::string>& path, const std::string& text) {
  if (path) {
    io::write_file(*path, text);
  } else {
    std::cout << text;
  }
}

void print_stats(const io::Report& rep) {
  for (const auto& c : rep.conditions) {
    std::cerr << c.label << ": traces=" << c.traces << " mean_min_distance=" << c.mean_min_distance
              << " m mean_time_in_pdd=" << c.mean_time_in_pdd
              << " s traces_crossing_psd=" << c.traces_crossing_psd << "\n";
  }
  auto anova = [](const char* what, const std::optional<AnovaResult>& a) {
    if (!a) return;
    std::cerr << what << ": F(" << a->df_between << "," << a->df_within << ") = " << a->f_value
              << ", p = " << a->p_value << "\n";
  };
  anova("ANOVA min distance", rep.anova_min_distance);
  anova("ANOVA time in PDD", rep.anova_time_in_pdd);
  if (rep.min_distance_improvement_pct) {
    std::cerr << "min distance improvement: " << *rep.min_distance_improvement_pct << " %\n";
  }
  if (rep.time_in_pdd_ratio_pct) {
    std::cerr << "time in PDD ratio: " << *rep.time_in_pdd_ratio_pct << " %\n";
  }
}

bool looks_like_trace(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  return line.find("\"hpf-trace\"") != std::string::npos;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Haptic potential field safety monitor and simulation harness"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write its trace");
  std::string sim_scenario;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::string> sim_out;
  std::string sim_label;
  simulate->add_option("scenario", sim_scenario, "Scenario file or preset (exp1, exp2)")->required();
  simulate->add_option("--seed", sim_seed, "Override the scenario seed");
  simulate->add_option("--out", sim_out, "Trace file (default: stdout)");
  simulate->add_option("--label", sim_label, "Label stored in the trace header");

  // react-time
  auto* react = app.add_subcommand("react-time", "Reaction-time measurement protocol");
  std::string rt_scenario;
  std::size_t rt_trials = 10;
  std::size_t rt_subjects = 1;
  std::optional<std::uint64_t> rt_seed;
  std::optional<std::string> rt_out;
  react->add_option("scenario", rt_scenario, "Scenario file or preset")->required();
  react->add_option("--trials", rt_trials, "Trials per subject")->check(CLI::PositiveNumber);
  react->add_option("--subjects", rt_subjects, "Simulated subjects")->check(CLI::PositiveNumber);
  react->add_option("--seed", rt_seed, "Override the scenario seed");
  react->add_option("--out", rt_out, "Report file (default: stdout)");

  // assembly
  auto* assembly = app.add_subcommand("assembly", "Collaborative assembly experiment");
  std::string as_condition;
  std::size_t as_subjects = 5;
  std::uint64_t as_seed = 1;
  std::string as_scenario = "exp2";
  std::string as_out_dir = ".";
  assembly->add_option("--condition", as_condition, "Feedback condition")
      ->required()
      ->check(CLI::IsMember({"v", "vh"}));
  assembly->add_option("--subjects", as_subjects, "Simulated subjects")->check(CLI::PositiveNumber);
  assembly->add_option("--seed", as_seed, "Experiment seed");
  assembly->add_option("--scenario", as_scenario, "Base scenario file or preset");
  assembly->add_option("--out-dir", as_out_dir, "Directory for the per-subject traces");

  // replay
  auto* replay = app.add_subcommand("replay", "Re-score a trace through the monitor");
  std::string rp_trace;
  std::optional<std::string> rp_params_from;
  std::optional<double> rp_d_ps;
  std::optional<std::string> rp_out;
  replay->add_option("trace", rp_trace, "Trace file")->required();
  replay->add_option("--params-from", rp_params_from, "Take safety params from this scenario");
  replay->add_option("--d-ps", rp_d_ps, "Override the protective separation distance [m]");
  replay->add_option("--out", rp_out, "Report file (default: stdout)");

  // report
  auto* report = app.add_subcommand("report", "Aggregate traces into a report");
  std::vector<std::string> rep_traces;
  bool rep_anova = false;
  std::optional<std::string> rep_out;
  report->add_option("traces", rep_traces, "Trace files")->required();
  report->add_flag("--anova", rep_anova, "One-way ANOVA across trace labels");
  report->add_option("--out", rep_out, "Report file (default: stdout)");

  // plot
  auto* plot = app.add_subcommand("plot", "Render SVG figures for traces or a report");
  std::vector<std::string> plot_inputs;
  std::string plot_out_dir = ".";
  plot->add_option("inputs", plot_inputs, "Trace or report files")->required();
  plot->add_option("--out-dir", plot_out_dir, "Output directory");

  // config
  auto* config = app.add_subcommand("config", "Print a scenario in canonical form");
  std::string cfg_scenario;
  config->add_option("scenario", cfg_scenario, "Scenario file or preset")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (*simulate) {
      Scenario sc = io::load_scenario(sim_scenario);
      if (sim_seed) sc.seed = *sim_seed;
      Trace trace = run_scenario(sc);
      trace.label = sim_label;
      if (sim_out) {
        io::save_trace(*sim_out, trace);
      } else {
        io::write_trace(std::cout, trace);
      }
      const auto stats = trial_stats(trace);
      std::cerr << "steps=" << trace.steps.size() << " min_distance=" << stats.min_distance
                << " m time_in_pdd=" << stats.time_in_pdd << " s psd_violations="
                << stats.psd_violations << "\n";
    } else if (*react) {
      Scenario sc = io::load_scenario(rt_scenario);
      if (rt_seed) sc.seed = *rt_seed;
      io::ReactionReport rr;
      std::vector<double> values;
      for (std::size_t subject = 0; subject < rt_subjects; ++subject) {
        const auto m = measure_reaction_time(sc, rt_trials, subject * rt_trials);
        for (const auto& t : m.trials) {
          rr.measured.push_back(t.measured);
          rr.latencies.push_back(t.latency);
          if (t.measured) {
            values.push_back(*t.measured);
            std::cout << subject << "\t" << *t.measured << "\n";
          } else {
            ++rr.missing;
            std::cout << subject << "\tmissing\n";
          }
        }
      }
      if (values.size() >= 2) rr.summary = summary(values);
      io::Report rep;
      rep.reaction = rr;
      if (rt_out) io::save_report(*rt_out, rep);
      if (rr.summary) {
        std::cerr << "reaction time: " << rr.summary->mean << " +/- " << rr.summary->stddev
                  << " s over " << values.size() << " trials (" << rr.missing << " missing)\n";
      } else {
        std::cerr << "reaction time: not enough trials (" << rr.missing << " missing)\n";
      }
      if (values.empty()) {
        std::cerr << "error: the haptic field was never entered\n";
        return kValidation;
      }
    } else if (*assembly) {
      const Condition cond = as_condition == "v" ? Condition::Visual : Condition::VisualHaptic;
      const Scenario base = io::load_scenario(as_scenario);
      const auto traces = run_assembly_experiment(cond, as_subjects, as_seed, base);
      std::error_code ec;
      fs::create_directories(as_out_dir, ec);
      if (ec) throw IoError("cannot create '" + as_out_dir + "': " + ec.message());
      std::vector<std::pair<std::string, Trace>> named;
      for (std::size_t i = 0; i < traces.size(); ++i) {
        const std::string name = as_condition + "_s" + std::to_string(i) + ".trace";
        const fs::path path = fs::path(as_out_dir) / name;
        io::save_trace(path, traces[i]);
        std::cout << path.string() << "\n";
        named.emplace_back(name, traces[i]);
      }
      print_stats(io::build_report(named, false));
    } else if (*replay) {
      std::optional<SafetyParams> params;
      if (rp_params_from) params = io::load_scenario(*rp_params_from).params;
      if (rp_d_ps) {
        if (!params) {
          std::ifstream in(rp_trace, std::ios::binary);
          if (!in) throw IoError("cannot open '" + rp_trace + "'");
          params = io::TraceReader(in).header().params;
        }
        params->d_ps = *rp_d_ps;
      }
      const auto rep = io::replay(fs::path(rp_trace), params);
      write_output(rp_out, io::report_to_json(rep).dump(2) + "\n");
      const auto& check = *rep.replay;
      std::cerr << "replayed " << check.steps << " steps: " << check.zone_mismatches
                << " zone and " << check.event_mismatches << " event mismatches\n";
      if (check.params_match && !check.consistent()) return kValidation;
    } else if (*report) {
      std::vector<std::pair<std::string, Trace>> named;
      for (const auto& p : rep_traces) {
        Trace t = io::load_trace(p);
        if (t.label.empty()) t.label = fs::path(p).stem().string();
        named.emplace_back(fs::path(p).filename().string(), std::move(t));
      }
      const auto rep = io::build_report(named, rep_anova);
      write_output(rep_out, io::report_to_json(rep).dump(2) + "\n");
      print_stats(rep);
    } else if (*plot) {
      std::vector<Trace> traces;
      for (const auto& in : plot_inputs) {
        const fs::path path(in);
        fs::path written;
        if (looks_like_trace(path)) {
          traces.push_back(io::load_trace(path));
          written = io::emit_plots(traces.back(), plot_out_dir, path.stem().string());
        } else {
          written = io::emit_plots(io::load_report(path), plot_out_dir, path.stem().string());
        }
        std::cout << written.string() << "\n";
      }
      if (traces.size() > 1) {
        const auto p = io::emit_svg(plot_out_dir, "distance_overlay.svg",
                                    io::distance_overlay_svg(traces, "Hand to TCP distance"));
        std::cout << p.string() << "\n";
      }
    } else if (*config) {
      std::cout << io::to_config_text(io::load_scenario(cfg_scenario));
    }
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const StreamError& e) {
    std::cerr << "stream error: " << e.what() << "\n";
    return kValidation;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const DegenerateGeometry& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
