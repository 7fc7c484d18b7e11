// tcbm: command-line front end for the bandwidth scheduler.
//
//   tcbm solve   --preset 4g --i-max 6 --q 1
//   tcbm compare --preset 4g --xen-rounds 6,14,25 --q 1
//   tcbm track   --preset 3g --profile fig45a --a-max 0.5
//   tcbm sweep   [--preset wifi]
//   tcbm oracle  --config worked.ini --i-max 0
//
// Exit codes: 0 success, 2 infeasible instance, 1 any other error.

#include "tcbm/baselines.hpp"
#include "tcbm/config.hpp"
#include "tcbm/harness.hpp"
#include "tcbm/oracle.hpp"
#include "tcbm/solver.hpp"
#include "tcbm/tracker.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace tcbm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct CommonFlags {
  std::string config_path;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "INI run configuration");
  cmd->add_option("--preset", flags.preset, "scenario preset")->check(CLI::IsMember({"3g", "4g", "wifi"}, CLI::ignore_case));
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--seed", flags.seed, "seed recorded in the resolved config (default 0)");
  cmd->add_option("--jobs", flags.jobs, "parallel workers for rows and cells")->check(CLI::PositiveNumber);
}

std::optional<RunConfig> base_config(const CommonFlags& flags) {
  std::optional<std::string> preset;
  if (!flags.preset.empty()) preset = flags.preset;
  if (!flags.config_path.empty()) return load_config(flags.config_path, preset);
  if (preset) return preset_config(*preset);
  return std::nullopt;
}

void apply_common(RunConfig& config, const CommonFlags& flags) {
  if (!flags.out.empty()) config.out_dir = flags.out;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.jobs) config.jobs = *flags.jobs;
}

RunConfig require_config(const CommonFlags& flags) {
  auto config = base_config(flags);
  if (!config) throw Error(ErrorKind::InvalidArgument, "either --config or --preset is required");
  return *config;
}

// Writes `body` to dir/name through a temporary file and a rename.
void write_atomically(const std::string& dir, const std::string& name, const std::string& body) {
  fs::create_directories(dir);
  const fs::path target = fs::path(dir) / name;
  const fs::path temp = fs::path(dir) / (name + ".tmp");
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + temp.string());
    out << body;
    if (!out.flush()) throw Error(ErrorKind::InvalidArgument, "cannot write " + temp.string());
  }
  fs::rename(temp, target);
  std::cout << "wrote " << target.string() << '\n';
}

std::string with_config(const RunConfig& config, const std::string& body) {
  return render_config_comment(config) + body;
}

int effective_q(const RunConfig& config, int i_max) {
  return config.q == 0 ? i_max : std::min(config.q, i_max);
}

QRule q_rule(const RunConfig& config) { return config.q == 0 ? full_q() : fixed_q(config.q); }

void print_report(const SolverReport& r) {
  std::printf("status       %s\n", to_string(r.status));
  if (!r.message.empty()) std::printf("message      %s\n", r.message.c_str());
  if (r.schedule.rates.empty()) return;
  std::printf("i_max        %d\n", r.partition.i_max);
  std::printf("Q            %d\n", r.partition.q);
  std::printf("E_tot        %.6g J\n", r.energy());
  std::printf("t_tm         %.6g s\n", r.outcome.t_tm);
  std::printf("t_dt         %.6g s\n", r.outcome.t_dt);
  std::printf("t_sc         %.6g s\n", r.outcome.t_sc);
  std::printf("max residual %.3g\n", r.max_residual);
  std::printf("iterations   %d\n", r.iterations);
  std::printf("rates       ");
  for (double rate : r.reduced_rates) std::printf(" %.6g", rate);
  std::printf("  (Mb/s, updated rounds)\n");
}

int cmd_solve(RunConfig config) {
  config.validate();
  SolverReport report;
  if (config.i_max >= 0) {
    const RatePartition partition = build_partition(config.i_max, effective_q(config, config.i_max));
    report = solve_tcbm(config.scenario, config.workload, config.qos, config.stages, partition, config.solver);
  } else {
    report = optimize_rounds(config.scenario, config.workload, config.qos, config.stages, q_rule(config), config.solver)
                 .report;
  }
  print_report(report);
  if (report.status == SolverStatus::Infeasible) {
    std::fprintf(stderr, "infeasible: %s\n", report.message.c_str());
    return kExitInfeasible;
  }
  std::ostringstream csv;
  write_schedule_csv(csv, report);
  write_atomically(config.out_dir, "solve.csv", with_config(config, csv.str()));
  return report.ok() ? kExitOk : kExitError;
}

int cmd_compare(RunConfig config) {
  config.validate();
  ComparisonSetup setup;
  setup.scenario = config.scenario;
  setup.workload = config.workload;
  setup.stages = config.stages;
  setup.r_max_xen = config.xen_r_max;
  setup.xen_rounds = config.xen_rounds;
  setup.q = config.q;
  setup.theta = config.qos.theta;
  setup.measure = config.xen_measure;
  setup.solver = config.solver;
  setup.jobs = config.jobs;
  if (config.compare_dirty_ratio > 0.0) {
    const double r_max = config.xen_r_max > 0.0 ? config.xen_r_max : config.scenario.r_hat;
    setup.workload.dirty_rate = config.compare_dirty_ratio * r_max;
  }
  const auto rows = compare_protocol(setup);

  std::ostringstream csv;
  write_comparison_csv(csv, rows);
  std::ostringstream md;
  write_comparison_markdown(md, rows);
  std::cout << md.str();
  write_atomically(config.out_dir, "compare.csv", with_config(config, csv.str()));
  write_atomically(config.out_dir, "compare.md", md.str());

  const bool all_solved = std::all_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.e_tcbm.has_value(); });
  return all_solved ? kExitOk : kExitInfeasible;
}

int cmd_track(RunConfig config) {
  config.validate();
  const ParameterTimeline timeline = config.effective_timeline();
  WirelessScenario first_scenario = config.scenario;
  first_scenario.power.k0 = timeline.k0s.front();
  const Workload first_workload{config.workload.m0, timeline.dirty_rates.front()};

  RatePartition partition;
  if (config.i_max >= 0) {
    partition = build_partition(config.i_max, effective_q(config, config.i_max));
  } else {
    const auto search =
        optimize_rounds(first_scenario, first_workload, config.qos, config.stages, q_rule(config), config.solver);
    if (!search.ok()) {
      std::printf("status       %s\nmessage      %s\n", to_string(search.report.status), search.report.message.c_str());
      return kExitInfeasible;
    }
    partition = search.report.partition;
  }

  const TrackerTrace trace =
      run_tracker(config.scenario, config.workload, config.qos, config.stages, partition, timeline, config.tracker);

  std::printf("i_max %d, Q %d, a_max %g, horizon %d\n", partition.i_max, partition.q, config.tracker.a_max,
              config.tracker.horizon);
  std::printf("%-8s %-10s %-10s %-14s %-14s %s\n", "segment", "w_bar", "k0", "E_final (J)", "E_batch (J)", "settling");
  for (std::size_t seg = 0; seg < timeline.segments(); ++seg) {
    const auto [begin, end] = timeline.segment_range(seg, config.tracker.horizon);
    if (end - begin < 2) continue;
    WirelessScenario scenario = config.scenario;
    scenario.power.k0 = timeline.k0s[seg];
    const Workload workload{config.workload.m0, timeline.dirty_rates[seg]};
    const SolverReport batch = solve_tcbm(scenario, workload, config.qos, config.stages, partition, config.solver);
    const auto settle = settling_time(trace, begin, end, config.tracker.settle_tolerance);
    const std::string batch_text = batch.ok() ? std::to_string(batch.energy()) : std::string("infeasible");
    const std::string settle_text = settle ? std::to_string(*settle) : std::string("not settled");
    std::printf("%-8zu %-10g %-10g %-14.6g %-14s %s\n", seg, timeline.dirty_rates[seg], timeline.k0s[seg],
                trace.samples[static_cast<std::size_t>(end - 1)].energy, batch_text.c_str(), settle_text.c_str());
  }

  std::ostringstream csv;
  write_trace_csv(csv, trace);
  write_atomically(config.out_dir, "track.csv", with_config(config, csv.str()));
  return kExitOk;
}

int cmd_sweep(const std::vector<RunConfig>& configs) {
  std::vector<SweepTable> tables;
  for (const RunConfig& config : configs) {
    config.validate();
    SweepSetup setup;
    setup.scenario = config.scenario;
    setup.m0 = config.workload.m0;
    setup.stages = config.stages;
    setup.dirty_ratio = config.sweep_dirty_ratio;
    setup.xen_rounds = config.sweep_xen_rounds;
    setup.measure = config.xen_measure;
    setup.solver = config.solver;
    setup.jobs = config.jobs;
    tables.push_back({config.scenario.name, workload_sweep(setup)});
  }
  std::ostringstream csv;
  write_sweep_csv(csv, tables);
  std::ostringstream md;
  write_savings_markdown(md, tables);
  std::cout << md.str();

  std::string header;
  for (const RunConfig& config : configs) header += render_config_comment(config);
  const RunConfig& first = configs.front();
  write_atomically(first.out_dir, "sweep.csv", header + csv.str());
  write_atomically(first.out_dir, "sweep.md", md.str());

  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      if (!r.comparison.e_tcbm || !r.comparison.e_bmop) return kExitInfeasible;
    }
  }
  return kExitOk;
}

int cmd_oracle(RunConfig config) {
  config.validate();
  const int i_max = std::max(config.i_max, 0);
  const RatePartition partition = build_partition(i_max, effective_q(config, i_max));
  OracleResult result;
  try {
    result = brute_force_oracle(config.scenario, config.workload, config.qos, config.stages, partition,
                                config.grid_points, config.refinements);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Infeasible) throw;
    std::printf("status       infeasible\nmessage      %s\n", e.what());
    return kExitInfeasible;
  }
  const SolverReport report = evaluate_schedule(config.scenario, config.workload, config.qos, config.stages, partition,
                                                result.reduced_rates);
  std::printf("grid points  %d per dimension, %d refinements, %llu evaluated\n", config.grid_points,
              config.refinements, static_cast<unsigned long long>(result.evaluated));
  std::printf("E_tot        %.6g J\n", result.energy);
  std::printf("t_sc         %.6g s\n", report.outcome.t_sc);
  std::printf("rates       ");
  for (double rate : result.reduced_rates) std::printf(" %.6g", rate);
  std::printf("  (Mb/s, updated rounds)\n");

  std::ostringstream csv;
  write_schedule_csv(csv, report);
  write_atomically(config.out_dir, "oracle.csv", with_config(config, csv.str()));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-minimal bandwidth schedules for pre-copy VM live migration"};
  app.require_subcommand(1);

  CommonFlags common;
  std::optional<int> i_max;
  std::string q_text;
  auto add_partition = [&](CLI::App* cmd) {
    cmd->add_option("--i-max", i_max, "pre-copy rounds (omit to search)");
    cmd->add_option("--q", q_text, "updated pre-copy rates, or 'full' for Q = i_max");
  };

  CLI::App* solve = app.add_subcommand("solve", "minimum-energy schedule for one instance");
  add_common(solve, common);
  add_partition(solve);

  std::vector<int> xen_rounds;
  std::optional<double> dirty_ratio;
  CLI::App* compare = app.add_subcommand("compare", "Xen / BMOP / TCBM comparison protocol");
  add_common(compare, common);
  compare->add_option("--xen-rounds", xen_rounds, "Xen round counts")->delimiter(',');
  compare->add_option("--q", q_text, "updated pre-copy rates, or 'full'");
  compare->add_option("--dirty-ratio", dirty_ratio, "dirty rate as a fraction of the Xen peak rate (0 keeps w)");

  std::string profile;
  std::optional<double> a_max;
  std::optional<int> horizon;
  CLI::App* track = app.add_subcommand("track", "online tracker under stepped parameters");
  add_common(track, common);
  add_partition(track);
  track->add_option("--profile", profile, "fig45a|b|c or fig46a|b|c");
  track->add_option("--a-max", a_max, "per-coordinate step cap in log-rate space");
  track->add_option("--horizon", horizon, "iterations");

  std::optional<int> sweep_rounds;
  CLI::App* sweep = app.add_subcommand("sweep", "bzip2 / mcf / memcached energies per manager");
  add_common(sweep, common);
  sweep->add_option("--xen-rounds", sweep_rounds, "Xen round count");

  std::optional<int> grid_points;
  std::optional<int> refinements;
  CLI::App* oracle = app.add_subcommand("oracle", "exhaustive log-grid search");
  add_common(oracle, common);
  add_partition(oracle);
  oracle->add_option("--grid-points", grid_points, "grid points per dimension");
  oracle->add_option("--refinements", refinements, "local refinement passes");

  CLI11_PARSE(app, argc, argv);

  auto apply_partition = [&](RunConfig& config) {
    if (i_max) config.i_max = *i_max;
    if (q_text == "full") {
      config.q = 0;
    } else if (!q_text.empty()) {
      config.q = std::stoi(q_text);
      if (config.q < 1) throw Error(ErrorKind::InvalidArgument, "--q must be >= 1 or 'full'");
    }
  };

  try {
    if (solve->parsed()) {
      RunConfig config = require_config(common);
      apply_common(config, common);
      apply_partition(config);
      return cmd_solve(config);
    }
    if (compare->parsed()) {
      RunConfig config = require_config(common);
      // A bare preset runs the protocol at the comparable limit w = 0.33 * R_MAX^XEN.
      if (common.config_path.empty()) config.compare_dirty_ratio = kComparableDirtyRatio;
      apply_common(config, common);
      apply_partition(config);
      if (!xen_rounds.empty()) config.xen_rounds = xen_rounds;
      if (dirty_ratio) config.compare_dirty_ratio = *dirty_ratio;
      return cmd_compare(config);
    }
    if (track->parsed()) {
      auto base = base_config(common);
      if (!base && profile.empty()) throw Error(ErrorKind::InvalidArgument, "track needs --config, --preset or --profile");
      RunConfig config = base ? *base : preset_config(tracking_profile(profile).preset);
      apply_common(config, common);
      apply_partition(config);
      if (!profile.empty()) config.profile = profile;
      if (a_max) config.tracker.a_max = *a_max;
      if (horizon) config.tracker.horizon = *horizon;
      return cmd_track(config);
    }
    if (sweep->parsed()) {
      std::vector<RunConfig> configs;
      if (auto base = base_config(common)) {
        configs.push_back(*base);
      } else {
        for (const auto& p : scenario_presets()) configs.push_back(preset_config(p.key));
      }
      for (auto& config : configs) {
        apply_common(config, common);
        if (sweep_rounds) config.sweep_xen_rounds = *sweep_rounds;
      }
      return cmd_sweep(configs);
    }
    if (oracle->parsed()) {
      RunConfig config = require_config(common);
      apply_common(config, common);
      apply_partition(config);
      if (grid_points) config.grid_points = *grid_points;
      if (refinements) config.refinements = *refinements;
      return cmd_oracle(config);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Infeasible ? kExitInfeasible : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
