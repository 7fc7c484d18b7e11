#include "tcbm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <functional>
#include <thread>

namespace tcbm {

namespace {

std::vector<ScenarioPreset> make_presets() {
  std::vector<ScenarioPreset> presets;

  ScenarioPreset g3;
  g3.key = "3g";
  g3.scenario = {"3G", 0.9 * 2.0, 3.25, {0.18, 2.0}};
  g3.qos = {1460.0, 0.14, 2.0, 1};
  g3.dirty_profile = {0.8, 1.5, 0.8};
  g3.k0_profile = {0.18, 18.0, 0.18};
  presets.push_back(g3);

  ScenarioPreset g4;
  g4.key = "4g";
  g4.scenario = {"4G", 0.9 * 50.0, 5.1, {0.09, 2.0}};
  g4.qos = {58.6, 5.61e-3, 2.33, 1};
  g4.dirty_profile = {11.25, 24.0, 11.25};
  g4.k0_profile = {0.09, 0.9, 0.09};
  presets.push_back(g4);

  ScenarioPreset wifi;
  wifi.key = "wifi";
  wifi.scenario = {"WiFi", 0.9 * 11.0, 5.9, {0.05, 2.0}};
  wifi.qos = {266.0, 2.55e-2, 2.33, 1};
  wifi.dirty_profile = {4.0, 8.0, 4.0};
  wifi.k0_profile = {0.05, 0.5, 0.05};
  presets.push_back(wifi);

  return presets;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Runs body(0..count-1) on up to `jobs` threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string brief(const std::optional<double>& v, const char* fmt = "%.4g") {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

}  // namespace

std::span<const ScenarioPreset> scenario_presets() {
  static const std::vector<ScenarioPreset> presets = make_presets();
  return presets;
}

const ScenarioPreset& scenario_preset(std::string_view key) {
  const std::string k = lowercase(key);
  for (const auto& p : scenario_presets()) {
    if (p.key == k) return p;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown scenario preset '" + std::string(key) + "' (expected 3g, 4g or wifi)");
}

std::vector<std::string> tracking_profile_names() {
  return {"fig45a", "fig45b", "fig45c", "fig46a", "fig46b", "fig46c"};
}

TrackingProfile tracking_profile(std::string_view name) {
  const std::string n = lowercase(name);
  const auto known = tracking_profile_names();
  if (std::find(known.begin(), known.end(), n) == known.end()) {
    throw Error(ErrorKind::InvalidArgument,
                "unknown tracking profile '" + std::string(name) + "' (expected fig45a|b|c or fig46a|b|c)");
  }
  static const char* keys[] = {"3g", "4g", "wifi"};
  const ScenarioPreset& preset = scenario_preset(keys[n.back() - 'a']);
  const bool steps_k0 = n.compare(0, 5, "fig46") == 0;

  TrackingProfile profile;
  profile.name = n;
  profile.preset = preset.key;
  profile.timeline.change_points.assign(kProfileChangePoints.begin(), kProfileChangePoints.end());
  const double w = preset.dirty_profile[0];
  const double k0 = preset.scenario.power.k0;
  for (std::size_t seg = 0; seg < 3; ++seg) {
    profile.timeline.dirty_rates.push_back(steps_k0 ? w : preset.dirty_profile[seg]);
    profile.timeline.k0s.push_back(steps_k0 ? preset.k0_profile[seg] : k0);
  }
  return profile;
}

std::vector<WorkloadPreset> application_presets() {
  return {{"bzip2", 0.25}, {"mcf", 0.5}, {"memcached", 0.9}};
}

double savings(double e_star, double e_ref) {
  if (!(e_ref > 0.0)) throw Error(ErrorKind::InvalidArgument, "savings reference energy must be > 0");
  return 100.0 * (1.0 - e_star / e_ref);
}

std::optional<double> ComparisonRow::save_vs_xen() const {
  if (!e_tcbm || !(e_xen > 0.0)) return std::nullopt;
  return savings(*e_tcbm, e_xen);
}

std::optional<double> ComparisonRow::save_vs_bmop() const {
  if (!e_tcbm || !e_bmop) return std::nullopt;
  return savings(*e_tcbm, *e_bmop);
}

std::vector<ComparisonRow> compare_protocol(const ComparisonSetup& setup) {
  setup.scenario.validate();
  setup.workload.validate();
  setup.stages.validate();
  setup.solver.validate();
  if (setup.q < 0) throw Error(ErrorKind::InvalidArgument, "compare q must be >= 0 (0 selects Q = i_max)");
  const double r_max = setup.r_max_xen > 0.0 ? setup.r_max_xen : setup.scenario.r_hat;

  std::vector<ComparisonRow> rows(setup.xen_rounds.size());
  parallel_for(rows.size(), setup.jobs, [&](std::size_t k) {
    ComparisonRow& row = rows[k];
    row.scenario = setup.scenario.name;
    row.i_max_xen = setup.xen_rounds[k];
    row.q = setup.q;
    row.dirty_ratio = setup.workload.dirty_rate / setup.scenario.r_hat;
    std::vector<std::string> notes;
    if (row.dirty_ratio > kComparableDirtyRatio + 1e-9) notes.push_back("w/r_hat above 0.33");

    try {
      const XenOutcome xen =
          xen_evaluate(setup.workload, setup.scenario, setup.stages, XenPolicy{r_max, row.i_max_xen}, setup.measure);
      row.delta_dt = xen.outcome.t_dt;
      row.delta_tm = xen.outcome.t_tm;
      row.beta = xen.beta_achieved;
      row.e_xen = xen.outcome.e_tot;

      const QosConstraints qos{row.delta_tm, row.delta_dt, row.beta, setup.theta};
      qos.validate();

      const QRule rule = setup.q == 0 ? full_q() : fixed_q(setup.q);
      const RoundSearchResult tcbm = optimize_rounds(setup.scenario, setup.workload, qos, setup.stages, rule, setup.solver);
      if (tcbm.ok()) {
        row.e_tcbm = tcbm.report.energy();
        row.i_max_tcbm = tcbm.best_i_max;
        row.q = tcbm.report.partition.q;
        row.tcbm_t_tm = tcbm.report.outcome.t_tm;
        row.tcbm_t_dt = tcbm.report.outcome.t_dt;
      } else {
        notes.push_back("TCBM infeasible: " + tcbm.report.message);
      }

      const RoundSearchResult bmop = optimize_bmop_rounds(setup.scenario, setup.workload, qos, setup.stages, setup.solver);
      if (bmop.ok()) {
        row.e_bmop = bmop.report.energy();
        row.i_max_bmop = bmop.best_i_max;
      } else {
        notes.push_back("BMOP infeasible: " + bmop.report.message);
      }
    } catch (const Error& e) {
      notes.push_back(e.what());
    }

    for (std::size_t i = 0; i < notes.size(); ++i) row.note += (i ? "; " : "") + notes[i];
  });
  return rows;
}

std::vector<SweepRow> workload_sweep(const SweepSetup& setup) {
  std::vector<SweepRow> rows(setup.workloads.size());
  parallel_for(rows.size(), setup.jobs, [&](std::size_t k) {
    SweepRow& row = rows[k];
    row.workload = setup.workloads[k].name;
    row.dirty_rate = setup.workloads[k].fraction * setup.dirty_ratio * setup.scenario.r_hat;

    ComparisonSetup cs;
    cs.scenario = setup.scenario;
    cs.workload = {setup.m0, row.dirty_rate};
    cs.stages = setup.stages;
    cs.xen_rounds = {setup.xen_rounds};
    cs.q = 0;
    cs.measure = setup.measure;
    cs.solver = setup.solver;
    row.comparison = compare_protocol(cs).front();
  });
  return rows;
}

std::string format_number(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
  out << "scenario,i_max_xen,delta_dt_s,delta_tm_s,beta,E_xen_J,E_bmop_J,Q,E_tcbm_J,save_vs_xen_pct,save_vs_bmop_pct\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.i_max_xen << ',' << format_number(r.delta_dt) << ',' << format_number(r.delta_tm)
        << ',' << format_number(r.beta) << ',' << format_number(r.e_xen) << ',' << cell(r.e_bmop) << ',' << r.q << ','
        << cell(r.e_tcbm) << ',' << cell(r.save_vs_xen()) << ',' << cell(r.save_vs_bmop()) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepTable> tables) {
  out << "scenario,workload,manager,E_J\n";
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      const ComparisonRow& c = r.comparison;
      const std::optional<double> xen = c.e_xen > 0.0 ? std::optional<double>(c.e_xen) : std::nullopt;
      out << t.scenario << ',' << r.workload << ",Xen," << cell(xen) << '\n';
      out << t.scenario << ',' << r.workload << ",BMOP," << cell(c.e_bmop) << '\n';
      out << t.scenario << ',' << r.workload << ",TCBM," << cell(c.e_tcbm) << '\n';
    }
  }
}

void write_trace_csv(std::ostream& out, const TrackerTrace& trace) {
  const std::size_t n_rates = trace.samples.empty() ? 0 : trace.samples.front().reduced_rates.size();
  out << "n,w_bar,k0,E_tot,feasible";
  for (std::size_t k = 0; k < n_rates; ++k) out << ",R_" << k;
  out << '\n';
  for (const auto& s : trace.samples) {
    out << s.n << ',' << format_number(s.dirty_rate) << ',' << format_number(s.k0) << ',' << format_number(s.energy)
        << ',' << (s.feasible ? 1 : 0);
    for (double r : s.reduced_rates) out << ',' << format_number(r);
    out << '\n';
  }
}

void write_schedule_csv(std::ostream& out, const SolverReport& report) {
  out << "round,updated,rate_Mbps,volume_Mb,time_s,energy_J\n";
  const auto& updated = report.partition.updated_indices;
  const auto& o = report.outcome;
  for (std::size_t i = 0; i < report.schedule.rates.size(); ++i) {
    const bool is_updated = std::find(updated.begin(), updated.end(), static_cast<int>(i)) != updated.end();
    out << i << ',' << (is_updated ? 1 : 0) << ',' << format_number(report.schedule.rates[i]) << ','
        << format_number(o.volumes[i]) << ',' << format_number(o.round_times[i]) << ','
        << format_number(o.per_round_energy[i]) << '\n';
  }
}

void write_comparison_markdown(std::ostream& out, std::span<const ComparisonRow> rows) {
  auto line = [&](const std::string& label, const std::function<std::string(const ComparisonRow&)>& value) {
    out << "| " << label << " |";
    for (const auto& r : rows) out << ' ' << value(r) << " |";
    out << '\n';
  };
  line("I_MAX^XEN", [](const ComparisonRow& r) { return std::to_string(r.i_max_xen); });
  out << "|---|";
  for (std::size_t i = 0; i < rows.size(); ++i) out << "---|";
  out << '\n';
  line("T_DT^XEN = Delta_DT (s)", [](const ComparisonRow& r) { return brief(r.delta_dt); });
  line("T_TM^XEN = Delta_TM (s)", [](const ComparisonRow& r) { return brief(r.delta_tm); });
  line("beta", [](const ComparisonRow& r) { return brief(r.beta); });
  line("E_TOT^XEN (J)", [](const ComparisonRow& r) { return brief(r.e_xen); });
  line("E_TOT^BMOP (J)", [](const ComparisonRow& r) { return brief(r.e_bmop); });
  line("Q", [](const ComparisonRow& r) { return std::to_string(r.q); });
  line("E_TOT^TCBM (J)", [](const ComparisonRow& r) { return brief(r.e_tcbm); });
  line("En. save vs. Xen (%)", [](const ComparisonRow& r) { return brief(r.save_vs_xen(), "%.1f"); });
  line("En. save vs. BMOP (%)", [](const ComparisonRow& r) { return brief(r.save_vs_bmop(), "%.1f"); });
  bool any_note = false;
  for (const auto& r : rows) any_note = any_note || !r.note.empty();
  if (any_note) {
    out << '\n';
    for (const auto& r : rows) {
      if (!r.note.empty()) out << "- I_MAX^XEN = " << r.i_max_xen << ": " << r.note << '\n';
    }
  }
}

void write_savings_markdown(std::ostream& out, std::span<const SweepTable> tables) {
  std::vector<std::string> workloads;
  if (!tables.empty()) {
    for (const auto& r : tables.front().rows) workloads.push_back(r.workload);
  }
  out << "| Scenario | Parameter |";
  for (const auto& w : workloads) out << ' ' << w << " |";
  out << "\n|---|---|";
  for (std::size_t i = 0; i < workloads.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& t : tables) {
    out << "| " << t.scenario << " | Energy saving resp. Xen (%) |";
    for (const auto& r : t.rows) out << ' ' << brief(r.comparison.save_vs_xen(), "%.2f") << " |";
    out << "\n|  | Energy saving resp. BMOP (%) |";
    for (const auto& r : t.rows) out << ' ' << brief(r.comparison.save_vs_bmop(), "%.2f") << " |";
    out << '\n';
  }
}

}  // namespace tcbm
