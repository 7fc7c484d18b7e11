#include "tcbm/baselines.hpp"

#include "tcbm/partition.hpp"
#include "tcbm/problem.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace tcbm {

RateSchedule xen_schedule(const Workload& workload, const XenPolicy& policy) {
  workload.validate();
  if (policy.i_max_xen < 0) throw Error(ErrorKind::InvalidArgument, "xen i_max must be >= 0");
  if (!(policy.r_max_xen > workload.dirty_rate)) {
    std::ostringstream os;
    os << "xen r_max (" << policy.r_max_xen << ") must exceed the dirty rate (" << workload.dirty_rate << ")";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  const double step = policy.rate_step(workload.dirty_rate);
  RateSchedule schedule;
  schedule.i_max = policy.i_max_xen;
  for (int i = 0; i <= policy.i_max_xen + 1; ++i) schedule.rates.push_back(workload.dirty_rate + i * step);
  schedule.rates.back() = policy.r_max_xen;
  return schedule;
}

double measured_speedup(const MigrationOutcome& outcome, SpeedupMeasure measure) {
  const std::size_t n = outcome.volumes.size();
  const double rounds = static_cast<double>(n - 1);
  if (measure == SpeedupMeasure::GeometricMean) {
    if (outcome.volumes.back() == 0.0) return std::numeric_limits<double>::infinity();
    return std::pow(outcome.volumes.front() / outcome.volumes.back(), 1.0 / rounds);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (outcome.volumes[i + 1] == 0.0) return std::numeric_limits<double>::infinity();
    sum += outcome.volumes[i] / outcome.volumes[i + 1];
  }
  return sum / rounds;
}

XenOutcome xen_evaluate(const Workload& workload, const WirelessScenario& scenario, const StageConstants& stages,
                        const XenPolicy& policy, SpeedupMeasure measure) {
  XenOutcome out;
  out.schedule = xen_schedule(workload, policy);
  out.outcome = simulate(out.schedule, workload, scenario, stages);
  out.beta_achieved = measured_speedup(out.outcome, measure);
  return out;
}

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol,
                               int max_iterations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iterations && b - a > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  // endpoints can win when the minimum sits on the boundary
  double best = 0.5 * (a + b);
  double f_best = f(best);
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx < f_best) {
      best = x;
      f_best = fx;
    }
  }
  return best;
}

SolverReport solve_bmop(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
                        const StageConstants& stages, int i_max, const SolverOptions& opts) {
  opts.validate();
  const RatePartition partition = constant_partition(i_max);
  if (workload.dirty_rate == 0.0) return solve_tcbm(scenario, workload, qos, stages, partition, opts);

  scenario.validate();
  qos.validate();
  stages.validate();

  auto feasible = [&](double rate) {
    const std::vector<double> r{rate};
    return evaluate_schedule(scenario, workload, qos, stages, partition, r).feasible;
  };

  const double floor = kRateFloorFraction * scenario.r_hat;
  const double lo = qos.theta == 1 ? std::max(qos.beta * workload.dirty_rate, floor) : floor;
  SolverReport report;
  report.partition = partition;
  if (lo / scenario.r_hat - 1.0 > kFeasibilityTol || !feasible(scenario.r_hat)) {
    report.status = SolverStatus::Infeasible;
    std::ostringstream os;
    os << "no constant rate up to r_hat = " << scenario.r_hat << " Mb/s is feasible at i_max = " << i_max;
    report.message = os.str();
    return report;
  }

  // Time constraints decrease in R, so the feasible set is [r_min, r_hat].
  double log_lo = std::log(std::min(lo, scenario.r_hat));
  const double log_hi = std::log(scenario.r_hat);
  int iterations = 0;
  if (!feasible(std::exp(log_lo))) {
    double a = log_lo;
    double b = log_hi;
    while (b - a > 1e-14 && iterations < 200) {
      const double mid = 0.5 * (a + b);
      (feasible(std::exp(mid)) ? b : a) = mid;
      ++iterations;
    }
    log_lo = b;
  }

  // E(e^x) is a sum of exponentials of affine functions of x: convex, so unimodal.
  auto energy = [&](double x) {
    return simulate(RateSchedule::constant(i_max, std::exp(x)), workload, scenario, stages).e_tot;
  };
  const double x_best = golden_section_minimize(energy, log_lo, log_hi, 1e-12);
  const std::vector<double> rate{std::exp(x_best)};
  report = evaluate_schedule(scenario, workload, qos, stages, partition, rate);
  report.status = report.feasible ? SolverStatus::Converged : SolverStatus::Infeasible;
  report.iterations = iterations;
  return report;
}

RoundSearchResult optimize_bmop_rounds(const WirelessScenario& scenario, const Workload& workload,
                                       const QosConstraints& qos, const StageConstants& stages,
                                       const SolverOptions& opts) {
  opts.validate();
  RoundSearchResult result;
  const auto first = min_feasible_rounds(workload, scenario, qos, stages, opts.round_cap);
  for (int i_max = first.value_or(opts.round_cap + 1); i_max <= opts.round_cap; ++i_max) {
    SolverReport report = solve_bmop(scenario, workload, qos, stages, i_max, opts);
    if (!report.ok()) continue;
    result.candidates.emplace_back(i_max, report.energy());
    if (!result.ok() || report.energy() < result.report.energy() * (1.0 - opts.tolerance)) {
      result.best_i_max = i_max;
      result.report = std::move(report);
    }
  }
  if (!result.ok()) {
    result.report.status = SolverStatus::Infeasible;
    result.report.message = "no feasible constant-rate schedule in the round range";
  }
  return result;
}

}  // namespace tcbm
