#include "tcbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tcbm {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }
bool finite_nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

double PowerModel::power(double rate) const { return k0 * std::pow(rate, alpha); }

void PowerModel::validate() const {
  require(finite_positive(k0), "power.k0 must be > 0");
  require(finite_positive(alpha), "power.alpha must be > 0");
}

void WirelessScenario::validate() const {
  require(finite_positive(r_hat), "scenario.r_hat must be > 0");
  require(finite_nonnegative(e_setup), "scenario.e_setup must be >= 0");
  power.validate();
}

void Workload::validate() const {
  require(finite_positive(m0), "workload.m0 must be > 0");
  require(finite_nonnegative(dirty_rate), "workload.dirty_rate must be >= 0");
}

void StageConstants::validate() const {
  require(finite_nonnegative(t_pm) && finite_nonnegative(t_re) && finite_nonnegative(t_cm) &&
              finite_nonnegative(t_at),
          "stage durations must be >= 0");
}

void QosConstraints::validate() const {
  require(finite_positive(delta_tm), "qos.delta_tm must be > 0");
  require(finite_positive(delta_dt), "qos.delta_dt must be > 0");
  require(std::isfinite(beta) && beta > 1.0, "qos.beta must be > 1");
  require(theta == 0 || theta == 1, "qos.theta must be 0 or 1");
}

RateSchedule RateSchedule::constant(int i_max, double rate) {
  RateSchedule s;
  s.i_max = i_max;
  s.rates.assign(static_cast<std::size_t>(i_max) + 2, rate);
  return s;
}

void RateSchedule::validate() const {
  if (i_max < 0) throw Error(ErrorKind::InvalidSchedule, "schedule i_max must be >= 0");
  if (rates.size() != static_cast<std::size_t>(i_max) + 2) {
    throw Error(ErrorKind::InvalidSchedule, "schedule must hold i_max + 2 rates");
  }
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!finite_positive(rates[i])) {
      std::ostringstream os;
      os << "schedule rate R_" << i << " = " << rates[i] << " is not positive";
      throw Error(ErrorKind::InvalidSchedule, os.str());
    }
  }
}

MigrationOutcome simulate(const RateSchedule& schedule, const Workload& workload,
                          const WirelessScenario& scenario, const StageConstants& stages) {
  schedule.validate();
  workload.validate();

  const std::size_t n = schedule.rates.size();
  const double k0 = scenario.power.k0;
  const double alpha = scenario.power.alpha;

  MigrationOutcome out;
  out.volumes.resize(n);
  out.round_times.resize(n);
  out.per_round_energy.resize(n);

  double volume = workload.m0;
  for (std::size_t i = 0; i < n; ++i) {
    const double rate = schedule.rates[i];
    const double time = volume / rate;
    out.volumes[i] = volume;
    out.round_times[i] = time;
    // P(R) * T = k0 R^alpha * V / R
    out.per_round_energy[i] = k0 * std::pow(rate, alpha - 1.0) * volume;
    volume = workload.dirty_rate * time;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) out.t_ip += out.round_times[i];
  out.t_sc = out.round_times.back();
  out.t_mmt = out.t_ip + out.t_sc;
  out.t_dt = out.t_sc + stages.fixed_downtime();
  out.t_tm = stages.t_pm + stages.t_re + out.t_mmt + stages.t_cm + stages.t_at;
  out.e_tot = scenario.e_setup;
  for (double e : out.per_round_energy) out.e_tot += e;
  return out;
}

double ConstraintResiduals::max_residual() const {
  double worst = std::max(total_time, downtime);
  for (double v : speedup) worst = std::max(worst, v);
  for (double v : rate_cap) worst = std::max(worst, v);
  return worst;
}

ConstraintResiduals constraint_residuals(const MigrationOutcome& outcome, const RateSchedule& schedule,
                                         const Workload& workload, const WirelessScenario& scenario,
                                         const QosConstraints& qos, std::span<const int> updated_indices) {
  const double theta = qos.theta;
  ConstraintResiduals r;
  r.total_time = theta * (outcome.t_tm / qos.delta_tm - 1.0);
  r.downtime = outcome.t_dt / qos.delta_dt - 1.0;

  const int last = schedule.i_max + 1;
  auto add_speedup = [&](int i) {
    if (std::find(r.speedup_indices.begin(), r.speedup_indices.end(), i) != r.speedup_indices.end()) return;
    r.speedup_indices.push_back(i);
    r.speedup.push_back(theta * (qos.beta * workload.dirty_rate / schedule.rates[static_cast<std::size_t>(i)] - 1.0));
  };
  add_speedup(0);
  for (int i : updated_indices) {
    if (i > 0 && i < last) add_speedup(i);
  }

  r.rate_cap.reserve(schedule.rates.size());
  for (double rate : schedule.rates) r.rate_cap.push_back(rate / scenario.r_hat - 1.0);
  return r;
}

namespace {

// Downtime and total time of the all-r_hat schedule with `rounds` pre-copy
// rounds, in closed form.
struct CapTimes {
  double t_dt;
  double t_tm;
};

CapTimes cap_schedule_times(int rounds, const Workload& workload, const WirelessScenario& scenario,
                            const StageConstants& stages) {
  const double ratio = workload.dirty_rate / scenario.r_hat;
  double t = workload.m0 / scenario.r_hat;
  double t_mmt = 0.0;
  for (int i = 0; i <= rounds; ++i) {
    t_mmt += t;
    t *= ratio;
  }
  // t now holds T_{rounds+1}
  t_mmt += t;
  return {t + stages.fixed_downtime(), stages.fixed_total() + t_mmt};
}

bool rounds_feasible(int rounds, const Workload& workload, const WirelessScenario& scenario,
                     const QosConstraints& qos, const StageConstants& stages) {
  const auto times = cap_schedule_times(rounds, workload, scenario, stages);
  if (times.t_dt / qos.delta_dt - 1.0 > kFeasibilityTol) return false;
  if (qos.theta == 1 && times.t_tm / qos.delta_tm - 1.0 > kFeasibilityTol) return false;
  return true;
}

bool speedup_contradicts_cap(const Workload& workload, const WirelessScenario& scenario, const QosConstraints& qos) {
  return qos.theta == 1 && qos.beta * workload.dirty_rate / scenario.r_hat - 1.0 > kFeasibilityTol;
}

}  // namespace

std::optional<int> min_feasible_rounds(const Workload& workload, const WirelessScenario& scenario,
                                       const QosConstraints& qos, const StageConstants& stages, int hard_cap) {
  workload.validate();
  scenario.validate();
  qos.validate();
  stages.validate();

  if (speedup_contradicts_cap(workload, scenario, qos)) return std::nullopt;
  if (stages.fixed_downtime() / qos.delta_dt - 1.0 > kFeasibilityTol) return std::nullopt;
  for (int rounds = 0; rounds <= hard_cap; ++rounds) {
    if (rounds_feasible(rounds, workload, scenario, qos, stages)) return rounds;
  }
  return std::nullopt;
}

std::string infeasibility_reason(const Workload& workload, const WirelessScenario& scenario,
                                 const QosConstraints& qos, const StageConstants& stages, int hard_cap) {
  std::ostringstream os;
  if (speedup_contradicts_cap(workload, scenario, qos)) {
    os << "speed-up constraint contradicts the rate cap: beta * dirty_rate = " << qos.beta * workload.dirty_rate
       << " Mb/s exceeds r_hat = " << scenario.r_hat << " Mb/s";
  } else if (stages.fixed_downtime() / qos.delta_dt - 1.0 > kFeasibilityTol) {
    os << "commitment + activation time " << stages.fixed_downtime() << " s already exceeds delta_dt = "
       << qos.delta_dt << " s";
  } else if (!min_feasible_rounds(workload, scenario, qos, stages, hard_cap)) {
    os << "no round count up to " << hard_cap << " meets delta_dt = " << qos.delta_dt << " s";
    if (qos.theta == 1) os << " and delta_tm = " << qos.delta_tm << " s";
    os << " even at r_hat = " << scenario.r_hat << " Mb/s";
  }
  return os.str();
}

}  // namespace tcbm
