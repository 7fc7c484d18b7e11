#include "tcbm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tcbm {

TcbmProblem::TcbmProblem(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
                         const StageConstants& stages, const RatePartition& partition)
    : scenario_(scenario),
      workload_(workload),
      qos_(qos),
      stages_(stages),
      partition_(partition),
      rate_energy_(partition.num_reduced()) {
  scenario.validate();
  workload.validate();
  qos.validate();
  stages.validate();

  const int n = partition.num_reduced();
  const int rounds = partition.i_max + 2;
  const double w = workload.dirty_rate;
  const double alpha = scenario.power.alpha;

  Posynomial total_time(n);
  Posynomial downtime(n);

  // Round i carries V_i = M0 w^i / prod_{j<i} R_j and T_i = V_i / R_i.
  Eigen::VectorXd volume_exp = Eigen::VectorXd::Zero(n);
  double volume_coeff = workload.m0;
  for (int i = 0; i < rounds; ++i) {
    const int v = partition.reduced_index_of(i);
    Eigen::VectorXd energy_exp = volume_exp;
    energy_exp[v] += alpha - 1.0;
    rate_energy_.add_term(scenario.power.k0 * volume_coeff, energy_exp);

    Eigen::VectorXd time_exp = volume_exp;
    time_exp[v] -= 1.0;
    total_time.add_term(volume_coeff, time_exp);
    if (i == rounds - 1) downtime.add_term(volume_coeff, time_exp);

    volume_exp = time_exp;
    volume_coeff *= w;
  }
  total_time.add_constant(stages.fixed_total());
  downtime.add_constant(stages.fixed_downtime());

  if (qos.theta == 1 && !total_time.empty()) {
    constraints_.push_back({Constraint::Kind::TotalTime, std::move(total_time), qos.delta_tm});
  }
  if (!downtime.empty()) constraints_.push_back({Constraint::Kind::Downtime, std::move(downtime), qos.delta_dt});

  const double floor = kRateFloorFraction * scenario.r_hat;
  const double speedup_rate = qos.beta * w;
  lower_.resize(n);
  upper_.resize(n);
  for (int k = 0; k < n; ++k) {
    const int round = partition.updated_indices[static_cast<std::size_t>(k)];
    const bool speedup_bound = qos.theta == 1 && round != partition.i_max + 1;
    lower_[k] = std::log(speedup_bound ? std::max(speedup_rate, floor) : floor);
    upper_[k] = std::log(scenario.r_hat);
  }
}

bool TcbmProblem::box_empty() const {
  for (Eigen::Index k = 0; k < lower_.size(); ++k) {
    if (std::exp(lower_[k] - upper_[k]) - 1.0 > kFeasibilityTol) return true;
  }
  return false;
}

double TcbmProblem::constraint_value(std::size_t k, const Eigen::VectorXd& x) const {
  const auto& c = constraints_[k];
  return c.time.log_value(x) - std::log(c.limit);
}

double TcbmProblem::max_constraint(const Eigen::VectorXd& x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < constraints_.size(); ++k) worst = std::max(worst, constraint_value(k, x));
  return worst;
}

double TcbmProblem::energy(const Eigen::VectorXd& x) const { return scenario_.e_setup + rate_energy_.value(x); }

Eigen::VectorXd TcbmProblem::initial_point() const {
  const double w = workload_.dirty_rate;
  const double hi = std::log(scenario_.r_hat);
  const double mid = w > 0.0 ? 0.5 * (std::log(qos_.beta * w) + hi) : hi;
  return project(Eigen::VectorXd::Constant(num_vars(), std::min(mid, hi)));
}

Eigen::VectorXd TcbmProblem::project(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double lo = std::min(lower_[k], upper_[k]);
    out[k] = std::clamp(x[k], lo, upper_[k]);
  }
  return out;
}

RateSchedule TcbmProblem::schedule(const Eigen::VectorXd& x) const {
  std::vector<double> rates(static_cast<std::size_t>(x.size()));
  for (Eigen::Index k = 0; k < x.size(); ++k) rates[static_cast<std::size_t>(k)] = std::exp(x[k]);
  return expand(partition_, rates);
}

Eigen::VectorXd TcbmProblem::log_rates(std::span<const double> reduced_rates) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(reduced_rates.size()));
  for (std::size_t k = 0; k < reduced_rates.size(); ++k) x[static_cast<Eigen::Index>(k)] = std::log(reduced_rates[k]);
  return x;
}

}  // namespace tcbm
