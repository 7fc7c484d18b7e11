#ifndef TCBM_PROBLEM_HPP
#define TCBM_PROBLEM_HPP

#include "tcbm/model.hpp"
#include "tcbm/partition.hpp"
#include "tcbm/posynomial.hpp"

#include <Eigen/Dense>

#include <vector>

namespace tcbm {

/// Rates without a speed-up lower bound are kept above r_hat times this.
inline constexpr double kRateFloorFraction = 1e-6;

/// Minimum-energy rate allocation over the reduced variables of a partition,
/// written as a geometric program in log-rates x = ln R:
///
///   minimize   ln P(x)                       P = E_TOT - E_SETUP
///   subject to ln(t_tm(x) / delta_tm) <= 0   (only when theta = 1)
///              ln(t_dt(x) / delta_dt) <= 0
///              lower <= x <= upper
///
/// P, t_tm and t_dt are posynomials in the rates, so every function above is
/// convex in x. Since E_SETUP is a constant, minimizing ln P minimizes E_TOT.
class TcbmProblem {
public:
  struct Constraint {
    enum class Kind { TotalTime, Downtime } kind;
    Posynomial time;  // seconds
    double limit;     // seconds
  };

  TcbmProblem(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
              const StageConstants& stages, const RatePartition& partition);

  int num_vars() const { return static_cast<int>(lower_.size()); }
  const RatePartition& partition() const { return partition_; }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  /// True when some speed-up bound exceeds the rate cap.
  bool box_empty() const;

  const Posynomial& rate_energy() const { return rate_energy_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  double objective(const Eigen::VectorXd& x) const { return rate_energy_.log_value(x); }
  /// ln(time / limit); negative when satisfied.
  double constraint_value(std::size_t k, const Eigen::VectorXd& x) const;
  double max_constraint(const Eigen::VectorXd& x) const;
  /// Energy in joules, e_setup included.
  double energy(const Eigen::VectorXd& x) const;

  /// Initial point: every reduced rate at the geometric mean of
  /// beta * w and r_hat (clamped into the box).
  Eigen::VectorXd initial_point() const;
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  /// Every variable at its upper bound (all rates at r_hat).
  Eigen::VectorXd upper_point() const { return upper_; }

  RateSchedule schedule(const Eigen::VectorXd& x) const;
  Eigen::VectorXd log_rates(std::span<const double> reduced_rates) const;

  const WirelessScenario& scenario() const { return scenario_; }
  const Workload& workload() const { return workload_; }
  const QosConstraints& qos() const { return qos_; }
  const StageConstants& stages() const { return stages_; }

private:
  WirelessScenario scenario_;
  Workload workload_;
  QosConstraints qos_;
  StageConstants stages_;
  RatePartition partition_;

  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  Posynomial rate_energy_;
  std::vector<Constraint> constraints_;
};

}  // namespace tcbm

#endif
