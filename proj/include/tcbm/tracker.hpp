#ifndef TCBM_TRACKER_HPP
#define TCBM_TRACKER_HPP

#include "tcbm/model.hpp"
#include "tcbm/partition.hpp"
#include "tcbm/problem.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace tcbm {

struct TrackerConfig {
  double a_max = 0.5;              // per-coordinate step cap in log-rate space
  int horizon = 90;                // iterations
  double settle_tolerance = 0.01;  // relative energy band for steady state
  double penalty = 10.0;           // augmented-Lagrangian penalty weight

  void validate() const;
  bool operator==(const TrackerConfig&) const = default;
};

/// Reduced log-rates plus multipliers of the log-form total-time and
/// downtime constraints.
struct TrackerState {
  Eigen::VectorXd log_rates;
  double total_time_multiplier = 0.0;
  double downtime_multiplier = 0.0;
};

/// Flags produced by one step.
struct StepInfo {
  /// No schedule can satisfy the constraints at the current parameters
  /// (empty speed-up box or the all-r_hat schedule already too slow).
  bool instance_infeasible = false;
  /// Largest applied coordinate move, after clipping.
  double applied_step = 0.0;
};

/// Start point: every reduced rate at the geometric mean of beta*w and r_hat,
/// multipliers at zero.
TrackerState initial_tracker_state(const TcbmProblem& problem);

/// One primal-dual iteration on the augmented Lagrangian of the log-space
/// problem with objective ln(E_TOT - E_SETUP):
///   1. Newton-type descent direction of the augmented Lagrangian over the
///      coordinates not pinned at a bound,
///   2. each coordinate clipped to [-a_max, a_max], then halved until the
///      augmented Lagrangian does not increase,
///   3. projection onto the speed-up / rate-cap box (rate cap only when the
///      speed-up bound exceeds r_hat),
///   4. multiplier ascent lambda <- max(0, lambda + penalty * c(x)).
/// When the instance is infeasible the multipliers are held, since no
/// saddle point exists for them to converge to.
TrackerState tracker_step(const TcbmProblem& problem, const TrackerState& state, const TrackerConfig& config,
                          StepInfo* info = nullptr);

/// Clips each coordinate of `step` to [-a_max, a_max].
Eigen::VectorXd clip_step(const Eigen::VectorXd& step, double a_max);

/// Piecewise-constant parameter sequence. Segment k covers iterations
/// [change_points[k-1], change_points[k]) with change_points[-1] = 0.
struct ParameterTimeline {
  std::vector<int> change_points;   // ascending, strictly positive
  std::vector<double> dirty_rates;  // one per segment
  std::vector<double> k0s;          // one per segment

  std::size_t segments() const { return dirty_rates.size(); }
  std::size_t segment_at(int n) const;
  /// [begin, end) iteration range of `segment` within `horizon`.
  std::pair<int, int> segment_range(std::size_t segment, int horizon) const;
  void validate() const;
  bool operator==(const ParameterTimeline&) const = default;

  static ParameterTimeline constant(double dirty_rate, double k0);
};

struct TrackerSample {
  int n = 0;
  double dirty_rate = 0.0;
  double k0 = 0.0;
  double energy = 0.0;  // E_TOT including E_SETUP
  bool feasible = false;
  bool instance_infeasible = false;
  std::vector<double> reduced_rates;
};

struct TrackerTrace {
  std::vector<TrackerSample> samples;
};

/// Runs `config.horizon` tracker steps, switching w and k0 per the timeline.
/// `workload` supplies m0 (its dirty rate is replaced by the timeline's).
TrackerTrace run_tracker(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
                         const StageConstants& stages, const RatePartition& partition,
                         const ParameterTimeline& timeline, const TrackerConfig& config);

/// Iterations from the segment start until every later in-segment energy
/// stays within `tolerance` (relative) of the segment's final energy.
/// nullopt when even the last two samples disagree (never settled).
std::optional<int> settling_time(const TrackerTrace& trace, int begin, int end, double tolerance);

}  // namespace tcbm

#endif
