#ifndef TCBM_SOLVER_HPP
#define TCBM_SOLVER_HPP

#include "tcbm/model.hpp"
#include "tcbm/partition.hpp"
#include "tcbm/problem.hpp"

#include <functional>
#include <string>
#include <vector>

namespace tcbm {

struct SolverOptions {
  int max_iterations = 2000;  // total Newton iterations across barrier stages
  double tolerance = 1e-8;    // relative energy gap at termination
  double step_init = 1.0;     // largest Newton step in log-rate space
  int round_cap = 29;         // upper bound on i_max for the round search

  void validate() const;
  bool operator==(const SolverOptions&) const = default;
};

enum class SolverStatus { Converged, Infeasible, IterationLimit };

const char* to_string(SolverStatus status);

struct SolverReport {
  RatePartition partition;
  std::vector<double> reduced_rates;
  RateSchedule schedule;
  MigrationOutcome outcome;
  bool feasible = false;
  int iterations = 0;
  double max_residual = 0.0;
  SolverStatus status = SolverStatus::Infeasible;
  /// Multipliers of the log-form total-time and downtime constraints for the
  /// objective ln(E_TOT - E_SETUP); zero for absent or inactive constraints.
  double total_time_multiplier = 0.0;
  double downtime_multiplier = 0.0;
  std::string message;

  double energy() const { return outcome.e_tot; }
  bool ok() const { return status == SolverStatus::Converged; }
};

/// Minimum-energy rates for a fixed partition, via a log-barrier
/// interior-point method (damped Newton) on the convex log-space form of the
/// geometric program. A zero dirty rate is solved in closed form.
SolverReport solve_tcbm(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
                        const StageConstants& stages, const RatePartition& partition,
                        const SolverOptions& opts = {});

/// Same interior-point solve on an already-built problem.
SolverReport solve_problem(const TcbmProblem& problem, const SolverOptions& opts = {});

/// Maps a candidate i_max to the number of updated pre-copy rates.
using QRule = std::function<int(int)>;

/// Q = min(q, i_max); yields the zero-block partition at i_max = 0.
QRule fixed_q(int q);
/// Q = i_max: every pre-copy rate is free.
QRule full_q();

struct RoundSearchResult {
  int best_i_max = -1;
  SolverReport report;
  /// (i_max, energy) for every feasible candidate that converged.
  std::vector<std::pair<int, double>> candidates;

  bool ok() const { return best_i_max >= 0; }
};

/// Searches i_max from the minimum feasible round count up to
/// opts.round_cap and keeps the lowest-energy report. Ties (within the
/// solver tolerance) go to the smaller i_max.
RoundSearchResult optimize_rounds(const WirelessScenario& scenario, const Workload& workload,
                                  const QosConstraints& qos, const StageConstants& stages, const QRule& q_rule,
                                  const SolverOptions& opts = {});

/// Report for `schedule` evaluated as-is (residuals, outcome, feasibility).
SolverReport evaluate_schedule(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
                               const StageConstants& stages, const RatePartition& partition,
                               std::span<const double> reduced_rates);

}  // namespace tcbm

#endif
