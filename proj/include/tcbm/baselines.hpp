#ifndef TCBM_BASELINES_HPP
#define TCBM_BASELINES_HPP

#include "tcbm/model.hpp"
#include "tcbm/solver.hpp"

#include <functional>

namespace tcbm {

/// Xen-style heuristic: the rate starts at the dirty rate and grows by a
/// constant step so that the stop-and-copy round runs at r_max_xen.
struct XenPolicy {
  double r_max_xen = 1.0;
  int i_max_xen = 0;

  double rate_step(double dirty_rate) const { return (r_max_xen - dirty_rate) / (i_max_xen + 1); }
};

/// How the achieved speed-up of a measured run is summarised.
enum class SpeedupMeasure {
  /// Mean of the per-round reductions V_i / V_{i+1}, i = 0..i_max.
  ArithmeticMean,
  /// (V_0 / V_{i_max+1})^(1/(i_max+1)).
  GeometricMean,
};

struct XenOutcome {
  RateSchedule schedule;
  MigrationOutcome outcome;
  double beta_achieved = 0.0;
};

RateSchedule xen_schedule(const Workload& workload, const XenPolicy& policy);

double measured_speedup(const MigrationOutcome& outcome, SpeedupMeasure measure);

XenOutcome xen_evaluate(const Workload& workload, const WirelessScenario& scenario, const StageConstants& stages,
                        const XenPolicy& policy, SpeedupMeasure measure = SpeedupMeasure::ArithmeticMean);

/// Constant-rate optimum: one rate held for every round, chosen by
/// golden-section search on ln R over the feasible interval.
SolverReport solve_bmop(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
                        const StageConstants& stages, int i_max, const SolverOptions& opts = {});

/// BMOP with the same round search as optimize_rounds.
RoundSearchResult optimize_bmop_rounds(const WirelessScenario& scenario, const Workload& workload,
                                       const QosConstraints& qos, const StageConstants& stages,
                                       const SolverOptions& opts = {});

/// Minimizer of a unimodal f on [lo, hi].
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12,
                               int max_iterations = 500);

}  // namespace tcbm

#endif
