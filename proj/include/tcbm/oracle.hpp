#ifndef TCBM_ORACLE_HPP
#define TCBM_ORACLE_HPP

#include "tcbm/model.hpp"
#include "tcbm/partition.hpp"

#include <cstdint>
#include <vector>

namespace tcbm {

struct OracleResult {
  std::vector<double> reduced_rates;
  RateSchedule schedule;
  double energy = 0.0;
  std::uint64_t evaluated = 0;
};

/// Exhaustive search over log-spaced grids for each reduced rate except the
/// final one, on [max(beta*w*[theta=1], floor), r_hat]. The final
/// stop-and-copy rate is profiled exactly: for alpha >= 1 energy grows with
/// it, so it is set to the smallest value meeting the downtime and
/// total-time limits; for alpha < 1 it is set to r_hat.
///
/// For alpha >= 1 a branch is cut once the energy of its next round alone
/// reaches the incumbent; no grid point that could win is skipped.
///
/// Each refinement pass re-grids a window of +/- 2 cells around the incumbent
/// with 21 points per axis, starting from the incumbent as the bound and
/// keeping it, so energy is non-increasing across passes.
///
/// Throws Infeasible when no grid point is feasible.
OracleResult brute_force_oracle(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
                                const StageConstants& stages, const RatePartition& partition, int grid_points,
                                int refinements = 0);

}  // namespace tcbm

#endif
