#include "tcbm/oracle.hpp"
#include "tcbm/solver.hpp"

#include "instances.hpp"

#include <gtest/gtest.h>

using namespace tcbm;

TEST(BruteForceOracle, WorkedInstance) {
  const auto in = tcbm::testing::worked_instance();
  const auto o = brute_force_oracle(in.scenario, in.workload, in.qos, in.stages, build_partition(0, 0), 400, 0);
  EXPECT_NEAR(o.energy, 552.6, 0.01 * 552.6);
  ASSERT_EQ(o.reduced_rates.size(), 2u);
  EXPECT_NEAR(o.reduced_rates[0], 3.684, 0.05 * 3.684);
  EXPECT_GT(o.evaluated, 0u);
}

TEST(BruteForceOracle, RefinementNeverWorsens) {
  const auto in = tcbm::testing::worked_instance();
  const auto partition = build_partition(0, 0);
  const auto coarse = brute_force_oracle(in.scenario, in.workload, in.qos, in.stages, partition, 50, 0);
  const auto fine = brute_force_oracle(in.scenario, in.workload, in.qos, in.stages, partition, 50, 3);
  EXPECT_LE(fine.energy, coarse.energy);
  EXPECT_GE(fine.energy, 552.6 * (1.0 - 1e-3));
}

TEST(BruteForceOracle, ReturnedScheduleReproducesEnergy) {
  const auto in = tcbm::testing::worked_instance();
  const auto o = brute_force_oracle(in.scenario, in.workload, in.qos, in.stages, build_partition(0, 0), 100, 1);
  const auto out = simulate(o.schedule, in.workload, in.scenario, in.stages);
  EXPECT_NEAR(out.e_tot, o.energy, 1e-9 * o.energy);
  const auto res = constraint_residuals(out, o.schedule, in.workload, in.scenario, in.qos,
                                        build_partition(0, 0).updated_indices);
  EXPECT_TRUE(res.feasible());
}

TEST(BruteForceOracle, ZeroDirtyRateMatchesSolver) {
  auto in = tcbm::testing::worked_instance();
  in.workload.dirty_rate = 0.0;
  in.qos.delta_tm = 50.0;
  const auto partition = build_partition(0, 0);
  const auto o = brute_force_oracle(in.scenario, in.workload, in.qos, in.stages, partition, 400, 2);
  const auto r = solve_tcbm(in.scenario, in.workload, in.qos, in.stages, partition);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(o.energy, r.energy(), 0.01 * r.energy());
}

TEST(BruteForceOracle, Rejections) {
  auto in = tcbm::testing::worked_instance();
  const auto partition = build_partition(0, 0);
  EXPECT_THROW(brute_force_oracle(in.scenario, in.workload, in.qos, in.stages, partition, 1), Error);
  EXPECT_THROW(brute_force_oracle(in.scenario, in.workload, in.qos, in.stages, partition, 10, -1), Error);
  in.workload.dirty_rate = 6.0;
  EXPECT_THROW(brute_force_oracle(in.scenario, in.workload, in.qos, in.stages, partition, 10), Error);
}
