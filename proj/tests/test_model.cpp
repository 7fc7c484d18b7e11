#include "tcbm/model.hpp"
#include "tcbm/partition.hpp"

#include "instances.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace tcbm;

namespace {

WirelessScenario unit_scenario(double e_setup = 0.0) { return {"unit", 100.0, e_setup, {1.0, 2.0}}; }

RateSchedule schedule_of(std::vector<double> rates) {
  RateSchedule s;
  s.i_max = static_cast<int>(rates.size()) - 2;
  s.rates = std::move(rates);
  return s;
}

}  // namespace

TEST(Simulate, ConstantRateGeometricRecursion) {
  const auto out = simulate(RateSchedule::constant(1, 2.0), {256.0, 1.0}, unit_scenario(), {});
  ASSERT_EQ(out.volumes.size(), 3u);
  EXPECT_DOUBLE_EQ(out.volumes[0], 256.0);
  EXPECT_DOUBLE_EQ(out.volumes[1], 128.0);
  EXPECT_DOUBLE_EQ(out.volumes[2], 64.0);
  EXPECT_DOUBLE_EQ(out.round_times[0], 128.0);
  EXPECT_DOUBLE_EQ(out.round_times[1], 64.0);
  EXPECT_DOUBLE_EQ(out.round_times[2], 32.0);
  EXPECT_DOUBLE_EQ(out.t_ip, 192.0);
  EXPECT_DOUBLE_EQ(out.t_sc, 32.0);
  EXPECT_DOUBLE_EQ(out.t_mmt, 224.0);
  EXPECT_DOUBLE_EQ(out.t_dt, 32.0);
  EXPECT_DOUBLE_EQ(out.e_tot, 896.0);
}

TEST(Simulate, ZeroDirtyRateSendsOnlyRoundZero) {
  const auto out = simulate(RateSchedule::constant(0, 2.0), {100.0, 0.0}, unit_scenario(5.0), {});
  EXPECT_DOUBLE_EQ(out.volumes[1], 0.0);
  EXPECT_DOUBLE_EQ(out.t_sc, 0.0);
  EXPECT_DOUBLE_EQ(out.t_dt, 0.0);
  EXPECT_DOUBLE_EQ(out.e_tot, 205.0);
}

TEST(Simulate, XenStyleSchedule) {
  const double step = 40.0 / 3.0;
  const auto out = simulate(schedule_of({5.0, 5.0 + step, 5.0 + 2 * step, 45.0}), {90.0, 5.0}, unit_scenario(), {});
  EXPECT_NEAR(out.volumes[0], 90.0, 1e-12);
  EXPECT_NEAR(out.volumes[1], 90.0, 1e-12);
  EXPECT_NEAR(out.volumes[2], 24.545, 1e-3);
  EXPECT_NEAR(out.volumes[3], 3.876, 1e-3);
  EXPECT_NEAR(out.e_tot, 3051.7, 0.05);
}

TEST(Simulate, StageDurationsEnterAggregates) {
  const StageConstants stages{1.0, 2.0, 3.0, 4.0};
  const auto out = simulate(RateSchedule::constant(1, 2.0), {256.0, 1.0}, unit_scenario(), stages);
  EXPECT_DOUBLE_EQ(out.t_dt, 32.0 + 7.0);
  EXPECT_DOUBLE_EQ(out.t_tm, 224.0 + 10.0);
  EXPECT_DOUBLE_EQ(out.t_mmt, out.t_ip + out.t_sc);
}

TEST(Simulate, RejectsNonPositiveRate) {
  EXPECT_THROW(simulate(schedule_of({1.0, 0.0}), {10.0, 1.0}, unit_scenario(), {}), Error);
  EXPECT_THROW(simulate(schedule_of({1.0, -2.0, 1.0}), {10.0, 1.0}, unit_scenario(), {}), Error);
  RateSchedule wrong_length = RateSchedule::constant(2, 1.0);
  wrong_length.rates.pop_back();
  EXPECT_THROW(simulate(wrong_length, {10.0, 1.0}, unit_scenario(), {}), Error);
}

TEST(Residuals, DowntimeRatio) {
  const auto schedule = RateSchedule::constant(1, 2.0);
  const auto out = simulate(schedule, {256.0, 1.0}, unit_scenario(), {});
  const QosConstraints qos{1000.0, 64.0, 1.5, 1};
  const auto res = constraint_residuals(out, schedule, {256.0, 1.0}, unit_scenario(), qos, build_partition(1, 1).updated_indices);
  EXPECT_DOUBLE_EQ(res.downtime, -0.5);
}

TEST(Residuals, ThetaZeroDisablesTotalTimeAndSpeedup) {
  const auto schedule = RateSchedule::constant(2, 1.5);
  const Workload wl{256.0, 1.0};
  const auto out = simulate(schedule, wl, unit_scenario(), {});
  const QosConstraints qos{1.0, 1e6, 5.0, 0};
  const auto res = constraint_residuals(out, schedule, wl, unit_scenario(), qos, build_partition(2, 2).updated_indices);
  EXPECT_EQ(res.total_time, 0.0);
  for (double s : res.speedup) EXPECT_EQ(s, 0.0);
}

TEST(Residuals, SpeedupBoundaryIsZero) {
  const auto schedule = RateSchedule::constant(0, 8.0);
  const Workload wl{64.0, 4.0};
  const auto out = simulate(schedule, wl, unit_scenario(), {});
  const QosConstraints qos{1e6, 1e6, 2.0, 1};
  const auto res = constraint_residuals(out, schedule, wl, unit_scenario(), qos, build_partition(0, 0).updated_indices);
  ASSERT_EQ(res.speedup_indices, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(res.speedup[0], 0.0);
  EXPECT_TRUE(res.feasible());
}

TEST(Residuals, SpeedupSkipsHeldRoundsAndFinalRound) {
  const auto schedule = RateSchedule::constant(6, 3.0);
  const Workload wl{64.0, 1.0};
  const auto out = simulate(schedule, wl, unit_scenario(), {});
  const auto res = constraint_residuals(out, schedule, wl, unit_scenario(), {1e6, 1e6, 2.0, 1},
                                        build_partition(6, 3).updated_indices);
  EXPECT_EQ(res.speedup_indices, (std::vector<int>{0, 1, 3, 5}));
  EXPECT_EQ(res.rate_cap.size(), 8u);
}

TEST(MinFeasibleRounds, WifiLikeCase) {
  const WirelessScenario wifi{"wifi", 9.9, 5.9, {0.05, 2.0}};
  const QosConstraints qos{1e9, 2.55e-2, 2.33, 1};
  EXPECT_EQ(min_feasible_rounds({256.0, 4.0}, wifi, qos, {}), 7);
}

TEST(MinFeasibleRounds, ZeroDirtyRateNeedsNoRounds) {
  EXPECT_EQ(min_feasible_rounds({256.0, 0.0}, unit_scenario(), {10.0, 1e-3, 2.0, 1}, {}), 0);
}

TEST(MinFeasibleRounds, SpeedupAboveCapIsInfeasible) {
  const WirelessScenario wifi{"wifi", 9.9, 5.9, {0.05, 2.0}};
  const QosConstraints qos{1e9, 1.0, 2.33, 1};
  EXPECT_FALSE(min_feasible_rounds({256.0, 5.0}, wifi, qos, {}).has_value());
  EXPECT_NE(infeasibility_reason({256.0, 5.0}, wifi, qos, {}).find("speed-up"), std::string::npos);
}

TEST(MinFeasibleRounds, FixedDowntimeAboveLimitIsInfeasible) {
  const StageConstants stages{0.0, 0.0, 0.5, 0.6};
  EXPECT_FALSE(min_feasible_rounds({256.0, 1.0}, unit_scenario(), {1e9, 1.0, 2.0, 1}, stages).has_value());
}

class ModelProperties : public ::testing::TestWithParam<int> {};

TEST_P(ModelProperties, RecursionAndClosedForms) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int i_max = GetParam() % 7;
  const auto in = tcbm::testing::random_feasible_instance(rng, i_max);

  RateSchedule schedule;
  schedule.i_max = i_max;
  for (int i = 0; i <= i_max + 1; ++i) schedule.rates.push_back(in.scenario.r_hat * (0.2 + 0.8 * u(rng)));
  const auto out = simulate(schedule, in.workload, in.scenario, in.stages);

  for (int i = 0; i <= i_max; ++i) {
    const double lhs = out.volumes[i + 1] * schedule.rates[i];
    const double rhs = in.workload.dirty_rate * out.volumes[i];
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs));
  }

  // Constant-rate closed form.
  const double r = schedule.rates[0];
  const auto constant = simulate(RateSchedule::constant(i_max, r), in.workload, in.scenario, in.stages);
  double series = 0.0;
  for (int i = 0; i <= i_max + 1; ++i) series += std::pow(in.workload.dirty_rate / r, i);
  const double closed = in.scenario.power.k0 * std::pow(r, in.scenario.power.alpha - 1.0) * in.workload.m0 * series;
  EXPECT_NEAR(constant.e_tot - in.scenario.e_setup, closed, 1e-9 * closed);

  // Doubling M0 doubles volumes, times and rate-dependent energy.
  Workload doubled = in.workload;
  doubled.m0 *= 2.0;
  const auto twice = simulate(schedule, doubled, in.scenario, in.stages);
  for (std::size_t i = 0; i < out.volumes.size(); ++i) {
    EXPECT_NEAR(twice.volumes[i], 2.0 * out.volumes[i], 1e-12 * out.volumes[i]);
    EXPECT_NEAR(twice.round_times[i], 2.0 * out.round_times[i], 1e-12 * out.round_times[i]);
  }
  EXPECT_NEAR(twice.e_tot - in.scenario.e_setup, 2.0 * (out.e_tot - in.scenario.e_setup),
              1e-12 * (out.e_tot - in.scenario.e_setup));

  // Raising any single rate does not lengthen memory migration or downtime.
  for (int i = 0; i <= i_max + 1; ++i) {
    RateSchedule faster = schedule;
    faster.rates[i] *= 1.3;
    const auto f = simulate(faster, in.workload, in.scenario, in.stages);
    EXPECT_LE(f.t_mmt, out.t_mmt * (1.0 + 1e-12));
    EXPECT_LE(f.t_dt, out.t_dt * (1.0 + 1e-12));
    EXPECT_GE(in.scenario.power.power(faster.rates[i]), in.scenario.power.power(schedule.rates[i]));
  }
}

TEST_P(ModelProperties, SpeedupImpliesGeometricDecay) {
  std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(GetParam()));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int i_max = 1 + GetParam() % 6;
  const int q = 1 + GetParam() % i_max;
  const auto in = tcbm::testing::random_feasible_instance(rng, i_max);
  const auto partition = build_partition(i_max, q);
  const double lo = in.qos.beta * in.workload.dirty_rate;

  std::vector<double> reduced;
  for (int k = 0; k < partition.num_reduced(); ++k) reduced.push_back(lo + (in.scenario.r_hat - lo) * u(rng));
  const auto schedule = expand(partition, reduced);
  const auto out = simulate(schedule, in.workload, in.scenario, in.stages);
  const auto res = constraint_residuals(out, schedule, in.workload, in.scenario, in.qos, partition.updated_indices);
  for (double s : res.speedup) ASSERT_LE(s, 0.0);
  for (int i = 0; i <= i_max; ++i) EXPECT_LE(out.volumes[i + 1], out.volumes[i] / in.qos.beta * (1.0 + 1e-12));
}

INSTANTIATE_TEST_SUITE_P(Seeds, ModelProperties, ::testing::Range(0, 30));
