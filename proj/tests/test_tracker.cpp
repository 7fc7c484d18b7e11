#include "tcbm/harness.hpp"
#include "tcbm/solver.hpp"
#include "tcbm/tracker.hpp"

#include "instances.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tcbm;

namespace {

TrackerTrace trace_of(std::vector<double> energies) {
  TrackerTrace trace;
  for (std::size_t n = 0; n < energies.size(); ++n) {
    TrackerSample s;
    s.n = static_cast<int>(n);
    s.energy = energies[n];
    trace.samples.push_back(s);
  }
  return trace;
}

}  // namespace

TEST(ClipStep, PerCoordinateCap) {
  Eigen::VectorXd step(3);
  step << 1.3, -1.3, 0.2;
  const auto clipped = clip_step(step, 0.5);
  EXPECT_DOUBLE_EQ(clipped[0], 0.5);
  EXPECT_DOUBLE_EQ(clipped[1], -0.5);
  EXPECT_DOUBLE_EQ(clipped[2], 0.2);
}

TEST(TrackerStep, StationaryStateIsFixedPoint) {
  // Loose limits: the energy gradient pushes both rates onto their lower bounds.
  const WirelessScenario s{"unit", 10.0, 0.0, {1.0, 2.0}};
  const TcbmProblem problem(s, {100.0, 1.0}, {1e8, 1e7, 2.0, 1}, {}, build_partition(0, 0));
  TrackerState state;
  state.log_rates = problem.lower();
  ASSERT_LT(problem.max_constraint(state.log_rates), 0.0);

  StepInfo info;
  const auto next = tracker_step(problem, state, TrackerConfig{}, &info);
  EXPECT_EQ(next.log_rates, state.log_rates);
  EXPECT_EQ(next.total_time_multiplier, 0.0);
  EXPECT_EQ(next.downtime_multiplier, 0.0);
  EXPECT_EQ(info.applied_step, 0.0);
  EXPECT_FALSE(info.instance_infeasible);
}

TEST(TrackerStep, ProjectionLandsOnRateCap) {
  // Only a whisker above the all-r_hat downtime: the optimum sits on the cap.
  const WirelessScenario s{"unit", 10.0, 0.0, {1.0, 2.0}};
  const TcbmProblem problem(s, {100.0, 1.0}, {1e6, 1.0 + 1e-7, 2.0, 1}, {}, build_partition(0, 0));
  TrackerConfig config;
  config.a_max = 10.0;
  TrackerState state = initial_tracker_state(problem);
  bool landed = false;
  for (int n = 0; n < 60; ++n) {
    state = tracker_step(problem, state, config);
    for (int k = 0; k < problem.num_vars(); ++k) {
      ASSERT_LE(state.log_rates[k], problem.upper()[k]);
      landed = landed || state.log_rates[k] == problem.upper()[k];
    }
  }
  EXPECT_TRUE(landed);
}

TEST(TrackerStep, AppliedStepRespectsCap) {
  const auto in = tcbm::testing::worked_instance();
  const TcbmProblem problem(in.scenario, in.workload, in.qos, in.stages, build_partition(0, 0));
  TrackerConfig config;
  config.a_max = 0.05;
  TrackerState state = initial_tracker_state(problem);
  for (int n = 0; n < 20; ++n) {
    StepInfo info;
    const auto next = tracker_step(problem, state, config, &info);
    EXPECT_LE(info.applied_step, config.a_max + 1e-15);
    EXPECT_GE(next.total_time_multiplier, 0.0);
    EXPECT_GE(next.downtime_multiplier, 0.0);
    state = next;
  }
}

TEST(SettlingTime, ConstantSegmentIsZero) {
  const auto trace = trace_of({5.0, 5.0, 5.0, 5.0});
  EXPECT_EQ(settling_time(trace, 0, 4, 0.01), 0);
}

TEST(SettlingTime, CountsIterationsUntilBand) {
  const auto trace = trace_of({1.0, 10.0, 20.0, 15.0, 10.05, 10.0, 10.0});
  EXPECT_EQ(settling_time(trace, 0, 7, 0.01), 4);
  EXPECT_EQ(settling_time(trace, 2, 7, 0.01), 2);
}

TEST(SettlingTime, NeverSettlingIsFlagged) {
  const auto trace = trace_of({1.0, 2.0, 3.0, 4.0});
  EXPECT_FALSE(settling_time(trace, 0, 4, 0.01).has_value());
  EXPECT_THROW(settling_time(trace, 3, 4, 0.01), Error);
}

TEST(ParameterTimeline, SegmentsAndValidation) {
  const ParameterTimeline t{{30, 60}, {1.0, 2.0, 1.0}, {0.1, 0.1, 0.1}};
  EXPECT_EQ(t.segment_at(0), 0u);
  EXPECT_EQ(t.segment_at(29), 0u);
  EXPECT_EQ(t.segment_at(30), 1u);
  EXPECT_EQ(t.segment_at(89), 2u);
  EXPECT_EQ(t.segment_range(1, 90), (std::pair<int, int>{30, 60}));
  EXPECT_EQ(t.segment_range(2, 90), (std::pair<int, int>{60, 90}));
  EXPECT_NO_THROW(t.validate());
  EXPECT_THROW((ParameterTimeline{{60, 30}, {1.0, 2.0, 1.0}, {0.1, 0.1, 0.1}}.validate()), Error);
  EXPECT_THROW((ParameterTimeline{{30}, {1.0, 2.0, 1.0}, {0.1, 0.1, 0.1}}.validate()), Error);
  EXPECT_THROW((ParameterTimeline{{}, {-1.0}, {0.1}}.validate()), Error);
}

TEST(TrackerConfig, Validation) {
  TrackerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.a_max = 0.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(RunTracker, ConstantTimelineReachesBatchOptimum) {
  const auto in = tcbm::testing::worked_instance();
  const auto partition = build_partition(0, 0);
  TrackerConfig config;
  config.horizon = 100;
  const auto trace = run_tracker(in.scenario, in.workload, in.qos, in.stages, partition,
                                 ParameterTimeline::constant(1.0, 1.0), config);
  ASSERT_EQ(trace.samples.size(), 100u);
  const auto batch = solve_tcbm(in.scenario, in.workload, in.qos, in.stages, partition);
  EXPECT_NEAR(trace.samples.back().energy, batch.energy(), 0.01 * batch.energy());
  EXPECT_TRUE(trace.samples.back().feasible);
}

TEST(RunTracker, K0StepLeavesRatesUnchanged) {
  const auto profile = tracking_profile("fig46b");
  const auto& preset = scenario_preset(profile.preset);
  const auto search = optimize_rounds(preset.scenario, {preset.m0, profile.timeline.dirty_rates[0]}, preset.qos, {},
                                      fixed_q(1));
  ASSERT_TRUE(search.ok());
  TrackerConfig config;
  config.horizon = kProfileHorizon;
  const auto trace = run_tracker(preset.scenario, {preset.m0, profile.timeline.dirty_rates[0]}, preset.qos, {},
                                 search.report.partition, profile.timeline, config);
  const auto& before = trace.samples[29];
  const auto& high = trace.samples[59];
  const auto& after = trace.samples[89];
  ASSERT_EQ(before.reduced_rates.size(), high.reduced_rates.size());
  for (std::size_t k = 0; k < before.reduced_rates.size(); ++k) {
    EXPECT_NEAR(high.reduced_rates[k], before.reduced_rates[k], 1e-3 * before.reduced_rates[k]);
    EXPECT_NEAR(after.reduced_rates[k], before.reduced_rates[k], 1e-3 * before.reduced_rates[k]);
  }
  const double e_setup = preset.scenario.e_setup;
  EXPECT_NEAR((high.energy - e_setup) / (before.energy - e_setup), 10.0, 0.01);
}
