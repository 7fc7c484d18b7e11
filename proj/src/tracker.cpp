#include "tcbm/tracker.hpp"

#include <algorithm>
#include <cmath>

namespace tcbm {

void TrackerConfig::validate() const {
  if (!(a_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "tracker.a_max must be > 0");
  if (horizon < 1) throw Error(ErrorKind::InvalidArgument, "tracker.horizon must be >= 1");
  if (!(settle_tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "tracker.settle_tolerance must be > 0");
  if (!(penalty > 0.0)) throw Error(ErrorKind::InvalidArgument, "tracker.penalty must be > 0");
}

TrackerState initial_tracker_state(const TcbmProblem& problem) {
  TrackerState state;
  state.log_rates = problem.initial_point();
  return state;
}

Eigen::VectorXd clip_step(const Eigen::VectorXd& step, double a_max) {
  return step.cwiseMax(-a_max).cwiseMin(a_max);
}

namespace {

bool instance_infeasible(const TcbmProblem& problem) {
  if (problem.box_empty()) return true;
  return problem.max_constraint(problem.upper_point()) > std::log1p(kFeasibilityTol);
}

double multiplier_of(const TrackerState& state, TcbmProblem::Constraint::Kind kind) {
  return kind == TcbmProblem::Constraint::Kind::TotalTime ? state.total_time_multiplier : state.downtime_multiplier;
}

// ln P(x) + sum_k (max(0, lambda_k + rho c_k)^2 - lambda_k^2) / (2 rho)
double augmented_lagrangian(const TcbmProblem& problem, const TrackerState& state, double rho,
                            const Eigen::VectorXd& x) {
  double value = problem.objective(x);
  for (std::size_t k = 0; k < problem.constraints().size(); ++k) {
    const double lambda = multiplier_of(state, problem.constraints()[k].kind);
    const double mu = std::max(0.0, lambda + rho * problem.constraint_value(k, x));
    value += (mu * mu - lambda * lambda) / (2.0 * rho);
  }
  return value;
}

double& multiplier_for(TrackerState& state, TcbmProblem::Constraint::Kind kind) {
  return kind == TcbmProblem::Constraint::Kind::TotalTime ? state.total_time_multiplier : state.downtime_multiplier;
}

}  // namespace

TrackerState tracker_step(const TcbmProblem& problem, const TrackerState& state, const TrackerConfig& config,
                          StepInfo* info) {
  const int n = problem.num_vars();
  const Eigen::VectorXd& x = state.log_rates;
  const double rho = config.penalty;
  TrackerState next = state;

  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  problem.rate_energy().log_derivatives(x, grad, hess);
  for (std::size_t k = 0; k < problem.constraints().size(); ++k) {
    const auto& constraint = problem.constraints()[k];
    const double lambda = multiplier_for(next, constraint.kind);
    const double mu = std::max(0.0, lambda + rho * problem.constraint_value(k, x));
    if (mu == 0.0) continue;
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    constraint.time.log_derivatives(x, g, h);
    grad += mu * g;
    hess += mu * h + rho * g * g.transpose();
  }

  // An empty speed-up box cannot be honoured; only the rate cap is enforced then.
  const bool empty_box = problem.box_empty();
  auto lower_bound = [&](int j) {
    const double hi = problem.upper()[j];
    return empty_box ? std::log(kRateFloorFraction * problem.scenario().r_hat) : std::min(problem.lower()[j], hi);
  };
  auto project = [&](Eigen::VectorXd y) {
    for (int j = 0; j < n; ++j) y[j] = std::clamp(y[j], lower_bound(j), problem.upper()[j]);
    return y;
  };

  // Coordinates held at a bound the gradient pushes against do not move.
  std::vector<int> free;
  for (int j = 0; j < n; ++j) {
    const double hi = problem.upper()[j];
    const double lo = lower_bound(j);
    const bool collapsed = hi - lo < 1e-12;
    const bool at_lo = x[j] <= lo + 1e-12 && grad[j] > 0.0;
    const bool at_hi = x[j] >= hi - 1e-12 && grad[j] < 0.0;
    if (!collapsed && !at_lo && !at_hi) free.push_back(j);
  }

  Eigen::VectorXd direction = Eigen::VectorXd::Zero(n);
  if (!free.empty()) {
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::VectorXd g_free(nf);
    Eigen::MatrixXd h_free(nf, nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      g_free[a] = grad[free[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < nf; ++b) {
        h_free(a, b) = hess(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
      }
    }
    h_free.diagonal().array() += 1e-9 * (1.0 + h_free.diagonal().cwiseAbs().maxCoeff());
    Eigen::VectorXd d = h_free.ldlt().solve(-g_free);
    if (!d.allFinite() || g_free.dot(d) > 0.0) d = -g_free;
    for (Eigen::Index a = 0; a < nf; ++a) direction[free[static_cast<std::size_t>(a)]] = d[a];
  }

  // Backtrack along the clipped direction until the augmented Lagrangian
  // (multipliers fixed) does not increase.
  const Eigen::VectorXd applied = clip_step(direction, config.a_max);
  const double merit0 = augmented_lagrangian(problem, state, rho, x);
  next.log_rates = project(x + applied);
  for (int halving = 0; halving < 30; ++halving) {
    const Eigen::VectorXd trial = project(x + std::ldexp(1.0, -halving) * applied);
    if (augmented_lagrangian(problem, state, rho, trial) <= merit0) {
      next.log_rates = trial;
      break;
    }
    if (halving == 29) next.log_rates = x;
  }

  const bool infeasible = instance_infeasible(problem);
  if (!infeasible) {
    for (std::size_t k = 0; k < problem.constraints().size(); ++k) {
      double& lambda = multiplier_for(next, problem.constraints()[k].kind);
      lambda = std::max(0.0, lambda + rho * problem.constraint_value(k, next.log_rates));
    }
  }
  if (info != nullptr) {
    info->instance_infeasible = infeasible;
    info->applied_step = (next.log_rates - x).cwiseAbs().maxCoeff();
  }
  return next;
}

std::size_t ParameterTimeline::segment_at(int n) const {
  std::size_t seg = 0;
  while (seg < change_points.size() && n >= change_points[seg]) ++seg;
  return seg;
}

std::pair<int, int> ParameterTimeline::segment_range(std::size_t segment, int horizon) const {
  const int begin = segment == 0 ? 0 : change_points.at(segment - 1);
  const int end = segment < change_points.size() ? change_points[segment] : horizon;
  return {std::min(begin, horizon), std::min(end, horizon)};
}

void ParameterTimeline::validate() const {
  if (dirty_rates.empty() || dirty_rates.size() != k0s.size() || change_points.size() + 1 != dirty_rates.size()) {
    throw Error(ErrorKind::InvalidArgument, "timeline needs one dirty rate and one k0 per segment");
  }
  for (std::size_t i = 0; i < change_points.size(); ++i) {
    if (change_points[i] <= 0 || (i > 0 && change_points[i] <= change_points[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "timeline change points must be positive and ascending");
    }
  }
  for (std::size_t i = 0; i < dirty_rates.size(); ++i) {
    if (!(dirty_rates[i] > 0.0) || !(k0s[i] > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "timeline values must be positive");
    }
  }
}

ParameterTimeline ParameterTimeline::constant(double dirty_rate, double k0) {
  return ParameterTimeline{{}, {dirty_rate}, {k0}};
}

TrackerTrace run_tracker(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
                         const StageConstants& stages, const RatePartition& partition,
                         const ParameterTimeline& timeline, const TrackerConfig& config) {
  config.validate();
  timeline.validate();

  auto problem_for = [&](std::size_t seg) {
    WirelessScenario sc = scenario;
    sc.power.k0 = timeline.k0s[seg];
    Workload wl = workload;
    wl.dirty_rate = timeline.dirty_rates[seg];
    return TcbmProblem(sc, wl, qos, stages, partition);
  };

  TrackerTrace trace;
  std::size_t seg = 0;
  TcbmProblem problem = problem_for(seg);
  TrackerState state = initial_tracker_state(problem);
  for (int n = 0; n < config.horizon; ++n) {
    const std::size_t now = timeline.segment_at(n);
    if (now != seg) {
      seg = now;
      problem = problem_for(seg);  // multipliers carry over
    }
    StepInfo info;
    state = tracker_step(problem, state, config, &info);

    const RateSchedule schedule = problem.schedule(state.log_rates);
    const MigrationOutcome outcome = simulate(schedule, problem.workload(), problem.scenario(), stages);
    const auto residuals =
        constraint_residuals(outcome, schedule, problem.workload(), problem.scenario(), qos, partition.updated_indices);

    TrackerSample sample;
    sample.n = n;
    sample.dirty_rate = timeline.dirty_rates[seg];
    sample.k0 = timeline.k0s[seg];
    sample.energy = outcome.e_tot;
    sample.feasible = residuals.feasible();
    sample.instance_infeasible = info.instance_infeasible;
    for (Eigen::Index k = 0; k < state.log_rates.size(); ++k) sample.reduced_rates.push_back(std::exp(state.log_rates[k]));
    trace.samples.push_back(std::move(sample));
  }
  return trace;
}

std::optional<int> settling_time(const TrackerTrace& trace, int begin, int end, double tolerance) {
  const auto& s = trace.samples;
  end = std::min<int>(end, static_cast<int>(s.size()));
  if (begin < 0 || end - begin < 2) throw Error(ErrorKind::InvalidArgument, "settling_time needs at least two samples");
  const double final_energy = s[static_cast<std::size_t>(end - 1)].energy;
  auto within = [&](int n) {
    return std::abs(s[static_cast<std::size_t>(n)].energy - final_energy) <= tolerance * std::abs(final_energy);
  };
  int first = end - 1;
  while (first > begin && within(first - 1)) --first;
  if (first == end - 1) return std::nullopt;
  return first - begin;
}

}  // namespace tcbm
