#include "tcbm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace tcbm {

void SolverOptions::validate() const {
  if (max_iterations <= 0) throw Error(ErrorKind::InvalidArgument, "solver.max_iterations must be > 0");
  if (!(tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "solver.tolerance must be > 0");
  if (!(step_init > 0.0)) throw Error(ErrorKind::InvalidArgument, "solver.step_init must be > 0");
  if (round_cap < 0) throw Error(ErrorKind::InvalidArgument, "solver.round_cap must be >= 0");
}

const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Converged: return "converged";
    case SolverStatus::Infeasible: return "infeasible";
    case SolverStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

SolverReport evaluate_schedule(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
                               const StageConstants& stages, const RatePartition& partition,
                               std::span<const double> reduced_rates) {
  SolverReport report;
  report.partition = partition;
  report.reduced_rates.assign(reduced_rates.begin(), reduced_rates.end());
  report.schedule = expand(partition, reduced_rates);
  report.outcome = simulate(report.schedule, workload, scenario, stages);
  const auto residuals =
      constraint_residuals(report.outcome, report.schedule, workload, scenario, qos, partition.updated_indices);
  report.max_residual = residuals.max_residual();
  report.feasible = residuals.feasible();
  return report;
}

namespace {

SolverReport infeasible_report(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
                               const StageConstants& stages, const RatePartition& partition, std::string why) {
  SolverReport report;
  report.partition = partition;
  report.status = SolverStatus::Infeasible;
  std::ostringstream os;
  os << why;
  if (const auto hint = min_feasible_rounds(workload, scenario, qos, stages)) {
    os << " (smallest feasible i_max: " << *hint << ")";
  } else {
    const auto reason = infeasibility_reason(workload, scenario, qos, stages);
    if (!reason.empty()) os << " (" << reason << ")";
  }
  report.message = os.str();
  return report;
}

SolverReport finish(const TcbmProblem& problem, const Eigen::VectorXd& x, SolverStatus status, int iterations) {
  std::vector<double> rates(static_cast<std::size_t>(x.size()));
  for (Eigen::Index k = 0; k < x.size(); ++k) rates[static_cast<std::size_t>(k)] = std::exp(x[k]);
  SolverReport report = evaluate_schedule(problem.scenario(), problem.workload(), problem.qos(), problem.stages(),
                                          problem.partition(), rates);
  report.iterations = iterations;
  report.status = status;
  return report;
}

// Closed form for w = 0: only round 0 carries data, so E = E_SETUP +
// k0 R0^(alpha-1) M0 and the only rate-dependent constraint is
// t_tm = fixed + M0 / R0 <= delta_tm when theta = 1.
SolverReport solve_zero_dirty_rate(const WirelessScenario& scenario, const Workload& workload,
                                   const QosConstraints& qos, const StageConstants& stages,
                                   const RatePartition& partition) {
  if (stages.fixed_downtime() / qos.delta_dt - 1.0 > kFeasibilityTol) {
    return infeasible_report(scenario, workload, qos, stages, partition, "downtime bound is below the fixed stages");
  }
  double lo = kRateFloorFraction * scenario.r_hat;
  if (qos.theta == 1) {
    const double budget = qos.delta_tm - stages.fixed_total();
    if (budget <= 0.0) {
      return infeasible_report(scenario, workload, qos, stages, partition, "total-time bound is below the fixed stages");
    }
    lo = std::max(lo, workload.m0 / budget);
  }
  if (lo / scenario.r_hat - 1.0 > kFeasibilityTol) {
    return infeasible_report(scenario, workload, qos, stages, partition, "memory cannot be copied within delta_tm");
  }
  lo = std::min(lo, scenario.r_hat);
  const double r0 = scenario.power.alpha >= 1.0 ? lo : scenario.r_hat;
  std::vector<double> rates(partition.updated_indices.size(), r0);
  SolverReport report = evaluate_schedule(scenario, workload, qos, stages, partition, rates);
  report.status = SolverStatus::Converged;
  report.message = "zero dirty rate: closed form";
  return report;
}

// Log-barrier Newton solver over the free coordinates of a TcbmProblem.
class BarrierSolver {
public:
  BarrierSolver(const TcbmProblem& problem, const SolverOptions& opts) : problem_(problem), opts_(opts) {
    const int n = problem.num_vars();
    for (int k = 0; k < n; ++k) {
      if (problem.upper()[k] - problem.lower()[k] > 1e-12) free_.push_back(k);
    }
  }

  std::optional<Eigen::VectorXd> strict_interior() const {
    Eigen::VectorXd start = inset(problem_.initial_point(), 1e-3);
    if (problem_.max_constraint(start) < 0.0) return start;

    // The constraints decrease in every rate, so points near the all-r_hat
    // corner are the best candidates.
    for (double eps : {1e-3, 1e-6, 1e-9}) {
      const Eigen::VectorXd corner = inset(problem_.upper_point(), eps);
      const double c_corner = problem_.max_constraint(corner);
      if (!(c_corner < 0.0)) continue;
      // {s : c(start + s (corner - start)) <= target} is an interval that
      // contains s = 1 but not s = 0.
      const double target = 0.5 * c_corner;
      double lo = 0.0;
      double hi = 1.0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (problem_.max_constraint(start + mid * (corner - start)) <= target) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return Eigen::VectorXd(start + hi * (corner - start));
    }
    return std::nullopt;
  }

  SolverReport run(Eigen::VectorXd x) {
    const std::size_t m_constraints = problem_.constraints().size();
    const double m = static_cast<double>(m_constraints + 2 * free_.size());
    const double gap_target = 0.1 * opts_.tolerance;
    double t = 1.0;
    int iterations = 0;
    bool converged = false;

    while (true) {
      bool centered = false;
      while (iterations < opts_.max_iterations) {
        ++iterations;
        Eigen::VectorXd grad;
        Eigen::MatrixXd hess;
        derivatives(x, t, grad, hess);
        if (free_.empty()) {
          centered = true;
          break;
        }
        const Eigen::VectorXd step = newton_step(grad, hess);
        const double decrement_sq = -grad.dot(step);
        // Below this the barrier value no longer resolves the decrease at large t.
        if (decrement_sq < 1e-8) {
          centered = true;
          break;
        }
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(x.size());
        for (std::size_t f = 0; f < free_.size(); ++f) dir[free_[f]] = step[static_cast<Eigen::Index>(f)];
        const double longest = dir.cwiseAbs().maxCoeff();
        if (longest > opts_.step_init) dir *= opts_.step_init / longest;

        const double phi0 = barrier_value(x, t);
        const double slope = decrement_sq * std::min(1.0, opts_.step_init / longest);
        double s = 1.0;
        bool moved = false;
        while (s > 1e-14) {
          const Eigen::VectorXd trial = x + s * dir;
          if (trial == x) break;
          const double phi = barrier_value(trial, t);
          if (std::isfinite(phi) && phi < phi0 && phi <= phi0 - 0.25 * s * slope) {
            x = trial;
            moved = true;
            break;
          }
          s *= 0.5;
        }
        if (!moved) {
          centered = true;  // no further decrease at machine precision
          break;
        }
      }
      if (!centered) break;
      if (m / t < gap_target) {
        converged = true;
        break;
      }
      t *= 10.0;
    }

    SolverReport report = finish(problem_, x, converged ? SolverStatus::Converged : SolverStatus::IterationLimit,
                                 iterations);
    std::vector<double> lambdas(m_constraints);
    for (std::size_t k = 0; k < m_constraints; ++k) lambdas[k] = 1.0 / (t * -problem_.constraint_value(k, x));
    refine_multipliers(x, lambdas);
    for (std::size_t k = 0; k < m_constraints; ++k) {
      if (problem_.constraints()[k].kind == TcbmProblem::Constraint::Kind::TotalTime) {
        report.total_time_multiplier = lambdas[k];
      } else {
        report.downtime_multiplier = lambdas[k];
      }
    }
    if (converged && report.max_residual > opts_.tolerance) report.status = SolverStatus::IterationLimit;
    return report;
  }

private:
  // Least-squares multipliers for the near-active constraints from the
  // stationarity equations on coordinates away from their bounds.
  void refine_multipliers(const Eigen::VectorXd& x, std::vector<double>& lambdas) const {
    std::vector<int> interior;
    for (int k : free_) {
      const double margin = 1e-6 * (problem_.upper()[k] - problem_.lower()[k]);
      if (x[k] - problem_.lower()[k] > margin && problem_.upper()[k] - x[k] > margin) interior.push_back(k);
    }
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      if (problem_.constraint_value(k, x) > -1e-6) active.push_back(k);
    }
    if (interior.empty()) return;

    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    std::vector<Eigen::VectorXd> normals;
    for (std::size_t k : active) {
      problem_.constraints()[k].time.log_derivatives(x, g, h);
      normals.push_back(g);
    }
    problem_.rate_energy().log_derivatives(x, g, h);

    while (!active.empty() && active.size() <= interior.size()) {
      const auto rows = static_cast<Eigen::Index>(interior.size());
      const auto cols = static_cast<Eigen::Index>(active.size());
      Eigen::MatrixXd a(rows, cols);
      Eigen::VectorXd b(rows);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const int k = interior[static_cast<std::size_t>(r)];
        b[r] = -g[k];
        for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = normals[static_cast<std::size_t>(c)][k];
      }
      const Eigen::VectorXd fit = a.colPivHouseholderQr().solve(b);
      if (!fit.allFinite()) return;
      Eigen::Index worst = 0;
      if (fit.minCoeff(&worst) >= 0.0) {
        for (std::size_t k = 0; k < lambdas.size(); ++k) lambdas[k] = 0.0;
        for (Eigen::Index c = 0; c < cols; ++c) lambdas[active[static_cast<std::size_t>(c)]] = fit[c];
        return;
      }
      active.erase(active.begin() + worst);
      normals.erase(normals.begin() + worst);
    }
    if (active.empty()) std::fill(lambdas.begin(), lambdas.end(), 0.0);
  }

  Eigen::VectorXd inset(Eigen::VectorXd x, double eps) const {
    for (int k : free_) {
      const double width = problem_.upper()[k] - problem_.lower()[k];
      const double margin = std::min(eps, 0.25 * width);
      x[k] = std::clamp(x[k], problem_.lower()[k] + margin, problem_.upper()[k] - margin);
    }
    for (int k = 0; k < problem_.num_vars(); ++k) {
      if (std::find(free_.begin(), free_.end(), k) == free_.end()) x[k] = problem_.upper()[k];
    }
    return x;
  }

  double barrier_value(const Eigen::VectorXd& x, double t) const {
    double phi = t * problem_.objective(x);
    for (std::size_t k = 0; k < problem_.constraints().size(); ++k) {
      const double c = problem_.constraint_value(k, x);
      if (!(c < 0.0)) return std::numeric_limits<double>::infinity();
      phi -= std::log(-c);
    }
    for (int k : free_) {
      const double a = x[k] - problem_.lower()[k];
      const double b = problem_.upper()[k] - x[k];
      if (!(a > 0.0) || !(b > 0.0)) return std::numeric_limits<double>::infinity();
      phi -= std::log(a) + std::log(b);
    }
    return phi;
  }

  // Gradient and Hessian of the barrier function restricted to free_.
  void derivatives(const Eigen::VectorXd& x, double t, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    problem_.rate_energy().log_derivatives(x, g, h);
    Eigen::VectorXd full_grad = t * g;
    Eigen::MatrixXd full_hess = t * h;
    for (std::size_t k = 0; k < problem_.constraints().size(); ++k) {
      const auto& c = problem_.constraints()[k];
      c.time.log_derivatives(x, g, h);
      const double slack = -(c.time.log_value(x) - std::log(c.limit));
      full_grad += g / slack;
      full_hess += h / slack + g * g.transpose() / (slack * slack);
    }
    const auto nf = static_cast<Eigen::Index>(free_.size());
    grad.resize(nf);
    hess.resize(nf, nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      const int ka = free_[static_cast<std::size_t>(a)];
      const double da = x[ka] - problem_.lower()[ka];
      const double ua = problem_.upper()[ka] - x[ka];
      grad[a] = full_grad[ka] - 1.0 / da + 1.0 / ua;
      for (Eigen::Index b = 0; b < nf; ++b) hess(a, b) = full_hess(ka, free_[static_cast<std::size_t>(b)]);
      hess(a, a) += 1.0 / (da * da) + 1.0 / (ua * ua);
    }
  }

  static Eigen::VectorXd newton_step(const Eigen::VectorXd& grad, const Eigen::MatrixXd& hess) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || grad.dot(step) >= 0.0) {
      const double shift = 1e-8 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
      Eigen::MatrixXd damped = hess;
      damped.diagonal().array() += shift;
      step = damped.ldlt().solve(-grad);
      if (!step.allFinite() || grad.dot(step) >= 0.0) step = -grad;
    }
    return step;
  }

  const TcbmProblem& problem_;
  SolverOptions opts_;
  std::vector<int> free_;
};

}  // namespace

SolverReport solve_problem(const TcbmProblem& problem, const SolverOptions& opts) {
  opts.validate();
  const auto& partition = problem.partition();
  if (problem.workload().dirty_rate == 0.0) {
    return solve_zero_dirty_rate(problem.scenario(), problem.workload(), problem.qos(), problem.stages(), partition);
  }
  if (problem.box_empty()) {
    return infeasible_report(problem.scenario(), problem.workload(), problem.qos(), problem.stages(), partition,
                             "speed-up lower bound exceeds the rate cap");
  }

  BarrierSolver solver(problem, opts);
  if (auto x0 = solver.strict_interior()) return solver.run(*x0);

  // No strictly feasible point: the all-r_hat corner is the only candidate.
  const Eigen::VectorXd corner = problem.upper_point();
  SolverReport report = finish(problem, corner, SolverStatus::Converged, 0);
  if (report.feasible) {
    report.message = "feasible set reduces to the all-r_hat schedule";
    return report;
  }
  return infeasible_report(problem.scenario(), problem.workload(), problem.qos(), problem.stages(), partition,
                           "no schedule meets the time constraints for this partition");
}

SolverReport solve_tcbm(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
                        const StageConstants& stages, const RatePartition& partition, const SolverOptions& opts) {
  const TcbmProblem problem(scenario, workload, qos, stages, partition);
  return solve_problem(problem, opts);
}

QRule fixed_q(int q) {
  if (q < 1) throw Error(ErrorKind::InvalidArgument, "q must be >= 1");
  return [q](int i_max) { return std::min(q, i_max); };
}

QRule full_q() {
  return [](int i_max) { return i_max; };
}

RoundSearchResult optimize_rounds(const WirelessScenario& scenario, const Workload& workload,
                                  const QosConstraints& qos, const StageConstants& stages, const QRule& q_rule,
                                  const SolverOptions& opts) {
  opts.validate();
  RoundSearchResult result;
  const auto first = min_feasible_rounds(workload, scenario, qos, stages, opts.round_cap);
  if (!first) {
    result.report = infeasible_report(scenario, workload, qos, stages, build_partition(0, 0),
                                      "no feasible round count up to the cap");
    return result;
  }
  for (int i_max = *first; i_max <= opts.round_cap; ++i_max) {
    const RatePartition partition = build_partition(i_max, q_rule(i_max));
    SolverReport report = solve_tcbm(scenario, workload, qos, stages, partition, opts);
    if (!report.ok() || !report.feasible) continue;
    result.candidates.emplace_back(i_max, report.energy());
    if (!result.ok() || report.energy() < result.report.energy() * (1.0 - opts.tolerance)) {
      result.best_i_max = i_max;
      result.report = std::move(report);
    }
  }
  if (!result.ok()) {
    result.report = infeasible_report(scenario, workload, qos, stages, build_partition(0, 0),
                                      "solver found no feasible schedule in the round range");
  }
  return result;
}

}  // namespace tcbm
