#include "tcbm/oracle.hpp"

#include "tcbm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

namespace tcbm {

namespace {

struct Axis {
  std::vector<double> rate;
  std::vector<double> inv_rate;
  std::vector<double> rate_pow;  // R^(alpha - 1)
  double lo = 0.0;
  double hi = 0.0;
};

Axis make_axis(double lo, double hi, int points, double alpha) {
  Axis axis;
  axis.lo = lo;
  axis.hi = hi;
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  for (int p = 0; p < points; ++p) {
    const double frac = points == 1 ? 1.0 : static_cast<double>(p) / (points - 1);
    const double r = p == points - 1 ? hi : std::exp(log_lo + frac * (log_hi - log_lo));
    axis.rate.push_back(r);
    axis.inv_rate.push_back(1.0 / r);
    axis.rate_pow.push_back(std::pow(r, alpha - 1.0));
  }
  return axis;
}

// Inserts `rate` keeping the axis ascending.
Axis with_point(Axis axis, double rate, double alpha) {
  const auto pos = std::lower_bound(axis.rate.begin(), axis.rate.end(), rate) - axis.rate.begin();
  axis.rate.insert(axis.rate.begin() + pos, rate);
  axis.inv_rate.insert(axis.inv_rate.begin() + pos, 1.0 / rate);
  axis.rate_pow.insert(axis.rate_pow.begin() + pos, std::pow(rate, alpha - 1.0));
  return axis;
}

// Points per axis in each refinement pass around the incumbent.
constexpr int kRefinePoints = 21;

struct Best {
  double energy = std::numeric_limits<double>::infinity();
  std::vector<double> rates;
  std::uint64_t evaluated = 0;
};

class GridSearch {
public:
  GridSearch(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
             const StageConstants& stages, const RatePartition& partition)
      : scenario_(scenario), workload_(workload), qos_(qos), stages_(stages), partition_(partition) {
    const int n = partition.num_reduced();
    profile_last_ = partition.updated_indices.back() == partition.i_max + 1 && n > 1;
    grid_vars_ = profile_last_ ? n - 1 : n;
    rounds_of_.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i <= partition.i_max + 1; ++i) ++rounds_of_[static_cast<std::size_t>(partition.reduced_index_of(i))];

    downtime_budget_ = qos.delta_dt - stages.fixed_downtime();
    time_budget_ = qos.theta == 1 ? qos.delta_tm - stages.fixed_total()
                                  : std::numeric_limits<double>::infinity();
    floor_ = kRateFloorFraction * scenario.r_hat;
  }

  int grid_vars() const { return grid_vars_; }

  std::pair<double, double> bounds(int var) const {
    const int round = partition_.updated_indices[static_cast<std::size_t>(var)];
    const bool speedup = qos_.theta == 1 && round != partition_.i_max + 1;
    const double lo = speedup ? std::max(qos_.beta * workload_.dirty_rate, floor_) : floor_;
    return {lo, scenario_.r_hat};
  }

  Best search(const std::vector<Axis>& axes,
              double incumbent = std::numeric_limits<double>::infinity()) const {
    const std::size_t first = axes.front().rate.size();
    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 16u));
    std::vector<std::future<Best>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        Best best;
        best.energy = incumbent;
        std::vector<double> current(static_cast<std::size_t>(partition_.num_reduced()));
        for (std::size_t p = w; p < first; p += workers) {
          current[0] = axes[0].rate[p];
          descend(axes, 0, p, workload_.m0, 0.0, 0.0, current, best);
        }
        return best;
      }));
    }
    Best best;
    for (auto& job : jobs) {
      Best part = job.get();
      best.evaluated += part.evaluated;
      if (part.energy < best.energy) {
        best.energy = part.energy;
        best.rates = std::move(part.rates);
      }
    }
    return best;
  }

private:
  // Applies grid point `p` of variable `var` to all rounds it governs, then
  // recurses. `volume` is the data pending at the first of those rounds.
  void descend(const std::vector<Axis>& axes, int var, std::size_t p, double volume, double energy, double t_ip,
               std::vector<double>& current, Best& best) const {
    const Axis& axis = axes[static_cast<std::size_t>(var)];
    const int count = rounds_of_[static_cast<std::size_t>(var)];
    const bool last_var = var == partition_.num_reduced() - 1;
    const double w = workload_.dirty_rate;
    const double k0 = scenario_.power.k0;
    for (int r = 0; r < count; ++r) {
      const double time = volume * axis.inv_rate[p];
      energy += k0 * axis.rate_pow[p] * volume;
      if (last_var && r == count - 1) {
        // final stop-and-copy round of a constant schedule
        ++best.evaluated;
        if (time > downtime_budget_ || t_ip + time > time_budget_) return;
        record(energy, current, best);
        return;
      }
      t_ip += time;
      volume = w * time;
    }
    if (t_ip > time_budget_) return;

    const int next = var + 1;
    if (next < grid_vars_) {
      const Axis& next_axis = axes[static_cast<std::size_t>(next)];
      for (std::size_t q = 0; q < next_axis.rate.size(); ++q) {
        // Axes ascend, so for alpha >= 1 the next round's own energy only grows
        // along this loop; once it alone reaches the incumbent, stop.
        if (scenario_.power.alpha >= 1.0 && energy + k0 * next_axis.rate_pow[q] * volume >= best.energy) break;
        current[static_cast<std::size_t>(next)] = next_axis.rate[q];
        descend(axes, next, q, volume, energy, t_ip, current, best);
      }
      return;
    }

    // Profile the final rate.
    ++best.evaluated;
    const double allowed = std::min(downtime_budget_, time_budget_ - t_ip);
    if (!(allowed > 0.0) && volume > 0.0) return;
    double rate = volume > 0.0 ? std::max(volume / allowed, floor_) : floor_;
    if (rate > scenario_.r_hat * (1.0 + 1e-12)) return;
    rate = std::min(rate, scenario_.r_hat);
    if (scenario_.power.alpha < 1.0) rate = scenario_.r_hat;
    energy += k0 * std::pow(rate, scenario_.power.alpha - 1.0) * volume;
    current[static_cast<std::size_t>(next)] = rate;
    record(energy, current, best);
  }

  static void record(double energy, const std::vector<double>& current, Best& best) {
    if (energy < best.energy) {
      best.energy = energy;
      best.rates = current;
    }
  }

  const WirelessScenario& scenario_;
  const Workload& workload_;
  const QosConstraints& qos_;
  const StageConstants& stages_;
  const RatePartition& partition_;
  bool profile_last_ = false;
  int grid_vars_ = 0;
  std::vector<int> rounds_of_;
  double downtime_budget_ = 0.0;
  double time_budget_ = 0.0;
  double floor_ = 0.0;
};

}  // namespace

OracleResult brute_force_oracle(const WirelessScenario& scenario, const Workload& workload, const QosConstraints& qos,
                                const StageConstants& stages, const RatePartition& partition, int grid_points,
                                int refinements) {
  scenario.validate();
  workload.validate();
  qos.validate();
  stages.validate();
  if (grid_points < 2) throw Error(ErrorKind::InvalidArgument, "oracle needs at least 2 grid points per dimension");
  if (refinements < 0) throw Error(ErrorKind::InvalidArgument, "oracle refinements must be >= 0");

  GridSearch search(scenario, workload, qos, stages, partition);
  const double alpha = scenario.power.alpha;

  std::vector<Axis> axes;
  for (int v = 0; v < search.grid_vars(); ++v) {
    const auto [lo, hi] = search.bounds(v);
    if (lo / hi - 1.0 > kFeasibilityTol) throw Error(ErrorKind::Infeasible, "oracle: speed-up bound exceeds r_hat");
    axes.push_back(make_axis(std::min(lo, hi), hi, grid_points, alpha));
  }

  Best best = search.search(axes);
  std::uint64_t evaluated = best.evaluated;
  if (!std::isfinite(best.energy)) throw Error(ErrorKind::Infeasible, "oracle: no feasible grid point");

  for (int pass = 0; pass < refinements; ++pass) {
    std::vector<Axis> fine;
    for (int v = 0; v < search.grid_vars(); ++v) {
      const Axis& coarse = axes[static_cast<std::size_t>(v)];
      const double spacing =
          (std::log(coarse.hi) - std::log(coarse.lo)) / static_cast<double>(coarse.rate.size() - 1);
      const double centre = std::log(best.rates[static_cast<std::size_t>(v)]);
      const auto [box_lo, box_hi] = search.bounds(v);
      const double lo = std::max(std::log(std::min(box_lo, box_hi)), centre - 2.0 * spacing);
      const double hi = std::min(std::log(box_hi), centre + 2.0 * spacing);
      fine.push_back(with_point(make_axis(std::exp(lo), std::exp(hi), kRefinePoints, alpha),
                                best.rates[static_cast<std::size_t>(v)], alpha));
    }
    Best refined = search.search(fine, best.energy);
    evaluated += refined.evaluated;
    if (refined.energy < best.energy) best = std::move(refined);
    axes = std::move(fine);
  }

  OracleResult result;
  result.reduced_rates = best.rates;
  result.schedule = expand(partition, best.rates);
  result.energy = scenario.e_setup + best.energy;
  result.evaluated = evaluated;
  return result;
}

}  // namespace tcbm
