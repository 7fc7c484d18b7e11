#ifndef TCBM_MODEL_HPP
#define TCBM_MODEL_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Forward model of pre-copy live migration over a wireless link.
//
// Units are fixed throughout the library: volumes in Mb, rates in Mb/s,
// times in s, energies in J, powers in W. Nothing in the core converts units.

namespace tcbm {

enum class ErrorKind { InvalidArgument, InvalidSchedule, Infeasible, Parse };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// Feasibility tolerance applied to every constraint residual.
inline constexpr double kFeasibilityTol = 1e-9;

/// Communication power drawn at migration rate R: k0 * R^alpha (W).
struct PowerModel {
  double k0 = 1.0;
  double alpha = 2.0;

  double power(double rate) const;
  void validate() const;
  bool operator==(const PowerModel&) const = default;
};

struct WirelessScenario {
  std::string name = "custom";
  double r_hat = 1.0;    // maximum migration bandwidth (Mb/s)
  double e_setup = 0.0;  // rate-independent connection energy (J)
  PowerModel power;

  void validate() const;
  bool operator==(const WirelessScenario&) const = default;
};

struct Workload {
  double m0 = 1.0;          // VM memory size (Mb)
  double dirty_rate = 0.0;  // mean memory dirty rate (Mb/s)

  void validate() const;
  bool operator==(const Workload&) const = default;
};

/// Fixed durations of the rate-independent migration stages (s).
struct StageConstants {
  double t_pm = 0.0;  // pre-migration
  double t_re = 0.0;  // reservation
  double t_cm = 0.0;  // commitment
  double t_at = 0.0;  // activation

  /// Every stage except iterative pre-copy and stop-and-copy.
  double fixed_total() const { return t_pm + t_re + t_cm + t_at; }
  /// Portion of the downtime that does not depend on the rates.
  double fixed_downtime() const { return t_cm + t_at; }
  void validate() const;
  bool operator==(const StageConstants&) const = default;
};

struct QosConstraints {
  double delta_tm = 1.0;  // max total migration time (s)
  double delta_dt = 1.0;  // max downtime (s)
  double beta = 2.0;      // required per-round volume speed-up
  int theta = 1;          // 1 enables the total-time and speed-up constraints

  void validate() const;
  bool operator==(const QosConstraints&) const = default;
};

/// Per-round migration rates R_0 ... R_{i_max+1}.
struct RateSchedule {
  int i_max = 0;
  std::vector<double> rates;

  static RateSchedule constant(int i_max, double rate);
  /// Throws InvalidSchedule when the length or any rate is wrong.
  void validate() const;
  bool operator==(const RateSchedule&) const = default;
};

struct MigrationOutcome {
  std::vector<double> volumes;      // V_0 ... V_{i_max+1}
  std::vector<double> round_times;  // T_0 ... T_{i_max+1}
  double t_ip = 0.0;                // iterative pre-copy
  double t_sc = 0.0;                // stop-and-copy
  double t_mmt = 0.0;               // memory migration = t_ip + t_sc
  double t_dt = 0.0;                // downtime
  double t_tm = 0.0;                // total migration
  double e_tot = 0.0;
  std::vector<double> per_round_energy;
};

/// Runs the dirty-volume recursion V_{i+1} = w * T_i with T_i = V_i / R_i.
MigrationOutcome simulate(const RateSchedule& schedule, const Workload& workload,
                          const WirelessScenario& scenario, const StageConstants& stages);

/// Constraint residuals; a constraint holds when its residual is <= 0.
struct ConstraintResiduals {
  double total_time = 0.0;             // theta * (t_tm / delta_tm - 1)
  double downtime = 0.0;               // t_dt / delta_dt - 1
  std::vector<int> speedup_indices;    // rounds carrying a speed-up constraint
  std::vector<double> speedup;         // theta * (beta * w / R_i - 1)
  std::vector<double> rate_cap;        // R_i / r_hat - 1, every round

  double max_residual() const;
  bool feasible(double tol = kFeasibilityTol) const { return max_residual() <= tol; }
};

/// `updated_indices` lists the rounds whose rates are free variables. The
/// speed-up constraint is applied to each of them except the final
/// stop-and-copy round.
ConstraintResiduals constraint_residuals(const MigrationOutcome& outcome, const RateSchedule& schedule,
                                         const Workload& workload, const WirelessScenario& scenario,
                                         const QosConstraints& qos, std::span<const int> updated_indices);

/// Smallest number of pre-copy rounds for which some schedule is feasible,
/// or nullopt. The all-r_hat schedule minimizes both downtime and memory
/// migration time at a fixed round count, so it decides feasibility.
std::optional<int> min_feasible_rounds(const Workload& workload, const WirelessScenario& scenario,
                                       const QosConstraints& qos, const StageConstants& stages,
                                       int hard_cap = 64);

/// Human-readable cause when min_feasible_rounds finds nothing.
std::string infeasibility_reason(const Workload& workload, const WirelessScenario& scenario,
                                 const QosConstraints& qos, const StageConstants& stages, int hard_cap = 64);

}  // namespace tcbm

#endif
