#ifndef TCBM_HARNESS_HPP
#define TCBM_HARNESS_HPP

#include "tcbm/baselines.hpp"
#include "tcbm/model.hpp"
#include "tcbm/solver.hpp"
#include "tcbm/tracker.hpp"

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tcbm {

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Built-in wireless link with its tracking-experiment QoS defaults.
struct ScenarioPreset {
  std::string key;  // "3g", "4g", "wifi"
  WirelessScenario scenario;
  QosConstraints qos;
  double m0 = 256.0;
  /// Dirty rates of the three w-step segments (low, high, low).
  std::array<double, 3> dirty_profile{};
  /// k0 values of the three k0-step segments (low, high, low).
  std::array<double, 3> k0_profile{};
};

std::span<const ScenarioPreset> scenario_presets();
/// Case-insensitive lookup; throws InvalidArgument for unknown keys.
const ScenarioPreset& scenario_preset(std::string_view key);

/// Iterations at which the tracking profiles switch parameters.
inline constexpr std::array<int, 2> kProfileChangePoints{30, 60};
inline constexpr int kProfileHorizon = 90;

/// Named tracking experiment: "fig45a|b|c" step the dirty rate,
/// "fig46a|b|c" step k0 (a = 3G, b = 4G, c = WiFi).
struct TrackingProfile {
  std::string name;
  std::string preset;  // scenario preset key
  ParameterTimeline timeline;
};

std::vector<std::string> tracking_profile_names();
TrackingProfile tracking_profile(std::string_view name);

/// Application dirty-rate preset, as a fraction of the sweep's largest
/// dirty rate.
struct WorkloadPreset {
  std::string name;
  double fraction = 0.0;
};

/// bzip2, mcf, memcached at 0.25, 0.5, 0.9.
std::vector<WorkloadPreset> application_presets();

/// Largest dirty rate used by the application sweep, as a fraction of r_hat.
inline constexpr double kSweepDirtyRatio = 0.33;

/// Dirty-rate to cap ratio above which Xen comparisons are annotated.
inline constexpr double kComparableDirtyRatio = 0.33;

// ---------------------------------------------------------------------------
// Comparison protocol
// ---------------------------------------------------------------------------

/// 100 * (1 - e_star / e_ref); throws InvalidArgument when e_ref <= 0.
double savings(double e_star, double e_ref);

struct ComparisonSetup {
  WirelessScenario scenario;  // its r_hat is the cap given to BMOP and TCBM
  Workload workload;
  StageConstants stages;
  double r_max_xen = 0.0;      // 0 selects scenario.r_hat
  std::vector<int> xen_rounds;
  int q = 1;                   // 0 selects Q = i_max
  int theta = 1;
  SpeedupMeasure measure = SpeedupMeasure::ArithmeticMean;
  SolverOptions solver;
  int jobs = 1;
};

struct ComparisonRow {
  std::string scenario;
  int i_max_xen = 0;
  // Xen measurements, reused as the QoS limits of the optimized managers.
  double delta_dt = 0.0;
  double delta_tm = 0.0;
  double beta = 0.0;
  double e_xen = 0.0;
  std::optional<double> e_bmop;
  int i_max_bmop = -1;
  int q = 0;  // Q of the selected TCBM report
  std::optional<double> e_tcbm;
  int i_max_tcbm = -1;
  double tcbm_t_tm = 0.0;
  double tcbm_t_dt = 0.0;
  double dirty_ratio = 0.0;  // w / r_hat
  /// Set when the dirty ratio exceeds kComparableDirtyRatio or a manager
  /// failed; the row is still emitted.
  std::string note;

  std::optional<double> save_vs_xen() const;
  std::optional<double> save_vs_bmop() const;
};

/// Per Xen round count: run Xen, take its downtime, total time and measured
/// speed-up as the QoS limits, then run BMOP and TCBM with the round search.
/// Failures are recorded per row and the protocol continues.
std::vector<ComparisonRow> compare_protocol(const ComparisonSetup& setup);

// ---------------------------------------------------------------------------
// Application sweep
// ---------------------------------------------------------------------------

struct SweepSetup {
  WirelessScenario scenario;
  double m0 = 256.0;
  StageConstants stages;
  std::vector<WorkloadPreset> workloads = application_presets();
  double dirty_ratio = kSweepDirtyRatio;  // largest w = dirty_ratio * r_hat
  int xen_rounds = 6;
  SpeedupMeasure measure = SpeedupMeasure::ArithmeticMean;
  SolverOptions solver;
  int jobs = 1;
};

struct SweepRow {
  std::string workload;
  double dirty_rate = 0.0;
  ComparisonRow comparison;  // TCBM uses Q = i_max
};

std::vector<SweepRow> workload_sweep(const SweepSetup& setup);

struct SweepTable {
  std::string scenario;
  std::vector<SweepRow> rows;
};

// ---------------------------------------------------------------------------
// Emitters
// ---------------------------------------------------------------------------

/// Shortest decimal form that reads back to the same double.
std::string format_number(double value);

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);
void write_sweep_csv(std::ostream& out, std::span<const SweepTable> tables);
void write_trace_csv(std::ostream& out, const TrackerTrace& trace);
void write_schedule_csv(std::ostream& out, const SolverReport& report);

/// Parameters as rows, one column per Xen round count.
void write_comparison_markdown(std::ostream& out, std::span<const ComparisonRow> rows);
/// Savings vs Xen and vs BMOP per scenario and workload.
void write_savings_markdown(std::ostream& out, std::span<const SweepTable> tables);

}  // namespace tcbm

#endif
