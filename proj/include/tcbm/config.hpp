#ifndef TCBM_CONFIG_HPP
#define TCBM_CONFIG_HPP

#include "tcbm/baselines.hpp"
#include "tcbm/model.hpp"
#include "tcbm/solver.hpp"
#include "tcbm/tracker.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// INI-style run configuration:
//
//   [scenario]  preset, name, r_hat, e_setup, k0, alpha
//   [workload]  m0, dirty_rate
//   [qos]       delta_tm, delta_dt, beta, theta
//   [stages]    t_pm, t_re, t_cm, t_at
//   [partition] i_max (-1 = search), q (integer or "full")
//   [solver]    max_iterations, tolerance, step_init, round_cap
//   [oracle]    grid_points, refinements
//   [xen]       r_max (0 = r_hat), rounds (comma list), measure (arithmetic|geometric)
//   [compare]   dirty_ratio (0 = use workload.dirty_rate)
//   [sweep]     dirty_ratio, xen_rounds
//   [tracker]   a_max, horizon, settle_tolerance, penalty, profile,
//               change_points, dirty_rates, k0s (comma lists)
//   [run]       out, seed, jobs
//
// '#' and ';' start comments. A preset fills scenario, qos and workload
// defaults; explicit keys override it regardless of their position.

namespace tcbm {

struct RunConfig {
  WirelessScenario scenario;
  Workload workload;
  QosConstraints qos;
  StageConstants stages;

  int i_max = -1;  // -1 searches the round count
  int q = 1;       // 0 means Q = i_max

  SolverOptions solver;

  int grid_points = 200;
  int refinements = 2;

  double xen_r_max = 0.0;
  std::vector<int> xen_rounds{6, 14, 25};
  SpeedupMeasure xen_measure = SpeedupMeasure::ArithmeticMean;

  double compare_dirty_ratio = 0.0;

  double sweep_dirty_ratio = 0.33;
  int sweep_xen_rounds = 6;

  TrackerConfig tracker;
  std::string profile;  // empty: constant timeline at the workload's w and k0
  ParameterTimeline timeline;

  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int jobs = 1;

  /// Checks every embedded type's invariants; throws Error.
  void validate() const;
  /// Timeline actually used by the tracker.
  ParameterTimeline effective_timeline() const;

  bool operator==(const RunConfig&) const = default;
};

/// Configuration a preset resolves to with no further keys.
RunConfig preset_config(std::string_view preset);

/// Parses INI text. `origin` prefixes error messages. When `base_preset` is
/// set it applies before any preset named in the text.
/// Errors name the offending section.key and line.
RunConfig parse_config(std::string_view text, std::string_view origin = "<config>",
                       std::optional<std::string> base_preset = std::nullopt);

RunConfig load_config(const std::string& path, std::optional<std::string> base_preset = std::nullopt);

/// Fully resolved INI text; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& config);

/// Resolved config with every line prefixed by "# ", for embedding in
/// outputs.
std::string render_config_comment(const RunConfig& config);

/// Recovers the INI text from a block produced by render_config_comment
/// (lines not starting with "# " are skipped).
std::string strip_config_comment(std::string_view text);

}  // namespace tcbm

#endif
