#include "tcbm/config.hpp"

#include "tcbm/harness.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace tcbm {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
public:
  Reader(std::string_view origin, const std::string& key, const Entry& entry)
      : origin_(origin), key_(key), entry_(entry) {}

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << origin_ << ':' << entry_.line << ": " << key_ << ": " << what;
    throw Error(ErrorKind::Parse, os.str());
  }

  double number() const { return parse_double(entry_.value); }

  int integer() const {
    int v = 0;
    const std::string& s = entry_.value;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) fail("expected an integer, got '" + s + "'");
    return v;
  }

  std::uint64_t unsigned_integer() const {
    std::uint64_t v = 0;
    const std::string& s = entry_.value;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      fail("expected a non-negative integer, got '" + s + "'");
    }
    return v;
  }

  const std::string& text() const { return entry_.value; }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const auto& item : items()) out.push_back(parse_double(item));
    return out;
  }

  std::vector<int> integers() const {
    std::vector<int> out;
    for (const auto& item : items()) {
      int v = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || ptr != item.data() + item.size() || item.empty()) {
        fail("expected a list of integers, got '" + entry_.value + "'");
      }
      out.push_back(v);
    }
    return out;
  }

private:
  double parse_double(const std::string& s) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) fail("expected a number, got '" + s + "'");
    return v;
  }

  std::vector<std::string> items() const {
    std::vector<std::string> out;
    if (entry_.value.empty()) return out;
    std::stringstream ss(entry_.value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
  }

  std::string_view origin_;
  const std::string& key_;
  const Entry& entry_;
};

using Setter = std::function<void(RunConfig&, const Reader&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"scenario.name", [](RunConfig& c, const Reader& r) { c.scenario.name = r.text(); }},
      {"scenario.r_hat", [](RunConfig& c, const Reader& r) { c.scenario.r_hat = r.number(); }},
      {"scenario.e_setup", [](RunConfig& c, const Reader& r) { c.scenario.e_setup = r.number(); }},
      {"scenario.k0", [](RunConfig& c, const Reader& r) { c.scenario.power.k0 = r.number(); }},
      {"scenario.alpha", [](RunConfig& c, const Reader& r) { c.scenario.power.alpha = r.number(); }},
      {"workload.m0", [](RunConfig& c, const Reader& r) { c.workload.m0 = r.number(); }},
      {"workload.dirty_rate", [](RunConfig& c, const Reader& r) { c.workload.dirty_rate = r.number(); }},
      {"qos.delta_tm", [](RunConfig& c, const Reader& r) { c.qos.delta_tm = r.number(); }},
      {"qos.delta_dt", [](RunConfig& c, const Reader& r) { c.qos.delta_dt = r.number(); }},
      {"qos.beta", [](RunConfig& c, const Reader& r) { c.qos.beta = r.number(); }},
      {"qos.theta", [](RunConfig& c, const Reader& r) { c.qos.theta = r.integer(); }},
      {"stages.t_pm", [](RunConfig& c, const Reader& r) { c.stages.t_pm = r.number(); }},
      {"stages.t_re", [](RunConfig& c, const Reader& r) { c.stages.t_re = r.number(); }},
      {"stages.t_cm", [](RunConfig& c, const Reader& r) { c.stages.t_cm = r.number(); }},
      {"stages.t_at", [](RunConfig& c, const Reader& r) { c.stages.t_at = r.number(); }},
      {"partition.i_max", [](RunConfig& c, const Reader& r) { c.i_max = r.integer(); }},
      {"partition.q",
       [](RunConfig& c, const Reader& r) { c.q = r.text() == "full" ? 0 : r.integer(); }},
      {"solver.max_iterations", [](RunConfig& c, const Reader& r) { c.solver.max_iterations = r.integer(); }},
      {"solver.tolerance", [](RunConfig& c, const Reader& r) { c.solver.tolerance = r.number(); }},
      {"solver.step_init", [](RunConfig& c, const Reader& r) { c.solver.step_init = r.number(); }},
      {"solver.round_cap", [](RunConfig& c, const Reader& r) { c.solver.round_cap = r.integer(); }},
      {"oracle.grid_points", [](RunConfig& c, const Reader& r) { c.grid_points = r.integer(); }},
      {"oracle.refinements", [](RunConfig& c, const Reader& r) { c.refinements = r.integer(); }},
      {"xen.r_max", [](RunConfig& c, const Reader& r) { c.xen_r_max = r.number(); }},
      {"xen.rounds", [](RunConfig& c, const Reader& r) { c.xen_rounds = r.integers(); }},
      {"xen.measure",
       [](RunConfig& c, const Reader& r) {
         if (r.text() == "arithmetic") {
           c.xen_measure = SpeedupMeasure::ArithmeticMean;
         } else if (r.text() == "geometric") {
           c.xen_measure = SpeedupMeasure::GeometricMean;
         } else {
           r.fail("expected 'arithmetic' or 'geometric', got '" + r.text() + "'");
         }
       }},
      {"compare.dirty_ratio", [](RunConfig& c, const Reader& r) { c.compare_dirty_ratio = r.number(); }},
      {"sweep.dirty_ratio", [](RunConfig& c, const Reader& r) { c.sweep_dirty_ratio = r.number(); }},
      {"sweep.xen_rounds", [](RunConfig& c, const Reader& r) { c.sweep_xen_rounds = r.integer(); }},
      {"tracker.a_max", [](RunConfig& c, const Reader& r) { c.tracker.a_max = r.number(); }},
      {"tracker.horizon", [](RunConfig& c, const Reader& r) { c.tracker.horizon = r.integer(); }},
      {"tracker.settle_tolerance", [](RunConfig& c, const Reader& r) { c.tracker.settle_tolerance = r.number(); }},
      {"tracker.penalty", [](RunConfig& c, const Reader& r) { c.tracker.penalty = r.number(); }},
      {"tracker.profile", [](RunConfig& c, const Reader& r) { c.profile = r.text(); }},
      {"tracker.change_points", [](RunConfig& c, const Reader& r) { c.timeline.change_points = r.integers(); }},
      {"tracker.dirty_rates", [](RunConfig& c, const Reader& r) { c.timeline.dirty_rates = r.numbers(); }},
      {"tracker.k0s", [](RunConfig& c, const Reader& r) { c.timeline.k0s = r.numbers(); }},
      {"run.out", [](RunConfig& c, const Reader& r) { c.out_dir = r.text(); }},
      {"run.seed", [](RunConfig& c, const Reader& r) { c.seed = r.unsigned_integer(); }},
      {"run.jobs", [](RunConfig& c, const Reader& r) { c.jobs = r.integer(); }},
  };
  return table;
}

// Keys that must appear when no preset supplies them, in reporting order.
const char* const kRequiredWithoutPreset[] = {"workload.m0", "scenario.r_hat", "qos.delta_tm", "qos.delta_dt",
                                              "qos.beta"};

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
  return out;
}

}  // namespace

void RunConfig::validate() const {
  scenario.validate();
  workload.validate();
  qos.validate();
  stages.validate();
  solver.validate();
  tracker.validate();
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::InvalidArgument, what);
  };
  require(i_max >= -1, "partition.i_max must be >= 0 (or -1 to search)");
  require(q >= 0, "partition.q must be >= 1 or 'full'");
  require(grid_points >= 2, "oracle.grid_points must be >= 2");
  require(refinements >= 0, "oracle.refinements must be >= 0");
  require(xen_r_max >= 0.0, "xen.r_max must be >= 0");
  require(std::all_of(xen_rounds.begin(), xen_rounds.end(), [](int r) { return r >= 0; }), "xen.rounds must be >= 0");
  require(compare_dirty_ratio >= 0.0, "compare.dirty_ratio must be >= 0");
  require(sweep_dirty_ratio > 0.0, "sweep.dirty_ratio must be > 0");
  require(sweep_xen_rounds >= 0, "sweep.xen_rounds must be >= 0");
  require(jobs >= 1, "run.jobs must be >= 1");
  if (!profile.empty()) tracking_profile(profile);
  if (!timeline.dirty_rates.empty() || !timeline.k0s.empty() || !timeline.change_points.empty()) timeline.validate();
}

ParameterTimeline RunConfig::effective_timeline() const {
  if (!profile.empty()) return tracking_profile(profile).timeline;
  if (!timeline.dirty_rates.empty()) return timeline;
  return ParameterTimeline::constant(workload.dirty_rate, scenario.power.k0);
}

RunConfig preset_config(std::string_view preset) {
  const ScenarioPreset& p = scenario_preset(preset);
  RunConfig config;
  config.scenario = p.scenario;
  config.qos = p.qos;
  config.workload = {p.m0, p.dirty_profile[0]};
  return config;
}

RunConfig parse_config(std::string_view text, std::string_view origin, std::optional<std::string> base_preset) {
  std::map<std::string, Entry> entries;
  std::vector<std::string> order;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    std::ostringstream os;
    os << origin << ':' << line_no << ": " << what;
    throw Error(ErrorKind::Parse, os.str());
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value, got '" + line + "'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (section.empty()) fail("key '" + key + "' appears before any [section]");
    const std::string full = section + "." + key;
    if (full != "scenario.preset" && setters().count(full) == 0) fail("unknown key " + full);
    if (entries.count(full) != 0) fail("duplicate key " + full);
    entries[full] = Entry{trim(std::string_view(line).substr(eq + 1)), line_no};
    order.push_back(full);
  }

  std::optional<std::string> preset = std::move(base_preset);
  if (auto it = entries.find("scenario.preset"); it != entries.end()) {
    preset = it->second.value;
    line_no = it->second.line;
    try {
      scenario_preset(*preset);
    } catch (const Error& e) {
      fail(std::string("scenario.preset: ") + e.what());
    }
  }

  RunConfig config = preset ? preset_config(*preset) : RunConfig{};
  if (!preset) {
    for (const char* key : kRequiredWithoutPreset) {
      if (entries.count(key) == 0) {
        throw Error(ErrorKind::Parse, std::string(origin) + ": " + key + " required");
      }
    }
  }

  for (const auto& key : order) {
    if (key == "scenario.preset") continue;
    setters().at(key)(config, Reader(origin, key, entries.at(key)));
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path, std::optional<std::string> base_preset) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path, std::move(base_preset));
}

std::string render_config(const RunConfig& c) {
  std::ostringstream os;
  auto num = [](double v) { return format_number(v); };
  os << "[scenario]\n"
     << "name = " << c.scenario.name << '\n'
     << "r_hat = " << num(c.scenario.r_hat) << '\n'
     << "e_setup = " << num(c.scenario.e_setup) << '\n'
     << "k0 = " << num(c.scenario.power.k0) << '\n'
     << "alpha = " << num(c.scenario.power.alpha) << '\n'
     << "[workload]\n"
     << "m0 = " << num(c.workload.m0) << '\n'
     << "dirty_rate = " << num(c.workload.dirty_rate) << '\n'
     << "[qos]\n"
     << "delta_tm = " << num(c.qos.delta_tm) << '\n'
     << "delta_dt = " << num(c.qos.delta_dt) << '\n'
     << "beta = " << num(c.qos.beta) << '\n'
     << "theta = " << c.qos.theta << '\n'
     << "[stages]\n"
     << "t_pm = " << num(c.stages.t_pm) << '\n'
     << "t_re = " << num(c.stages.t_re) << '\n'
     << "t_cm = " << num(c.stages.t_cm) << '\n'
     << "t_at = " << num(c.stages.t_at) << '\n'
     << "[partition]\n"
     << "i_max = " << c.i_max << '\n'
     << "q = " << (c.q == 0 ? std::string("full") : std::to_string(c.q)) << '\n'
     << "[solver]\n"
     << "max_iterations = " << c.solver.max_iterations << '\n'
     << "tolerance = " << num(c.solver.tolerance) << '\n'
     << "step_init = " << num(c.solver.step_init) << '\n'
     << "round_cap = " << c.solver.round_cap << '\n'
     << "[oracle]\n"
     << "grid_points = " << c.grid_points << '\n'
     << "refinements = " << c.refinements << '\n'
     << "[xen]\n"
     << "r_max = " << num(c.xen_r_max) << '\n'
     << "rounds = " << join(c.xen_rounds) << '\n'
     << "measure = " << (c.xen_measure == SpeedupMeasure::ArithmeticMean ? "arithmetic" : "geometric") << '\n'
     << "[compare]\n"
     << "dirty_ratio = " << num(c.compare_dirty_ratio) << '\n'
     << "[sweep]\n"
     << "dirty_ratio = " << num(c.sweep_dirty_ratio) << '\n'
     << "xen_rounds = " << c.sweep_xen_rounds << '\n'
     << "[tracker]\n"
     << "a_max = " << num(c.tracker.a_max) << '\n'
     << "horizon = " << c.tracker.horizon << '\n'
     << "settle_tolerance = " << num(c.tracker.settle_tolerance) << '\n'
     << "penalty = " << num(c.tracker.penalty) << '\n'
     << "profile = " << c.profile << '\n'
     << "change_points = " << join(c.timeline.change_points) << '\n'
     << "dirty_rates = " << join(c.timeline.dirty_rates) << '\n'
     << "k0s = " << join(c.timeline.k0s) << '\n'
     << "[run]\n"
     << "out = " << c.out_dir << '\n'
     << "seed = " << c.seed << '\n'
     << "jobs = " << c.jobs << '\n';
  return os.str();
}

std::string render_config_comment(const RunConfig& config) {
  std::istringstream in(render_config(config));
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) out << "# " << line << '\n';
  return out.str();
}

std::string strip_config_comment(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) out << line.substr(2) << '\n';
  }
  return out.str();
}

}  // namespace tcbm
