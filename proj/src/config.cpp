#include "ils/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace ils {

namespace {

constexpr std::size_t kNoLine = 0;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_real(const std::string& v, std::size_t line, std::string_view key) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (!v.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError("key '" + std::string(key) + "': expected a real number, got '" + v + "'",
                      line);
  }
  return out;
}

std::uint64_t parse_uint(const std::string& v, std::size_t line, std::string_view key) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError(
        "key '" + std::string(key) + "': expected a non-negative integer, got '" + v + "'", line);
  }
  return out;
}

bool parse_bool(const std::string& v, std::size_t line, std::string_view key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + std::string(key) + "': expected true/false, got '" + v + "'", line);
}

std::string format_bool(bool b) { return b ? "true" : "false"; }

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += format_real(v[k]);
  }
  return out;
}

std::string_view to_string(Component c) {
  switch (c) {
    case Component::y:
      return "y";
    case Component::z:
      return "z";
    case Component::x:
      break;
  }
  return "x";
}

struct KeyHandler {
  std::function<void(RunConfig&, const std::string&, std::size_t)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Ordered so that to_config_text emits a stable, readable layout.
const std::vector<std::pair<std::string, KeyHandler>>& key_table() {
  using R = RunConfig;
  using S = const std::string&;
  static const std::vector<std::pair<std::string, KeyHandler>> table = {
      {"scenario",
       {[](R& c, S v, std::size_t l) {
          try {
            c.scenario = scenario_from_string(v);
          } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what(), l);
          }
        },
        [](const R& c) { return std::string(to_string(c.scenario)); }}},
      {"a", {[](R& c, S v, std::size_t l) { c.model.a = parse_real(v, l, "a"); },
             [](const R& c) { return format_real(c.model.a); }}},
      {"b", {[](R& c, S v, std::size_t l) { c.model.b = parse_real(v, l, "b"); },
             [](const R& c) { return format_real(c.model.b); }}},
      {"c", {[](R& c, S v, std::size_t l) { c.model.c = parse_real(v, l, "c"); },
             [](const R& c) { return format_real(c.model.c); }}},
      {"n", {[](R& c, S v, std::size_t l) { c.model.n_osc = parse_uint(v, l, "n"); },
             [](const R& c) { return std::to_string(c.model.n_osc); }}},
      {"p", {[](R& c, S v, std::size_t l) { c.model.p_radius = parse_uint(v, l, "p"); },
             [](const R& c) { return std::to_string(c.model.p_radius); }}},
      {"sigma", {[](R& c, S v, std::size_t l) { c.model.sigma = parse_real(v, l, "sigma"); },
                 [](const R& c) { return format_real(c.model.sigma); }}},
      {"dt", {[](R& c, S v, std::size_t l) { c.integration.dt = parse_real(v, l, "dt"); },
              [](const R& c) { return format_real(c.integration.dt); }}},
      {"scheme",
       {[](R& c, S v, std::size_t l) {
          try {
            c.integration.scheme = scheme_from_string(v);
          } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what(), l);
          }
        },
        [](const R& c) { return std::string(to_string(c.integration.scheme)); }}},
      {"dt_stochastic",
       {[](R& c, S v, std::size_t l) {
          c.integration.dt_stochastic = parse_real(v, l, "dt_stochastic");
        },
        [](const R& c) { return format_real(c.integration.dt_stochastic); }}},
      {"divergence_bound",
       {[](R& c, S v, std::size_t l) {
          c.integration.divergence_bound = parse_real(v, l, "divergence_bound");
        },
        [](const R& c) { return format_real(c.integration.divergence_bound); }}},
      {"transient", {[](R& c, S v, std::size_t l) { c.transient = parse_real(v, l, "transient"); },
                     [](const R& c) { return format_real(c.transient); }}},
      {"t0_after_transient",
       {[](R& c, S v, std::size_t l) {
          c.t0_after_transient = parse_bool(v, l, "t0_after_transient");
        },
        [](const R& c) { return format_bool(c.t0_after_transient); }}},
      {"horizon", {[](R& c, S v, std::size_t l) { c.horizon = parse_real(v, l, "horizon"); },
                   [](const R& c) { return format_real(c.horizon); }}},
      {"checkpoints",
       {[](R& c, S v, std::size_t l) {
          c.checkpoints.clear();
          std::stringstream ss(v);
          std::string item;
          while (std::getline(ss, item, ',')) {
            const auto t = trim(item);
            if (t.empty()) throw ConfigError("key 'checkpoints': empty list entry", l);
            c.checkpoints.push_back(parse_real(t, l, "checkpoints"));
          }
        },
        [](const R& c) { return format_list(c.checkpoints); }}},
      {"reference_horizon",
       {[](R& c, S v, std::size_t l) {
          c.reference_horizon = parse_real(v, l, "reference_horizon");
        },
        [](const R& c) { return format_real(c.reference_horizon); }}},
      {"renorm_interval",
       {[](R& c, S v, std::size_t l) { c.renorm_interval = parse_real(v, l, "renorm_interval"); },
        [](const R& c) { return format_real(c.renorm_interval); }}},
      {"noise",
       {[](R& c, S v, std::size_t l) {
          if (v == "none") {
            c.noise_mode = NoiseMode::none;
          } else if (v == "uniform") {
            c.noise_mode = NoiseMode::uniform;
          } else if (v == "localized") {
            c.noise_mode = NoiseMode::localized;
          } else {
            throw ConfigError("key 'noise': expected none, uniform or localized", l);
          }
        },
        [](const R& c) { return std::string(to_string(c.noise_mode)); }}},
      {"noise_d", {[](R& c, S v, std::size_t l) { c.noise_d = parse_real(v, l, "noise_d"); },
                   [](const R& c) { return format_real(c.noise_d); }}},
      {"noise_i1",
       {[](R& c, S v, std::size_t l) {
          if (v == "auto") {
            c.noise_i1.reset();
          } else {
            c.noise_i1 = parse_uint(v, l, "noise_i1");
          }
        },
        [](const R& c) { return c.noise_i1 ? std::to_string(*c.noise_i1) : std::string("auto"); }}},
      {"noise_i2",
       {[](R& c, S v, std::size_t l) {
          if (v == "auto") {
            c.noise_i2.reset();
          } else {
            c.noise_i2 = parse_uint(v, l, "noise_i2");
          }
        },
        [](const R& c) { return c.noise_i2 ? std::to_string(*c.noise_i2) : std::string("auto"); }}},
      {"noise_tn", {[](R& c, S v, std::size_t l) { c.noise_tn = parse_real(v, l, "noise_tn"); },
                    [](const R& c) { return format_real(c.noise_tn); }}},
      {"shared_component_noise",
       {[](R& c, S v, std::size_t l) {
          c.shared_component_noise = parse_bool(v, l, "shared_component_noise");
        },
        [](const R& c) { return format_bool(c.shared_component_noise); }}},
      {"noise_width",
       {[](R& c, S v, std::size_t l) { c.noise_width = parse_uint(v, l, "noise_width"); },
        [](const R& c) { return std::to_string(c.noise_width); }}},
      {"noise_realizations",
       {[](R& c, S v, std::size_t l) {
          c.noise_realizations = parse_uint(v, l, "noise_realizations");
        },
        [](const R& c) { return std::to_string(c.noise_realizations); }}},
      {"noise_run", {[](R& c, S v, std::size_t l) { c.noise_run = parse_real(v, l, "noise_run"); },
                     [](const R& c) { return format_real(c.noise_run); }}},
      {"persistence_horizon",
       {[](R& c, S v, std::size_t l) {
          c.persistence_horizon = parse_real(v, l, "persistence_horizon");
        },
        [](const R& c) { return format_real(c.persistence_horizon); }}},
      {"persistence_hold",
       {[](R& c, S v, std::size_t l) { c.persistence_hold = parse_real(v, l, "persistence_hold"); },
        [](const R& c) { return format_real(c.persistence_hold); }}},
      {"persistence_sample",
       {[](R& c, S v, std::size_t l) {
          c.persistence_sample = parse_real(v, l, "persistence_sample");
        },
        [](const R& c) { return format_real(c.persistence_sample); }}},
      {"persistence_threshold",
       {[](R& c, S v, std::size_t l) {
          if (v == "auto") {
            c.persistence_threshold.reset();
          } else {
            c.persistence_threshold = parse_real(v, l, "persistence_threshold");
          }
        },
        [](const R& c) {
          return c.persistence_threshold ? format_real(*c.persistence_threshold)
                                         : std::string("auto");
        }}},
      {"delta_stride",
       {[](R& c, S v, std::size_t l) { c.delta_stride = parse_real(v, l, "delta_stride"); },
        [](const R& c) { return format_real(c.delta_stride); }}},
      {"delta_component",
       {[](R& c, S v, std::size_t l) {
          if (v == "x") {
            c.delta_component = Component::x;
          } else if (v == "y") {
            c.delta_component = Component::y;
          } else if (v == "z") {
            c.delta_component = Component::z;
          } else {
            throw ConfigError("key 'delta_component': expected x, y or z", l);
          }
        },
        [](const R& c) { return std::string(to_string(c.delta_component)); }}},
      {"spacetime_stride",
       {[](R& c, S v, std::size_t l) { c.spacetime_stride = parse_real(v, l, "spacetime_stride"); },
        [](const R& c) { return format_real(c.spacetime_stride); }}},
      {"spacetime_duration",
       {[](R& c, S v, std::size_t l) {
          c.spacetime_duration = parse_real(v, l, "spacetime_duration");
        },
        [](const R& c) { return format_real(c.spacetime_duration); }}},
      {"boundary_snapshots",
       {[](R& c, S v, std::size_t l) {
          c.boundary_snapshots = parse_uint(v, l, "boundary_snapshots");
        },
        [](const R& c) { return std::to_string(c.boundary_snapshots); }}},
      {"boundary_snapshot_spacing",
       {[](R& c, S v, std::size_t l) {
          c.boundary_snapshot_spacing = parse_real(v, l, "boundary_snapshot_spacing");
        },
        [](const R& c) { return format_real(c.boundary_snapshot_spacing); }}},
      {"seed_state",
       {[](R& c, S v, std::size_t l) { c.seeds.init_state = parse_uint(v, l, "seed_state"); },
        [](const R& c) { return std::to_string(c.seeds.init_state); }}},
      {"seed_tangent",
       {[](R& c, S v, std::size_t l) { c.seeds.init_tangent = parse_uint(v, l, "seed_tangent"); },
        [](const R& c) { return std::to_string(c.seeds.init_tangent); }}},
      {"seed_noise",
       {[](R& c, S v, std::size_t l) { c.seeds.noise = parse_uint(v, l, "seed_noise"); },
        [](const R& c) { return std::to_string(c.seeds.noise); }}},
      {"ic_x_lo", {[](R& c, S v, std::size_t l) { c.box.x_lo = parse_real(v, l, "ic_x_lo"); },
                   [](const R& c) { return format_real(c.box.x_lo); }}},
      {"ic_x_hi", {[](R& c, S v, std::size_t l) { c.box.x_hi = parse_real(v, l, "ic_x_hi"); },
                   [](const R& c) { return format_real(c.box.x_hi); }}},
      {"ic_y_lo", {[](R& c, S v, std::size_t l) { c.box.y_lo = parse_real(v, l, "ic_y_lo"); },
                   [](const R& c) { return format_real(c.box.y_lo); }}},
      {"ic_y_hi", {[](R& c, S v, std::size_t l) { c.box.y_hi = parse_real(v, l, "ic_y_hi"); },
                   [](const R& c) { return format_real(c.box.y_hi); }}},
      {"ic_z_lo", {[](R& c, S v, std::size_t l) { c.box.z_lo = parse_real(v, l, "ic_z_lo"); },
                   [](const R& c) { return format_real(c.box.z_lo); }}},
      {"ic_z_hi", {[](R& c, S v, std::size_t l) { c.box.z_hi = parse_real(v, l, "ic_z_hi"); },
                   [](const R& c) { return format_real(c.box.z_hi); }}},
      {"output_dir", {[](R& c, S v, std::size_t) { c.output_dir = v; },
                      [](const R& c) { return c.output_dir; }}},
  };
  return table;
}

const KeyHandler* find_key(std::string_view key) {
  for (const auto& [k, h] : key_table()) {
    if (k == key) return &h;
  }
  return nullptr;
}

}  // namespace

ConfigError::ConfigError(const std::string& what, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::incoherence:
      return "incoherence";
    case ScenarioKind::sync:
      return "sync";
    case ScenarioKind::partial:
      return "partial";
    case ScenarioKind::uniform_noise:
      return "uniform_noise";
    case ScenarioKind::localized_noise:
      return "localized_noise";
    case ScenarioKind::phase_chimera:
      return "phase_chimera";
    case ScenarioKind::amplitude_chimera:
      return "amplitude_chimera";
    case ScenarioKind::custom:
      break;
  }
  return "custom";
}

ScenarioKind scenario_from_string(std::string_view s) {
  for (auto k : {ScenarioKind::incoherence, ScenarioKind::sync, ScenarioKind::partial,
                 ScenarioKind::uniform_noise, ScenarioKind::localized_noise,
                 ScenarioKind::phase_chimera, ScenarioKind::amplitude_chimera,
                 ScenarioKind::custom}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown scenario '" + std::string(s) + "'");
}

std::string_view to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::uniform:
      return "uniform";
    case NoiseMode::localized:
      return "localized";
    case NoiseMode::none:
      break;
  }
  return "none";
}

RunConfig preset(ScenarioKind kind) {
  RunConfig c;
  c.scenario = kind;
  c.model = ModelParams{0.2, 0.2, 4.5, 300, 100, 0.0};
  c.integration = IntegrationConfig{};
  c.transient = 5000.0;
  c.horizon = 10000.0;
  c.checkpoints = {1000.0, 2000.0, 5000.0, 10000.0};
  c.reference_horizon = 5000.0;
  c.output_dir = "out/" + std::string(to_string(kind));

  const std::vector<double> long_checkpoints = {1000.0,  2000.0,  5000.0,  10000.0,
                                                20000.0, 30000.0, 50000.0, 70000.0};
  switch (kind) {
    case ScenarioKind::incoherence:
      c.model.sigma = 0.0;
      c.reference_horizon = 10000.0;
      break;
    case ScenarioKind::sync:
      c.model.sigma = 2.0;
      c.reference_horizon = 10000.0;
      break;
    case ScenarioKind::partial:
      c.model.sigma = 0.05;
      c.horizon = 70000.0;
      c.checkpoints = long_checkpoints;
      c.seeds.init_state = 2;
      break;
    case ScenarioKind::uniform_noise:
      c.model.sigma = 0.05;
      c.horizon = 70000.0;
      c.checkpoints = long_checkpoints;
      c.seeds.init_state = 2;
      c.noise_mode = NoiseMode::uniform;
      c.noise_d = 1e-5;
      c.noise_run = 65000.0;
      c.integration.scheme = Scheme::rk4_additive_stochastic;
      c.integration.dt_stochastic = 0.01;
      break;
    case ScenarioKind::localized_noise:
      c.model.sigma = 0.05;
      c.horizon = 70000.0;
      c.checkpoints = long_checkpoints;
      c.seeds.init_state = 2;
      c.noise_mode = NoiseMode::localized;
      c.noise_d = 0.05;
      c.noise_tn = 0.1;
      c.noise_realizations = 10;
      c.integration.scheme = Scheme::euler_maruyama_stochastic;
      c.integration.dt_stochastic = 0.001;
      break;
    case ScenarioKind::phase_chimera:
      c.model.sigma = 0.044;
      c.seeds.init_state = 1;
      break;
    case ScenarioKind::amplitude_chimera:
      c.model.sigma = 0.04;
      c.seeds.init_state = 24;
      break;
    case ScenarioKind::custom:
      c.output_dir = "out";
      break;
  }
  return c;
}

void RunConfig::validate() const {
  try {
    model.validate();
    integration.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(transient >= 0.0)) throw ConfigError("transient must be >= 0");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
  if (checkpoints.empty()) throw ConfigError("checkpoints must not be empty");
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    if (!(checkpoints[k] > 0.0)) throw ConfigError("checkpoints must be > 0");
    if (k > 0 && !(checkpoints[k] > checkpoints[k - 1])) {
      throw ConfigError("checkpoints must be sorted ascending");
    }
    if (checkpoints[k] > horizon) throw ConfigError("checkpoints must be <= horizon");
  }
  if (!(reference_horizon > 0.0) || reference_horizon > horizon) {
    throw ConfigError("reference_horizon must lie in (0, horizon]");
  }
  if (!(renorm_interval > 0.0)) throw ConfigError("renorm_interval must be > 0");
  if (!(delta_stride > 0.0)) throw ConfigError("delta_stride must be > 0");
  if (!(spacetime_stride > 0.0)) throw ConfigError("spacetime_stride must be > 0");
  if (!(spacetime_duration >= 0.0)) throw ConfigError("spacetime_duration must be >= 0");
  if (!(boundary_snapshot_spacing > 0.0)) throw ConfigError("boundary_snapshot_spacing must be > 0");
  if (box.x_lo > box.x_hi || box.y_lo > box.y_hi || box.z_lo > box.z_hi) {
    throw ConfigError("initial-condition box bounds are inverted");
  }

  if (!(noise_d >= 0.0)) throw ConfigError("noise_d must be >= 0");
  const bool noisy = noise_mode != NoiseMode::none && noise_d > 0.0;
  if (noisy && !is_stochastic(integration.scheme)) {
    throw ConfigError("noise with intensity > 0 requires a stochastic scheme");
  }
  if (!noisy && is_stochastic(integration.scheme)) {
    throw ConfigError("runs without noise require scheme rk4_deterministic");
  }
  if (noise_mode == NoiseMode::uniform && noisy && !(noise_run > 0.0)) {
    throw ConfigError("uniform noise needs noise_run > 0");
  }
  if (noise_mode == NoiseMode::localized) {
    if (!(noise_tn >= 0.0)) throw ConfigError("noise_tn must be >= 0");
    if (noise_i1.has_value() != noise_i2.has_value()) {
      throw ConfigError("noise_i1 and noise_i2 must be given together");
    }
    if (noise_i1 && (*noise_i1 < 1 || *noise_i1 > *noise_i2 || *noise_i2 > model.n_osc)) {
      throw ConfigError("noise window must satisfy 1 <= i1 <= i2 <= N");
    }
    if (noise_width < 1 || noise_width > model.n_osc) {
      throw ConfigError("noise_width must lie in [1, N]");
    }
    if (noise_realizations < 1) throw ConfigError("noise_realizations must be >= 1");
    if (!(persistence_horizon > 0.0) || !(persistence_hold > 0.0) ||
        !(persistence_sample > 0.0)) {
      throw ConfigError("persistence durations must be > 0");
    }
  }
}

std::optional<NoiseSpec> RunConfig::noise_spec() const {
  if (noise_mode == NoiseMode::none) return std::nullopt;
  NoiseSpec s;
  if (noise_mode == NoiseMode::uniform) {
    s = NoiseSpec::uniform(noise_d, seeds.noise);
  } else {
    s = NoiseSpec::localized(noise_d, noise_i1.value_or(1), noise_i2.value_or(1), noise_tn,
                             seeds.noise);
  }
  s.shared_component_noise = shared_component_noise;
  return s;
}

RunConfig parse_config_text(std::string_view text) {
  struct Entry {
    std::string key, value;
    std::size_t line;
  };
  std::vector<Entry> entries;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    auto key = trim(std::string_view(line).substr(0, eq));
    auto value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key", line_no);
    if (value.empty()) throw ConfigError("missing value for key '" + key + "'", line_no);
    if (!find_key(key)) throw ConfigError("unknown key '" + key + "'", line_no);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line_no);
    entries.push_back({key, value, line_no});
  }

  RunConfig cfg = preset(ScenarioKind::custom);
  for (const auto& e : entries) {
    if (e.key == "scenario") {
      RunConfig probe;
      find_key("scenario")->set(probe, e.value, e.line);
      cfg = preset(probe.scenario);
    }
  }
  for (const auto& e : entries) {
    if (e.key != "scenario") find_key(e.key)->set(cfg, e.value, e.line);
  }

  // A horizon override without explicit checkpoints trims the preset list.
  if (seen.count("horizon") && !seen.count("checkpoints")) {
    std::erase_if(cfg.checkpoints, [&](double t) { return t > cfg.horizon; });
    if (cfg.checkpoints.empty() || cfg.checkpoints.back() < cfg.horizon) {
      cfg.checkpoints.push_back(cfg.horizon);
    }
  }
  if (seen.count("horizon") && !seen.count("reference_horizon") &&
      cfg.reference_horizon > cfg.horizon) {
    cfg.reference_horizon = cfg.horizon;
  }
  // Noise keys on a noise-free preset select the mode implicitly.
  if (cfg.noise_mode == NoiseMode::none && cfg.noise_d > 0.0 && !seen.count("noise")) {
    cfg.noise_mode = cfg.noise_i1 ? NoiseMode::localized : NoiseMode::uniform;
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file '" + file.string() + "'", kNoLine);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string to_config_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [key, h] : key_table()) {
    out += key;
    out += " = ";
    out += h.get(cfg);
    out += '\n';
  }
  return out;
}

}  // namespace ils
