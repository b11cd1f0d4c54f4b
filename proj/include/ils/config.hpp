#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ils/analysis.hpp"
#include "ils/integrator.hpp"
#include "ils/model.hpp"

namespace ils {

enum class ScenarioKind {
  incoherence,
  sync,
  partial,
  uniform_noise,
  localized_noise,
  phase_chimera,
  amplitude_chimera,
  custom
};

std::string_view to_string(ScenarioKind k);
ScenarioKind scenario_from_string(std::string_view s);

enum class NoiseMode { none, uniform, localized };
std::string_view to_string(NoiseMode m);

struct Seeds {
  std::uint64_t init_state = 1;
  std::uint64_t init_tangent = 1;
  std::uint64_t noise = 1;

  friend bool operator==(const Seeds&, const Seeds&) = default;
};

/// Box from which initial conditions are drawn uniformly.
struct InitialBox {
  double x_lo = -4.0, x_hi = 4.0;
  double y_lo = -4.0, y_hi = 4.0;
  double z_lo = 0.0, z_hi = 2.0;

  friend bool operator==(const InitialBox&, const InitialBox&) = default;
};

struct RunConfig {
  ScenarioKind scenario = ScenarioKind::custom;
  ModelParams model;
  IntegrationConfig integration;

  NoiseMode noise_mode = NoiseMode::none;
  double noise_d = 0.0;
  /// Explicit localized window; when unset the windows are placed on the
  /// ILS regions I and II.
  std::optional<std::size_t> noise_i1;
  std::optional<std::size_t> noise_i2;
  double noise_tn = 0.1;
  bool shared_component_noise = false;
  std::size_t noise_width = 21;
  std::size_t noise_realizations = 1;
  /// Length of the uniform-noise run measured from t0.
  double noise_run = 0.0;
  double persistence_horizon = 1000.0;
  double persistence_hold = 60.0;
  double persistence_sample = 0.1;
  /// Absolute threshold; unset means 1% of the reference attractor's x range.
  std::optional<double> persistence_threshold;

  double transient = 5000.0;
  bool t0_after_transient = true;
  double horizon = 10000.0;
  std::vector<double> checkpoints;
  /// Horizon of the profile used for boundaries and regions.
  double reference_horizon = 5000.0;
  double renorm_interval = 1.0;

  double delta_stride = 0.1;
  Component delta_component = Component::x;
  double spacetime_stride = 1.0;
  double spacetime_duration = 0.0;
  std::size_t boundary_snapshots = 10;
  double boundary_snapshot_spacing = 1.0;

  Seeds seeds;
  InitialBox box;
  std::string output_dir = "out";

  /// Throws ConfigError naming the violated rule.
  void validate() const;

  /// Noise field for the run (nullopt without noise); localized windows
  /// derived from regions are filled in by the pipeline.
  std::optional<NoiseSpec> noise_spec() const;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Scenario defaults; every field explicit.
RunConfig preset(ScenarioKind kind);

/// Parses the `key = value` grammar (one pair per line, `#` comments).
/// The `scenario` preset is applied first, then the remaining keys in order.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::filesystem::path& file);

/// Emits every key, so parse_config_text(to_config_text(c)) reproduces c.
std::string to_config_text(const RunConfig& cfg);

/// Shortest decimal that round-trips to the same double.
std::string format_real(double v);

}  // namespace ils
