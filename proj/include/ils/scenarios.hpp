#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ils/analysis.hpp"
#include "ils/config.hpp"
#include "ils/integrator.hpp"
#include "ils/lyapunov.hpp"
#include "ils/model.hpp"

namespace ils {

inline constexpr const char* kArtifactVersion = "1.0.0";

/// Uniform draws from the box, oscillator by oscillator (x, y, z each).
EnsembleState draw_initial_state(const ModelParams& params, const InitialBox& box,
                                 std::uint64_t seed);

/// Deterministic RK4 over `duration` (rounded to whole steps of cfg.dt).
/// The observer sees the state after every step.
void integrate(RingStepper& stepper, EnsembleState& state, double duration,
               const std::function<void(const EnsembleState&)>& observer = {});

/// Initial state plus transient; returns the state at t0.
EnsembleState prepare_start(const RunConfig& cfg);

/// Sampled x-profiles (t, x) used for spacetime output.
struct SpacetimeSample {
  double t = 0.0;
  std::vector<double> x;
};

struct TangentPhase {
  double t0 = 0.0;
  EnsembleState start;
  EnsembleState end;
  /// Sorted union of the checkpoints and the reference horizon.
  std::vector<double> horizons;
  std::vector<IlsProfile> profiles;
  LeEstimate le;
  std::size_t reference_index = 0;
  /// Boundaries of consecutive snapshots from t0 on; the first entry is the
  /// one used for regions.
  std::vector<std::vector<std::size_t>> boundary_history;
  /// Delta over the whole deterministic phase.
  std::optional<IncoherenceProfile> delta;
  std::vector<SpacetimeSample> spacetime;
  std::vector<std::string> warnings;

  const IlsProfile& reference() const { return profiles.at(reference_index); }
  const IlsProfile* at_horizon(double horizon) const;
  const std::vector<std::size_t>& boundaries() const { return boundary_history.front(); }
  bool boundaries_stable() const;
};

/// Homogeneous tangent from t0 to the horizon, profiles at every horizon,
/// lambda_max from the last one.
TangentPhase run_tangent_phase(const RunConfig& cfg, const EnsembleState& start);

/// Uniform noise from `start` for cfg.noise_run time units; Delta sampled
/// every cfg.delta_stride.
IncoherenceProfile run_uniform_noise(const RunConfig& cfg, const EnsembleState& start);

struct PersistenceRecord {
  std::string region;  // "I", "II", or "window" for an explicit i1..i2
  RegionSpec window;
  std::uint64_t seed = 0;
  PersistenceResult result;
  /// The perturbed run escaped to infinity (noise can push z below zero
  /// while x > c). Such realizations are kept out of the medians.
  bool diverged = false;
};

struct DifferenceField {
  std::string region;
  std::vector<SpacetimeSample> samples;  // |x_perturbed - x_reference|
};

struct LocalizedNoiseResult {
  double threshold = 0.0;
  std::vector<PersistenceRecord> records;
  std::vector<DifferenceField> fields;
  std::vector<std::string> warnings;

  /// Median decay time over the non-diverged realizations for one region;
  /// nullopt if there are none.
  std::optional<double> median_decay(const std::string& region) const;
};

/// Noise windows for the localized protocol: an explicit i1..i2 when
/// configured, otherwise noise_width oscillators centered on region I and
/// on region II.
std::vector<std::pair<std::string, RegionSpec>> localized_windows(const RunConfig& cfg,
                                                                   const Regions& regions,
                                                                   std::vector<std::string>* warnings);

/// Paired protocol from `start`: the reference run gets zero intensity, each
/// perturbed run gets D on one window during [0, Tn]; both use
/// dt_stochastic during the window and RK4 afterwards.
LocalizedNoiseResult run_localized_noise(const RunConfig& cfg, const EnsembleState& start,
                                         const Regions& regions);

struct ScenarioResult {
  RunConfig config;
  bool completed = false;
  std::string failure;
  double runtime_seconds = 0.0;
  std::vector<std::pair<std::string, std::size_t>> outputs;
  std::vector<std::string> log;

  std::optional<TangentPhase> tangent;
  Regions regions;
  std::optional<IncoherenceProfile> delta;
  std::optional<LocalizedNoiseResult> localized;
};

/// Full pipeline; writes every output into cfg.output_dir and a manifest.
/// Divergence is caught: partial outputs plus a manifest marked failed.
ScenarioResult run_scenario(const RunConfig& cfg);

/// Runs seeds [first, last] into output_dir/seed_<k> with up to `threads`
/// concurrent runs (0 = hardware concurrency).
std::vector<ScenarioResult> run_sweep(const RunConfig& cfg, std::uint64_t first, std::uint64_t last,
                                      unsigned threads = 0);

enum class RegimeTarget { two_cluster, chimera };

/// Growth rate above which a probe window counts as chaotic rather than
/// periodic.
inline constexpr double kChaosThreshold = 0.003;

struct RegimeProbe {
  std::uint64_t seed = 0;
  std::vector<std::size_t> boundaries;
  std::vector<RegionSpec> incoherent;
  double lambda_full = 0.0;
  bool matches = false;
};

/// Runs transient plus `window` time units for each seed and classifies the
/// Delta structure (and, for two_cluster, the boundary count and sign of the
/// growth rate).
RegimeProbe probe_regime(const RunConfig& cfg, std::uint64_t seed, RegimeTarget target,
                         double window);

}  // namespace ils
