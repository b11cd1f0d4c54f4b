#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ils/lyapunov.hpp"
#include "ils/model.hpp"

namespace ils {

enum class Component { x, y, z };

/// Time-averaged squared discrete curvature of one component's spatial
/// profile, <(2u_i - u_{i+1} - u_{i-1})^2>, averaged over samples.
struct IncoherenceProfile {
  std::vector<double> delta_i;
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t sample_stride = 1;
  std::size_t samples = 0;
};

/// Streaming form of incoherence_profile: feed one spatial profile at a
/// time, read the average at the end.
class IncoherenceAccumulator {
 public:
  explicit IncoherenceAccumulator(std::size_t n_osc, std::size_t sample_stride = 1);

  void add(std::span<const double> profile, double t);
  void add(const EnsembleState& state, Component comp = Component::x);

  std::size_t samples() const noexcept { return count_; }
  /// Throws std::domain_error when no sample was added.
  IncoherenceProfile result() const;

 private:
  std::vector<double> sum_;
  std::size_t stride_;
  std::size_t count_ = 0;
  double t_first_ = 0.0;
  double t_last_ = 0.0;
};

/// Averages every stored sample whose time lies in [t_start, t_end].
/// Throws std::domain_error when the window holds no sample.
IncoherenceProfile incoherence_profile(std::span<const EnsembleState> samples, double t_start,
                                       double t_end, Component comp = Component::x,
                                       std::size_t sample_stride = 1);

/// Default jump threshold: 5 x median of |x_{i+1} - x_i| with an absolute
/// floor of 1e-8 so that a synchronized ring reports no boundary.
double default_jump_threshold(std::span<const double> x);

/// Cluster boundaries of the x-profile. Increments |x_{i+1} - x_i| above the
/// threshold that sit next to each other on the ring form one boundary; the
/// boundary is reported as the 1-based index i of its largest increment
/// (the discontinuity lies between i and i+1). Sorted ascending.
std::vector<std::size_t> detect_boundaries(const EnsembleState& snapshot,
                                           std::optional<double> jump_threshold = std::nullopt);
std::vector<std::size_t> detect_boundaries(std::span<const double> x,
                                           std::optional<double> jump_threshold = std::nullopt);

enum class RegionLabel { I, II };
std::string_view to_string(RegionLabel label);

/// Contiguous circular index interval [lo, hi], 1-based; lo > hi wraps
/// through N.
struct RegionSpec {
  RegionLabel label = RegionLabel::I;
  std::size_t lo = 1;
  std::size_t hi = 1;
  std::size_t n_osc = 1;

  std::size_t length() const;
  bool contains(std::size_t i) const;
  /// Index halfway along the interval.
  std::size_t center() const;
  /// `width` oscillators centered on `center_index`, clipped to the ring.
  static RegionSpec window(RegionLabel label, std::size_t center_index, std::size_t width,
                           std::size_t n_osc);
};

struct Regions {
  /// Low-sensitivity region: lambda_i < Lambda around a cluster boundary.
  std::optional<RegionSpec> low;
  /// High-sensitivity region: lambda_i > lambda_max around the ILS maximum.
  std::optional<RegionSpec> high;
  /// Boundary inside region I (the anchor for localized noise there).
  std::optional<std::size_t> low_anchor;
  /// argmax lambda_i (1-based).
  std::size_t high_anchor = 0;

  bool has_low() const { return low.has_value(); }
  bool has_high() const { return high.has_value(); }
};

/// Region II is the maximal run of lambda_i > lambda_max containing argmax
/// lambda_i. Region I is the maximal run of lambda_i < Lambda, outside region
/// II, containing a detected boundary; among several candidates the one
/// holding the lowest lambda_i wins. Equalities are excluded from both.
Regions extract_regions(const IlsProfile& profile, double lambda_max,
                        std::span<const std::size_t> boundaries);

/// Maximal circular runs of delta_i > threshold holding at least min_width
/// oscillators. Coherent clusters have delta_i near zero.
std::vector<RegionSpec> incoherent_clusters(std::span<const double> delta_i, double threshold,
                                            std::size_t min_width = 3);

/// Default threshold for incoherent_clusters: 1% of max delta_i.
double default_incoherence_threshold(std::span<const double> delta_i);

/// Samples of two runs taken at identical times on the noise clock.
struct PairedTrajectory {
  std::vector<double> times;
  std::vector<EnsembleState> reference;
  std::vector<EnsembleState> perturbed;
};

struct PersistenceResult {
  double decay_time = 0.0;
  bool decayed = true;
};

/// Time at which the maximum over `region` of the per-oscillator Euclidean
/// state distance between the two runs drops to <= threshold and stays there
/// for `hold` time units. Without such a time the horizon (last sample time)
/// is returned with decayed = false.
PersistenceResult perturbation_persistence(const PairedTrajectory& runs, const RegionSpec& region,
                                           double threshold, double hold = 60.0);

/// Same rule applied to a precomputed distance series.
PersistenceResult persistence_from_distances(std::span<const double> times,
                                             std::span<const double> distances, double threshold,
                                             double hold = 60.0);

/// Max over region of the per-oscillator state distance at one sample.
double region_distance(const EnsembleState& a, const EnsembleState& b, const RegionSpec& region);

}  // namespace ils
