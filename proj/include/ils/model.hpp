#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ils {

/// Thrown when a state component leaves the finite / bounded range.
/// `index` is the 1-based oscillator index, `step` the integration step
/// (or -1 when not raised from inside an integration loop).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t index, long long step, double value);

  std::size_t index() const noexcept { return index_; }
  long long step() const noexcept { return step_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t index_;
  long long step_;
  double value_;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Structural and dynamical parameters of a ring of identical Roessler
/// oscillators with nonlocal diffusive coupling of radius P.
struct ModelParams {
  double a = 0.2;
  double b = 0.2;
  double c = 4.5;
  std::size_t n_osc = 300;
  std::size_t p_radius = 100;
  double sigma = 0.0;

  /// Throws std::invalid_argument naming the violated rule.
  void validate() const;

  /// sigma / (2P), the prefactor of the coupling sum.
  double coupling_gain() const { return sigma / (2.0 * static_cast<double>(p_radius)); }
};

/// Ring state (x_i, y_i, z_i) at time t. Internally 0-based; every external
/// interface (CSV, CLI, config) uses 1-based oscillator indices.
struct EnsembleState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> z;

  EnsembleState() = default;
  explicit EnsembleState(std::size_t n, double t0 = 0.0) : t(t0), x(n, 0.0), y(n, 0.0), z(n, 0.0) {}

  std::size_t size() const noexcept { return x.size(); }

  /// Throws DivergenceError on the first non-finite component.
  void require_finite() const;

  /// Cyclic shift: oscillator i moves to position (i + shift) mod N.
  EnsembleState rotated(std::ptrdiff_t shift) const;

  friend bool operator==(const EnsembleState&, const EnsembleState&) = default;
};

/// Same layout as EnsembleState without a time stamp; used for derivatives
/// and tangent vectors.
struct RingVector {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> z;

  RingVector() = default;
  explicit RingVector(std::size_t n) : x(n, 0.0), y(n, 0.0), z(n, 0.0) {}

  std::size_t size() const noexcept { return x.size(); }

  friend bool operator==(const RingVector&, const RingVector&) = default;
};

/// Noise intensity field D(i, t): D on the oscillator interval
/// [spatial_lo, spatial_hi] (1-based, inclusive) while 0 <= t <= t_end,
/// zero elsewhere. `unbounded` makes the field uniform in space and time.
struct NoiseSpec {
  double intensity = 0.0;
  std::size_t spatial_lo = 1;
  std::size_t spatial_hi = 1;
  double t_end = std::numeric_limits<double>::infinity();
  bool unbounded = false;
  std::uint64_t seed = 0;
  /// One Gaussian draw per oscillator shared by x, y and z instead of three
  /// independent draws.
  bool shared_component_noise = false;

  static NoiseSpec uniform(double intensity, std::uint64_t seed);
  static NoiseSpec localized(double intensity, std::size_t lo, std::size_t hi, double t_end,
                             std::uint64_t seed);

  void validate(std::size_t n_osc) const;

  /// True when the field is nonzero somewhere at noise-clock time t.
  bool active_at(double t) const;
};

/// Uncoupled Roessler field plus (sigma/2P) * sum_{k=i-P}^{i+P} (u_k - u_i)
/// on each component, evaluated with the literal per-oscillator sum so that
/// homogeneous states give exact zeros and ring rotations commute exactly.
RingVector vector_field(const EnsembleState& state, const ModelParams& params);

/// Df(state) * xi: per-oscillator Jacobian blocks
/// [[0,-1,-1],[1,a,0],[z_i,0,x_i-c]] plus the same diffusive coupling.
RingVector jacobian_apply(const EnsembleState& state, const ModelParams& params,
                          const RingVector& xi);

/// D(i, t) with 1-based i; t on the noise clock.
double noise_intensity_at(const NoiseSpec& spec, std::size_t i, double t);

/// Equilibrium of the uncoupled oscillator on the inner branch,
/// x* = (c - sqrt(c^2 - 4ab)) / 2, y* = -x*/a, z* = x*/a.
struct FixedPoint {
  double x, y, z;
};
FixedPoint rossler_fixed_point(double a, double b, double c);

}  // namespace ils
