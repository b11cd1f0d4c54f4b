#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "ils/model.hpp"
#include "ils/tangent.hpp"

namespace ils {

/// rk4_additive_stochastic advances the drift with RK4 and then adds the
/// same additive increments as Euler-Maruyama (strong order 1 for additive
/// noise, with a fourth-order drift).
enum class Scheme { rk4_deterministic, euler_maruyama_stochastic, rk4_additive_stochastic };

bool is_stochastic(Scheme s);

std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view s);

struct IntegrationConfig {
  double dt = 0.01;
  Scheme scheme = Scheme::rk4_deterministic;
  double divergence_bound = 1e6;
  /// Step used while a noise field is active.
  double dt_stochastic = 0.001;

  void validate() const;
};

/// S_i = sum_{k=i-P}^{i+P} u_k - (2P+1) u_i on a ring, O(N) via circular
/// prefix sums of u - u_0 (a homogeneous input yields exact zeros).
/// Requires 2P < N and out.size() == u.size().
void windowed_coupling_sums(std::span<const double> u, std::size_t p_radius, std::span<double> out);
std::vector<double> windowed_coupling_sums(std::span<const double> u, std::size_t p_radius);

/// Gaussian source for the stochastic scheme. Draw order inside one step is
/// oscillator-major, then component x, y, z; oscillators (or components)
/// with zero intensity consume no draws.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : engine_(seed) {}

  double next() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

/// Fixed-step integrator for the coupled ring. Holds scratch buffers, so one
/// stepper must not be shared between threads; copies are independent.
class RingStepper {
 public:
  RingStepper(const ModelParams& params, const IntegrationConfig& cfg);

  const ModelParams& params() const noexcept { return params_; }
  const IntegrationConfig& config() const noexcept { return cfg_; }
  long long steps_taken() const noexcept { return steps_; }

  /// Classical RK4 step of size cfg.dt. Requires the rk4 scheme.
  void step(EnsembleState& state);

  /// Joint RK4 step; the tangent is advanced with the Jacobian evaluated at
  /// the same four stage states as the nonlinear step.
  void step(EnsembleState& state, TangentState& tangent);
  void step(EnsembleState& state, RingVector& tangent);

  /// Stochastic step of size `dt`: drift (Euler, or RK4 for the additive
  /// variant) plus increments sqrt(2 D(i, noise_time) dt) * N(0,1).
  /// `noise_time` is on the noise clock (0 at noise onset). Requires a
  /// stochastic scheme.
  void step_stochastic(EnsembleState& state, const NoiseSpec& noise, NoiseStream& stream,
                       double noise_time, double dt);
  void step_stochastic(EnsembleState& state, const NoiseSpec& noise, NoiseStream& stream,
                       double noise_time) {
    step_stochastic(state, noise, stream, noise_time, cfg_.dt_stochastic);
  }

  /// Ring vector field computed with the windowed sums.
  void drift(const EnsembleState& state, RingVector& out);
  /// Df(state) * xi computed with the windowed sums.
  void tangent_drift(const EnsembleState& state, const RingVector& xi, RingVector& out);

  /// Test hooks.
  void set_drift_enabled(bool on) noexcept { drift_enabled_ = on; }
  void set_tangent_frozen(bool on) noexcept { tangent_frozen_ = on; }

  /// Runs with cfg.scheme swapped; keeps the step counter.
  void set_scheme(Scheme s) noexcept { cfg_.scheme = s; }

 private:
  void check_bounds(const EnsembleState& state) const;
  void rk4_drift_only(EnsembleState& state, double dt);
  void add_noise(EnsembleState& state, const NoiseSpec& noise, NoiseStream& stream,
                 double noise_time, double dt);
  void coupling_into(std::span<const double> u, std::span<double> out, double gain);

  ModelParams params_;
  IntegrationConfig cfg_;
  long long steps_ = 0;
  bool drift_enabled_ = true;
  bool tangent_frozen_ = false;

  std::vector<double> prefix_;
  std::vector<double> sums_;
  RingVector k1_, k2_, k3_, k4_;
  RingVector l1_, l2_, l3_, l4_;
  EnsembleState stage_;
  RingVector tstage_;
};

}  // namespace ils
