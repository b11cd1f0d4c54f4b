#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ils/integrator.hpp"
#include "ils/tangent.hpp"

namespace ils {

/// Residual bound enforced on every profile at construction.
inline constexpr double kIdentityTolerance = 1e-9;

class IdentityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-oscillator finite-time growth rates (index of local sensitivity)
/// together with the full growth rate, the spatial range and the profile
/// rescaled by that range.
struct IlsProfile {
  double t0 = 0.0;
  double horizon = 0.0;
  std::vector<double> lambda_i;
  double lambda_full = 0.0;
  double r_ils = 0.0;
  std::vector<double> s_i;
  /// Relative residual of the exponential-mean identity.
  double identity_residual = 0.0;
  /// Oscillators whose projection decayed to exactly zero (lambda_i = -inf);
  /// they are left out of r_ils and s_i.
  std::size_t decayed = 0;

  std::size_t size() const noexcept { return lambda_i.size(); }
};

struct LeEstimate {
  double lambda_max = 0.0;
  double horizon_used = 0.0;
  /// (T, Lambda(t0, T)) at every checkpoint, T increasing.
  std::vector<std::pair<double, double>> convergence_series;
  /// Max |difference| between the last three checkpoint values.
  double stabilization = 0.0;
};

/// Advances a tangent (and whatever trajectory drives it) so that it spans
/// `horizon` time units since its t0.
using TangentAdvance = std::function<void(TangentState&, double horizon)>;

/// Lambda(t0, T) = (ln ||xi(t0+T)|| - ln ||xi(t0)||) / T.
double finite_time_growth(const TangentState& ts, double horizon);

/// Builds the profile and enforces the identity and the sandwich bound
/// max_i L_i - ln(N)/(2T) <= L <= max_i L_i; throws IdentityViolation.
/// Assumes a homogeneous initial perturbation (||xi_i(t0)|| = ||xi(t0)||/sqrt(N)).
IlsProfile ils_profile(const TangentState& ts, double horizon);

/// |e^{2 L T} - mean_i e^{2 L_i T}| / e^{2 L T}, evaluated in log space.
double identity_check(const IlsProfile& profile);

/// Lambda(t0, T) at each checkpoint of one continuing evolution.
LeEstimate max_le_estimate(TangentState& ts, std::span<const double> checkpoints,
                           const TangentAdvance& advance);

/// Profiles (with r_ils and s_i) at each checkpoint of one continuing
/// evolution sharing t0.
std::vector<IlsProfile> ils_range_series(TangentState& ts, std::span<const double> checkpoints,
                                         const TangentAdvance& advance);

/// Pearson correlation of two equally sized series (0 if either is constant).
double pearson(std::span<const double> a, std::span<const double> b);

/// Drives a tangent along a ring trajectory with joint RK4 steps and
/// renormalizes it every `renorm_interval` time units. Step counts are
/// measured from the tangent's t0, so the horizon maps onto an integer
/// number of steps.
class RingTangentEvolution {
 public:
  using Observer = std::function<void(const EnsembleState&)>;

  RingTangentEvolution(RingStepper& stepper, EnsembleState& state, double renorm_interval = 1.0);

  void advance(TangentState& ts, double horizon);
  TangentAdvance as_advance() {
    return [this](TangentState& ts, double h) { advance(ts, h); };
  }

  /// Called after every step.
  void set_observer(Observer obs) { observer_ = std::move(obs); }

  long long steps_done() const noexcept { return steps_done_; }
  /// Continue a run restored from a snapshot taken `steps` steps after t0.
  void resume_at(long long steps) noexcept { steps_done_ = steps; }

 private:
  RingStepper& stepper_;
  EnsembleState& state_;
  long long renorm_steps_;
  long long steps_done_ = 0;
  Observer observer_;
};

}  // namespace ils
