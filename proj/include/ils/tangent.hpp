#pragma once

#include <cstdint>
#include <vector>

#include "ils/model.hpp"

namespace ils {

/// Perturbation vector with growth-factor bookkeeping. The true perturbation
/// is exp(log_accum) * xi; every ILS formula reads it through that product.
struct TangentState {
  RingVector xi;
  double log_accum = 0.0;
  double t0 = 0.0;
  double initial_full_norm = 1.0;

  std::size_t size() const noexcept { return xi.size(); }

  /// Euclidean norm of the stored vector over all 3N components.
  double stored_norm() const;
  /// ln of the true full norm.
  double log_full_norm() const;
};

/// One isotropic random 3-vector replicated on every oscillator, scaled so
/// the full 3N vector has unit norm (each block has norm 1/sqrt(N)).
TangentState init_homogeneous(std::size_t n_osc, std::uint64_t seed, double t0 = 0.0);

/// Divides xi by its full norm c and adds ln c to log_accum.
/// Throws std::domain_error on a zero vector.
void renormalize(TangentState& ts);

/// ln of the true per-oscillator norms, log_accum + ln ||xi_i||. An
/// oscillator whose stored block is exactly zero yields -infinity.
std::vector<double> per_oscillator_log_norms(const TangentState& ts);

/// Euclidean norm of oscillator i's 3-component block (0-based).
double block_norm(const RingVector& v, std::size_t i);

}  // namespace ils
