#include "ils/tangent.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ils {

double block_norm(const RingVector& v, std::size_t i) {
  return std::sqrt(v.x[i] * v.x[i] + v.y[i] * v.y[i] + v.z[i] * v.z[i]);
}

double TangentState::stored_norm() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    acc += xi.x[i] * xi.x[i] + xi.y[i] * xi.y[i] + xi.z[i] * xi.z[i];
  }
  return std::sqrt(acc);
}

double TangentState::log_full_norm() const { return log_accum + std::log(stored_norm()); }

TangentState init_homogeneous(std::size_t n_osc, std::uint64_t seed, double t0) {
  if (n_osc < 1) throw std::invalid_argument("tangent needs at least one oscillator");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double v[3];
  double len = 0.0;
  do {
    for (double& c : v) c = normal(engine);
    len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  } while (len == 0.0);

  // Block norm 1/sqrt(N) so that the full vector has unit norm.
  const double scale = 1.0 / (len * std::sqrt(static_cast<double>(n_osc)));
  TangentState ts;
  ts.xi = RingVector(n_osc);
  for (std::size_t i = 0; i < n_osc; ++i) {
    ts.xi.x[i] = v[0] * scale;
    ts.xi.y[i] = v[1] * scale;
    ts.xi.z[i] = v[2] * scale;
  }
  ts.t0 = t0;
  ts.log_accum = 0.0;
  ts.initial_full_norm = ts.stored_norm();
  return ts;
}

void renormalize(TangentState& ts) {
  const double c = ts.stored_norm();
  if (!(c > 0.0)) throw std::domain_error("cannot renormalize a zero tangent vector");
  if (!std::isfinite(c)) throw std::domain_error("tangent vector norm is not finite");
  // Rescaling by a factor within rounding of one only adds rounding.
  if (std::abs(c - 1.0) <= 1e-13) return;
  const double inv = 1.0 / c;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    ts.xi.x[i] *= inv;
    ts.xi.y[i] *= inv;
    ts.xi.z[i] *= inv;
  }
  ts.log_accum += std::log(c);
}

std::vector<double> per_oscillator_log_norms(const TangentState& ts) {
  std::vector<double> out(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double nrm = block_norm(ts.xi, i);
    out[i] = nrm > 0.0 ? ts.log_accum + std::log(nrm) : -std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace ils
