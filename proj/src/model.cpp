#include "ils/model.hpp"

#include <cmath>
#include <sstream>

namespace ils {

namespace {

std::string divergence_message(std::size_t index, long long step, double value) {
  std::ostringstream os;
  os << "state diverged at oscillator " << index;
  if (step >= 0) os << " (step " << step << ")";
  os << ": value " << value;
  return os.str();
}

// Literal coupling sum for oscillator i on one component.
double direct_coupling(const std::vector<double>& u, std::size_t i, std::size_t p) {
  const std::size_t n = u.size();
  double acc = 0.0;
  for (std::size_t k = 0; k <= 2 * p; ++k) {
    const std::size_t j = (i + n - p + k) % n;
    acc += u[j] - u[i];
  }
  return acc;
}

void require_same_size(const EnsembleState& s, const ModelParams& p) {
  if (s.size() != p.n_osc || s.y.size() != p.n_osc || s.z.size() != p.n_osc) {
    throw DimensionError("state has " + std::to_string(s.size()) + " oscillators, params expect " +
                         std::to_string(p.n_osc));
  }
}

}  // namespace

DivergenceError::DivergenceError(std::size_t index, long long step, double value)
    : std::runtime_error(divergence_message(index, step, value)),
      index_(index),
      step_(step),
      value_(value) {}

void ModelParams::validate() const {
  if (n_osc < 3) throw std::invalid_argument("N must be >= 3");
  if (p_radius < 1) throw std::invalid_argument("P must be >= 1");
  if (2 * p_radius >= n_osc) throw std::invalid_argument("2P must be < N");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be >= 0");
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw std::invalid_argument("a, b, c must be finite");
  }
}

void EnsembleState::require_finite() const {
  for (std::size_t i = 0; i < size(); ++i) {
    for (double v : {x[i], y[i], z[i]}) {
      if (!std::isfinite(v)) throw DivergenceError(i + 1, -1, v);
    }
  }
}

EnsembleState EnsembleState::rotated(std::ptrdiff_t shift) const {
  const auto n = static_cast<std::ptrdiff_t>(size());
  EnsembleState out(size(), t);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(((i + shift) % n + n) % n);
    out.x[j] = x[static_cast<std::size_t>(i)];
    out.y[j] = y[static_cast<std::size_t>(i)];
    out.z[j] = z[static_cast<std::size_t>(i)];
  }
  return out;
}

NoiseSpec NoiseSpec::uniform(double intensity, std::uint64_t seed) {
  NoiseSpec s;
  s.intensity = intensity;
  s.unbounded = true;
  s.seed = seed;
  return s;
}

NoiseSpec NoiseSpec::localized(double intensity, std::size_t lo, std::size_t hi, double t_end,
                               std::uint64_t seed) {
  NoiseSpec s;
  s.intensity = intensity;
  s.spatial_lo = lo;
  s.spatial_hi = hi;
  s.t_end = t_end;
  s.unbounded = false;
  s.seed = seed;
  return s;
}

void NoiseSpec::validate(std::size_t n_osc) const {
  if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
    throw std::invalid_argument("noise intensity must be >= 0");
  }
  if (unbounded) return;
  if (spatial_lo < 1 || spatial_lo > spatial_hi || spatial_hi > n_osc) {
    throw std::invalid_argument("noise interval must satisfy 1 <= i1 <= i2 <= N");
  }
  if (!(t_end >= 0.0)) throw std::invalid_argument("noise duration must be >= 0");
}

bool NoiseSpec::active_at(double t) const {
  if (intensity <= 0.0) return false;
  return unbounded || (t >= 0.0 && t <= t_end);
}

RingVector vector_field(const EnsembleState& state, const ModelParams& params) {
  require_same_size(state, params);
  state.require_finite();
  const std::size_t n = params.n_osc;
  const std::size_t p = params.p_radius;
  const double g = params.coupling_gain();
  RingVector d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = state.x[i], y = state.y[i], z = state.z[i];
    d.x[i] = -y - z + g * direct_coupling(state.x, i, p);
    d.y[i] = x + params.a * y + g * direct_coupling(state.y, i, p);
    d.z[i] = params.b + z * (x - params.c) + g * direct_coupling(state.z, i, p);
  }
  return d;
}

RingVector jacobian_apply(const EnsembleState& state, const ModelParams& params,
                          const RingVector& xi) {
  require_same_size(state, params);
  if (xi.size() != params.n_osc || xi.y.size() != params.n_osc || xi.z.size() != params.n_osc) {
    throw DimensionError("tangent has " + std::to_string(xi.size()) + " oscillators, state has " +
                         std::to_string(state.size()));
  }
  const std::size_t n = params.n_osc;
  const std::size_t p = params.p_radius;
  const double g = params.coupling_gain();
  RingVector d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = xi.x[i], v = xi.y[i], w = xi.z[i];
    d.x[i] = -v - w + g * direct_coupling(xi.x, i, p);
    d.y[i] = u + params.a * v + g * direct_coupling(xi.y, i, p);
    d.z[i] = state.z[i] * u + (state.x[i] - params.c) * w + g * direct_coupling(xi.z, i, p);
  }
  return d;
}

double noise_intensity_at(const NoiseSpec& spec, std::size_t i, double t) {
  if (spec.unbounded) return spec.intensity;
  if (i < spec.spatial_lo || i > spec.spatial_hi) return 0.0;
  if (t < 0.0 || t > spec.t_end) return 0.0;
  return spec.intensity;
}

FixedPoint rossler_fixed_point(double a, double b, double c) {
  const double x = (c - std::sqrt(c * c - 4.0 * a * b)) / 2.0;
  return {x, -x / a, x / a};
}

}  // namespace ils
