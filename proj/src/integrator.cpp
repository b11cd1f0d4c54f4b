#include "ils/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ils {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::rk4_deterministic:
      return "rk4_deterministic";
    case Scheme::euler_maruyama_stochastic:
      return "euler_maruyama_stochastic";
    case Scheme::rk4_additive_stochastic:
      return "rk4_additive_stochastic";
  }
  return "unknown";
}

Scheme scheme_from_string(std::string_view s) {
  if (s == "rk4_deterministic" || s == "rk4") return Scheme::rk4_deterministic;
  if (s == "euler_maruyama_stochastic" || s == "euler_maruyama") {
    return Scheme::euler_maruyama_stochastic;
  }
  if (s == "rk4_additive_stochastic" || s == "rk4_additive") return Scheme::rk4_additive_stochastic;
  throw std::invalid_argument("unknown scheme '" + std::string(s) + "'");
}

bool is_stochastic(Scheme s) { return s != Scheme::rk4_deterministic; }

void IntegrationConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
  if (!(dt_stochastic > 0.0) || !std::isfinite(dt_stochastic)) {
    throw std::invalid_argument("dt_stochastic must be > 0");
  }
  if (!(divergence_bound > 0.0)) throw std::invalid_argument("divergence_bound must be > 0");
}

namespace {

// Fills out[i] = S_i using `prefix` (size >= n + 2p + 1) as scratch.
void coupling_sums_impl(std::span<const double> u, std::size_t p, std::span<double> out,
                        std::vector<double>& prefix) {
  const std::size_t n = u.size();
  const std::size_t ext = n + 2 * p;
  prefix.resize(ext + 1);
  const double base = u[0];
  // Extended sequence e_j = u[(j - p) mod n] - u_0, j = 0 .. n + 2p - 1.
  prefix[0] = 0.0;
  std::size_t j = 0;
  for (std::size_t k = n - p; k < n; ++k, ++j) prefix[j + 1] = prefix[j] + (u[k] - base);
  for (std::size_t k = 0; k < n; ++k, ++j) prefix[j + 1] = prefix[j] + (u[k] - base);
  for (std::size_t k = 0; k < p; ++k, ++j) prefix[j + 1] = prefix[j] + (u[k] - base);

  const double width = static_cast<double>(2 * p + 1);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (prefix[i + 2 * p + 1] - prefix[i]) - width * (u[i] - base);
  }
}

}  // namespace

void windowed_coupling_sums(std::span<const double> u, std::size_t p_radius,
                            std::span<double> out) {
  if (out.size() != u.size()) throw DimensionError("coupling output size mismatch");
  if (u.empty()) return;
  if (2 * p_radius >= u.size()) throw std::invalid_argument("2P must be < N");
  std::vector<double> prefix;
  coupling_sums_impl(u, p_radius, out, prefix);
}

std::vector<double> windowed_coupling_sums(std::span<const double> u, std::size_t p_radius) {
  std::vector<double> out(u.size());
  windowed_coupling_sums(u, p_radius, out);
  return out;
}

RingStepper::RingStepper(const ModelParams& params, const IntegrationConfig& cfg)
    : params_(params), cfg_(cfg) {
  params_.validate();
  cfg_.validate();
  const std::size_t n = params_.n_osc;
  sums_.resize(n);
  for (RingVector* v : {&k1_, &k2_, &k3_, &k4_, &l1_, &l2_, &l3_, &l4_, &tstage_}) {
    *v = RingVector(n);
  }
  stage_ = EnsembleState(n);
}

void RingStepper::coupling_into(std::span<const double> u, std::span<double> out, double gain) {
  coupling_sums_impl(u, params_.p_radius, sums_, prefix_);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = gain * sums_[i];
}

void RingStepper::drift(const EnsembleState& s, RingVector& out) {
  const std::size_t n = params_.n_osc;
  if (s.size() != n) throw DimensionError("state size does not match the stepper");
  const double g = params_.coupling_gain();
  const double a = params_.a, b = params_.b, c = params_.c;
  if (!drift_enabled_) {
    std::fill(out.x.begin(), out.x.end(), 0.0);
    std::fill(out.y.begin(), out.y.end(), 0.0);
    std::fill(out.z.begin(), out.z.end(), 0.0);
    return;
  }
  coupling_into(s.x, out.x, g);
  for (std::size_t i = 0; i < n; ++i) out.x[i] += -s.y[i] - s.z[i];
  coupling_into(s.y, out.y, g);
  for (std::size_t i = 0; i < n; ++i) out.y[i] += s.x[i] + a * s.y[i];
  coupling_into(s.z, out.z, g);
  for (std::size_t i = 0; i < n; ++i) out.z[i] += b + s.z[i] * (s.x[i] - c);
}

void RingStepper::tangent_drift(const EnsembleState& s, const RingVector& xi, RingVector& out) {
  const std::size_t n = params_.n_osc;
  if (xi.size() != n) throw DimensionError("tangent size does not match the stepper");
  if (tangent_frozen_) {
    std::fill(out.x.begin(), out.x.end(), 0.0);
    std::fill(out.y.begin(), out.y.end(), 0.0);
    std::fill(out.z.begin(), out.z.end(), 0.0);
    return;
  }
  const double g = params_.coupling_gain();
  const double a = params_.a, c = params_.c;
  coupling_into(xi.x, out.x, g);
  for (std::size_t i = 0; i < n; ++i) out.x[i] += -xi.y[i] - xi.z[i];
  coupling_into(xi.y, out.y, g);
  for (std::size_t i = 0; i < n; ++i) out.y[i] += xi.x[i] + a * xi.y[i];
  coupling_into(xi.z, out.z, g);
  for (std::size_t i = 0; i < n; ++i) out.z[i] += s.z[i] * xi.x[i] + (s.x[i] - c) * xi.z[i];
}

namespace {

// dst = src + h * k, component-wise over the three arrays.
void axpy_into(const std::vector<double>& src, const std::vector<double>& k, double h,
               std::vector<double>& dst) {
  const std::size_t n = src.size();
  for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] + h * k[i];
}

void rk4_combine(std::vector<double>& u, const std::vector<double>& k1,
                 const std::vector<double>& k2, const std::vector<double>& k3,
                 const std::vector<double>& k4, double dt) {
  const double h6 = dt / 6.0;
  const std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i) u[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

void RingStepper::check_bounds(const EnsembleState& s) const {
  const double bound = cfg_.divergence_bound;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (double v : {s.x[i], s.y[i], s.z[i]}) {
      if (!(std::abs(v) <= bound)) throw DivergenceError(i + 1, steps_, v);
    }
  }
}

void RingStepper::rk4_drift_only(EnsembleState& s, double dt) {
  const double h = 0.5 * dt;
  stage_.t = s.t;

  drift(s, k1_);
  axpy_into(s.x, k1_.x, h, stage_.x);
  axpy_into(s.y, k1_.y, h, stage_.y);
  axpy_into(s.z, k1_.z, h, stage_.z);
  drift(stage_, k2_);
  axpy_into(s.x, k2_.x, h, stage_.x);
  axpy_into(s.y, k2_.y, h, stage_.y);
  axpy_into(s.z, k2_.z, h, stage_.z);
  drift(stage_, k3_);
  axpy_into(s.x, k3_.x, dt, stage_.x);
  axpy_into(s.y, k3_.y, dt, stage_.y);
  axpy_into(s.z, k3_.z, dt, stage_.z);
  drift(stage_, k4_);

  rk4_combine(s.x, k1_.x, k2_.x, k3_.x, k4_.x, dt);
  rk4_combine(s.y, k1_.y, k2_.y, k3_.y, k4_.y, dt);
  rk4_combine(s.z, k1_.z, k2_.z, k3_.z, k4_.z, dt);
}

void RingStepper::step(EnsembleState& s) {
  if (cfg_.scheme != Scheme::rk4_deterministic) {
    throw std::logic_error("deterministic step requested with a stochastic scheme");
  }
  rk4_drift_only(s, cfg_.dt);
  s.t += cfg_.dt;
  ++steps_;
  check_bounds(s);
}

void RingStepper::step(EnsembleState& s, RingVector& xi) {
  if (cfg_.scheme != Scheme::rk4_deterministic) {
    throw std::logic_error("deterministic step requested with a stochastic scheme");
  }
  if (xi.size() != s.size()) throw DimensionError("tangent and state sizes differ");
  const double dt = cfg_.dt;
  const double h = 0.5 * dt;

  drift(s, k1_);
  tangent_drift(s, xi, l1_);

  axpy_into(s.x, k1_.x, h, stage_.x);
  axpy_into(s.y, k1_.y, h, stage_.y);
  axpy_into(s.z, k1_.z, h, stage_.z);
  axpy_into(xi.x, l1_.x, h, tstage_.x);
  axpy_into(xi.y, l1_.y, h, tstage_.y);
  axpy_into(xi.z, l1_.z, h, tstage_.z);
  drift(stage_, k2_);
  tangent_drift(stage_, tstage_, l2_);

  axpy_into(s.x, k2_.x, h, stage_.x);
  axpy_into(s.y, k2_.y, h, stage_.y);
  axpy_into(s.z, k2_.z, h, stage_.z);
  axpy_into(xi.x, l2_.x, h, tstage_.x);
  axpy_into(xi.y, l2_.y, h, tstage_.y);
  axpy_into(xi.z, l2_.z, h, tstage_.z);
  drift(stage_, k3_);
  tangent_drift(stage_, tstage_, l3_);

  axpy_into(s.x, k3_.x, dt, stage_.x);
  axpy_into(s.y, k3_.y, dt, stage_.y);
  axpy_into(s.z, k3_.z, dt, stage_.z);
  axpy_into(xi.x, l3_.x, dt, tstage_.x);
  axpy_into(xi.y, l3_.y, dt, tstage_.y);
  axpy_into(xi.z, l3_.z, dt, tstage_.z);
  drift(stage_, k4_);
  tangent_drift(stage_, tstage_, l4_);

  rk4_combine(s.x, k1_.x, k2_.x, k3_.x, k4_.x, dt);
  rk4_combine(s.y, k1_.y, k2_.y, k3_.y, k4_.y, dt);
  rk4_combine(s.z, k1_.z, k2_.z, k3_.z, k4_.z, dt);
  rk4_combine(xi.x, l1_.x, l2_.x, l3_.x, l4_.x, dt);
  rk4_combine(xi.y, l1_.y, l2_.y, l3_.y, l4_.y, dt);
  rk4_combine(xi.z, l1_.z, l2_.z, l3_.z, l4_.z, dt);
  s.t += dt;
  ++steps_;
  check_bounds(s);
}

void RingStepper::step(EnsembleState& s, TangentState& tangent) { step(s, tangent.xi); }

void RingStepper::add_noise(EnsembleState& s, const NoiseSpec& noise, NoiseStream& stream,
                            double noise_time, double dt) {
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = noise_intensity_at(noise, i + 1, noise_time);
    if (d <= 0.0) continue;
    const double amp = std::sqrt(2.0 * d * dt);
    if (noise.shared_component_noise) {
      const double w = amp * stream.next();
      s.x[i] += w;
      s.y[i] += w;
      s.z[i] += w;
    } else {
      s.x[i] += amp * stream.next();
      s.y[i] += amp * stream.next();
      s.z[i] += amp * stream.next();
    }
  }
}

void RingStepper::step_stochastic(EnsembleState& s, const NoiseSpec& noise, NoiseStream& stream,
                                  double noise_time, double dt) {
  if (!is_stochastic(cfg_.scheme)) {
    throw std::logic_error("stochastic step requested with a deterministic scheme");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (cfg_.scheme == Scheme::rk4_additive_stochastic) {
    rk4_drift_only(s, dt);
  } else {
    drift(s, k1_);
    axpy_into(s.x, k1_.x, dt, s.x);
    axpy_into(s.y, k1_.y, dt, s.y);
    axpy_into(s.z, k1_.z, dt, s.z);
  }
  add_noise(s, noise, stream, noise_time, dt);
  s.t += dt;
  ++steps_;
  check_bounds(s);
}

}  // namespace ils
