#include "ils/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ils {

namespace {

void require_positive_horizon(double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon T must be > 0");
}

double log_sum_exp(std::span<const double> v) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : v) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

void require_increasing(std::span<const double> checkpoints) {
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    if (!(checkpoints[k] > 0.0)) throw std::invalid_argument("checkpoints must be > 0");
    if (k > 0 && !(checkpoints[k] > checkpoints[k - 1])) {
      throw std::invalid_argument("checkpoints must be strictly increasing");
    }
  }
}

}  // namespace

double finite_time_growth(const TangentState& ts, double horizon) {
  require_positive_horizon(horizon);
  return (ts.log_full_norm() - std::log(ts.initial_full_norm)) / horizon;
}

IlsProfile ils_profile(const TangentState& ts, double horizon) {
  require_positive_horizon(horizon);
  const std::size_t n = ts.size();
  IlsProfile p;
  p.t0 = ts.t0;
  p.horizon = horizon;
  p.lambda_full = finite_time_growth(ts, horizon);

  // ||xi_i(t0)|| = ||xi(t0)|| / sqrt(N) for a homogeneous start.
  const double log_block0 = std::log(ts.initial_full_norm) - 0.5 * std::log(static_cast<double>(n));
  const auto logs = per_oscillator_log_norms(ts);
  p.lambda_i.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.lambda_i[i] = (logs[i] - log_block0) / horizon;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double l : p.lambda_i) {
    if (!std::isfinite(l)) {
      ++p.decayed;
      continue;
    }
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  p.r_ils = p.decayed == n ? 0.0 : hi - lo;
  p.s_i.assign(n, 0.0);
  if (p.r_ils > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      p.s_i[i] = std::isfinite(p.lambda_i[i]) ? (p.lambda_i[i] - p.lambda_full) / p.r_ils
                                               : -std::numeric_limits<double>::infinity();
    }
  }

  p.identity_residual = identity_check(p);
  if (!(p.identity_residual < kIdentityTolerance)) {
    std::ostringstream os;
    os << "exponential-mean identity violated: residual " << p.identity_residual;
    throw IdentityViolation(os.str());
  }
  const double slack = 1e-12 * std::max(1.0, std::abs(hi));
  const double lower = hi - std::log(static_cast<double>(n)) / (2.0 * horizon);
  if (!(p.lambda_full <= hi + slack) || !(p.lambda_full >= lower - slack)) {
    std::ostringstream os;
    os << "sandwich bound violated: Lambda=" << p.lambda_full << " max_i=" << hi;
    throw IdentityViolation(os.str());
  }
  return p;
}

double identity_check(const IlsProfile& profile) {
  const std::size_t n = profile.size();
  if (n == 0) return 0.0;
  const double two_t = 2.0 * profile.horizon;
  std::vector<double> args(n);
  for (std::size_t i = 0; i < n; ++i) args[i] = two_t * profile.lambda_i[i];
  const double log_mean = log_sum_exp(args) - std::log(static_cast<double>(n));
  const double log_full = two_t * profile.lambda_full;
  return std::abs(std::expm1(log_mean - log_full));
}

LeEstimate max_le_estimate(TangentState& ts, std::span<const double> checkpoints,
                           const TangentAdvance& advance) {
  require_increasing(checkpoints);
  LeEstimate est;
  for (double horizon : checkpoints) {
    advance(ts, horizon);
    est.convergence_series.emplace_back(horizon, finite_time_growth(ts, horizon));
  }
  if (!est.convergence_series.empty()) {
    est.lambda_max = est.convergence_series.back().second;
    est.horizon_used = est.convergence_series.back().first;
    const std::size_t m = est.convergence_series.size();
    const std::size_t first = m >= 3 ? m - 3 : 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = first; k < m; ++k) {
      lo = std::min(lo, est.convergence_series[k].second);
      hi = std::max(hi, est.convergence_series[k].second);
    }
    est.stabilization = hi - lo;
  }
  return est;
}

std::vector<IlsProfile> ils_range_series(TangentState& ts, std::span<const double> checkpoints,
                                         const TangentAdvance& advance) {
  require_increasing(checkpoints);
  std::vector<IlsProfile> out;
  out.reserve(checkpoints.size());
  for (double horizon : checkpoints) {
    advance(ts, horizon);
    out.push_back(ils_profile(ts, horizon));
  }
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("pearson: size mismatch");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

RingTangentEvolution::RingTangentEvolution(RingStepper& stepper, EnsembleState& state,
                                           double renorm_interval)
    : stepper_(stepper), state_(state) {
  if (!(renorm_interval > 0.0)) throw std::invalid_argument("renormalization interval must be > 0");
  renorm_steps_ = std::max(1LL, std::llround(renorm_interval / stepper.config().dt));
}

void RingTangentEvolution::advance(TangentState& ts, double horizon) {
  const long long target = std::llround(horizon / stepper_.config().dt);
  while (steps_done_ < target) {
    stepper_.step(state_, ts);
    ++steps_done_;
    if (steps_done_ % renorm_steps_ == 0) renormalize(ts);
    if (observer_) observer_(state_);
  }
}

}  // namespace ils
