#pragma once

// Test-side reference implementations. Kept deliberately naive and free of
// any dependency on the library's numerics.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

// S_i = sum_{k=i-P}^{i+P} u_k - (2P+1) u_i by brute force.
inline std::vector<double> naive_coupling_sums(const std::vector<double>& u, std::size_t p) {
  const long n = static_cast<long>(u.size());
  std::vector<double> out(u.size(), 0.0);
  for (long i = 0; i < n; ++i) {
    double s = 0.0;
    for (long k = i - static_cast<long>(p); k <= i + static_cast<long>(p); ++k) {
      s += u[static_cast<std::size_t>(((k % n) + n) % n)] - u[static_cast<std::size_t>(i)];
    }
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

using Vec3 = std::array<double, 3>;

inline Vec3 rossler(const Vec3& u, double a, double b, double c) {
  return {-u[1] - u[2], u[0] + a * u[1], b + u[2] * (u[0] - c)};
}

inline Vec3 rk4(const Vec3& u, double dt, double a, double b, double c) {
  auto add = [](const Vec3& p, const Vec3& q, double h) {
    return Vec3{p[0] + h * q[0], p[1] + h * q[1], p[2] + h * q[2]};
  };
  const Vec3 k1 = rossler(u, a, b, c);
  const Vec3 k2 = rossler(add(u, k1, dt / 2), a, b, c);
  const Vec3 k3 = rossler(add(u, k2, dt / 2), a, b, c);
  const Vec3 k4 = rossler(add(u, k3, dt), a, b, c);
  Vec3 out;
  for (int j = 0; j < 3; ++j) out[j] = u[j] + dt / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
  return out;
}

// Largest Lyapunov exponent of one Roessler oscillator from two nonlinear
// trajectories kept d0 apart by rescaling every `rescale_every` steps.
inline double two_trajectory_lyapunov(Vec3 u, double a, double b, double c, double dt,
                                      double transient, double horizon, double d0 = 1e-8,
                                      int rescale_every = 10) {
  const long warm = std::lround(transient / dt);
  for (long k = 0; k < warm; ++k) u = rk4(u, dt, a, b, c);
  Vec3 v{u[0] + d0, u[1], u[2]};
  double sum = 0.0;
  const long steps = std::lround(horizon / dt);
  for (long k = 1; k <= steps; ++k) {
    u = rk4(u, dt, a, b, c);
    v = rk4(v, dt, a, b, c);
    if (k % rescale_every == 0 || k == steps) {
      const double d = std::sqrt((v[0] - u[0]) * (v[0] - u[0]) + (v[1] - u[1]) * (v[1] - u[1]) +
                                 (v[2] - u[2]) * (v[2] - u[2]));
      sum += std::log(d / d0);
      for (int j = 0; j < 3; ++j) v[j] = u[j] + (v[j] - u[j]) * d0 / d;
    }
  }
  return sum / horizon;
}

// Ring vector field written out directly from the model equations.
struct Ring {
  std::vector<double> x, y, z;
};

inline Ring ring_field(const Ring& s, double a, double b, double c, double sigma, std::size_t p) {
  const std::size_t n = s.x.size();
  Ring out{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  const auto cx = naive_coupling_sums(s.x, p);
  const auto cy = naive_coupling_sums(s.y, p);
  const auto cz = naive_coupling_sums(s.z, p);
  const double g = sigma / (2.0 * static_cast<double>(p));
  for (std::size_t i = 0; i < n; ++i) {
    out.x[i] = -s.y[i] - s.z[i] + g * cx[i];
    out.y[i] = s.x[i] + a * s.y[i] + g * cy[i];
    out.z[i] = b + s.z[i] * (s.x[i] - c) + g * cz[i];
  }
  return out;
}

}  // namespace oracle
