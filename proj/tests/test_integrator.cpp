#include "doctest.h"

#include <cmath>
#include <random>

#include "ils/integrator.hpp"
#include "oracles.hpp"

using namespace ils;

namespace {

ModelParams desk(double sigma) { return ModelParams{0.2, 0.2, 4.5, 30, 10, sigma}; }

EnsembleState box_state(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-4.0, 4.0), uz(0.0, 2.0);
  EnsembleState s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.x[i] = u(rng);
    s.y[i] = u(rng);
    s.z[i] = uz(rng);
  }
  return s;
}

double max_diff(const EnsembleState& a, const EnsembleState& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max({m, std::abs(a.x[i] - b.x[i]), std::abs(a.y[i] - b.y[i]), std::abs(a.z[i] - b.z[i])});
  }
  return m;
}

}  // namespace

TEST_CASE("windowed sums, hand-evaluated") {
  const auto s = windowed_coupling_sums(std::vector<double>{1, 2, 3, 4, 5}, 1);
  CHECK(s[0] == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(std::abs(s[2]) < 1e-15);
  CHECK(s[4] == doctest::Approx(-5.0).epsilon(1e-15));
}

TEST_CASE("windowed sums vanish on constants") {
  for (std::size_t p : {1u, 4u, 100u}) {
    const auto s = windowed_coupling_sums(std::vector<double>(300, 5.0), p);
    for (double v : s) CHECK(v == 0.0);
  }
}

TEST_CASE("windowed sums agree with the brute-force loop") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 10.0);
  for (auto [n, p] : {std::pair<std::size_t, std::size_t>{5, 2}, {30, 10}, {300, 100}, {301, 150}}) {
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> u(n);
      for (auto& v : u) v = g(rng);
      const auto fast = windowed_coupling_sums(u, p);
      const auto slow = oracle::naive_coupling_sums(u, p);
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(fast[i] - slow[i]));
      CHECK(worst < 1e-10);
    }
  }
  CHECK_THROWS_AS(windowed_coupling_sums(std::vector<double>(10, 0.0), 5), std::invalid_argument);
}

TEST_CASE("scheme names") {
  for (auto s : {Scheme::rk4_deterministic, Scheme::euler_maruyama_stochastic,
                 Scheme::rk4_additive_stochastic}) {
    CHECK(scheme_from_string(to_string(s)) == s);
  }
  CHECK(scheme_from_string("rk4") == Scheme::rk4_deterministic);
  CHECK_THROWS_AS(scheme_from_string("heun"), std::invalid_argument);
}

TEST_CASE("fixed point survives a step") {
  const auto fp = rossler_fixed_point(0.2, 0.2, 4.5);
  EnsembleState s(3);
  for (std::size_t i = 0; i < 3; ++i) {
    s.x[i] = fp.x;
    s.y[i] = fp.y;
    s.z[i] = fp.z;
  }
  const auto s0 = s;
  RingStepper st(ModelParams{0.2, 0.2, 4.5, 3, 1, 0.0}, IntegrationConfig{});
  st.step(s);
  CHECK(max_diff(s, s0) < 1e-12);
  CHECK(s.t == doctest::Approx(0.01));
}

TEST_CASE("rk4 matches an independent single-oscillator rk4") {
  // Homogeneous ring = one oscillator.
  EnsembleState s(3);
  oracle::Vec3 u{1.0, -2.0, 0.5};
  for (std::size_t i = 0; i < 3; ++i) {
    s.x[i] = u[0];
    s.y[i] = u[1];
    s.z[i] = u[2];
  }
  RingStepper st(ModelParams{0.2, 0.2, 4.5, 3, 1, 0.5}, IntegrationConfig{});
  for (int k = 0; k < 1000; ++k) {
    st.step(s);
    u = oracle::rk4(u, 0.01, 0.2, 0.2, 4.5);
  }
  CHECK(s.x[1] == doctest::Approx(u[0]).epsilon(1e-12));
  CHECK(s.y[2] == doctest::Approx(u[1]).epsilon(1e-12));
  CHECK(s.z[0] == doctest::Approx(u[2]).epsilon(1e-12));
}

TEST_CASE("fourth-order self-convergence") {
  const auto p = desk(0.05);
  const auto s0 = box_state(30, 2);
  auto run = [&](double dt, int steps) {
    IntegrationConfig cfg;
    cfg.dt = dt;
    RingStepper st(p, cfg);
    auto s = s0;
    for (int k = 0; k < steps; ++k) st.step(s);
    return s;
  };
  // 100 steps of 0.02 against halved and quartered steps.
  const auto coarse = run(0.02, 100);
  const auto mid = run(0.01, 200);
  const auto fine = run(0.005, 400);
  const double ratio = max_diff(coarse, mid) / max_diff(mid, fine);
  CHECK(ratio > 13.0);
  CHECK(ratio < 19.0);
}

TEST_CASE("zero tangent stays zero") {
  const auto p = desk(0.05);
  auto s = box_state(30, 4);
  RingStepper st(p, IntegrationConfig{});
  RingVector xi(30);
  for (int k = 0; k < 500; ++k) st.step(s, xi);
  CHECK(xi == RingVector(30));
}

TEST_CASE("joint step tracks the difference quotient of two trajectories") {
  const auto p = desk(0.05);
  const auto s0 = box_state(30, 6);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  RingVector xi(30);
  for (std::size_t i = 0; i < 30; ++i) {
    xi.x[i] = g(rng);
    xi.y[i] = g(rng);
    xi.z[i] = g(rng);
  }
  const double eps = 1e-8;
  auto s = s0, sp = s0;
  for (std::size_t i = 0; i < 30; ++i) {
    sp.x[i] += eps * xi.x[i];
    sp.y[i] += eps * xi.y[i];
    sp.z[i] += eps * xi.z[i];
  }
  RingStepper a(p, IntegrationConfig{}), b(p, IntegrationConfig{});
  for (int k = 0; k < 100; ++k) {
    a.step(s, xi);
    b.step(sp);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < 30; ++i) {
    for (auto [d, t] : {std::pair{sp.x[i] - s.x[i], xi.x[i]}, std::pair{sp.y[i] - s.y[i], xi.y[i]},
                        std::pair{sp.z[i] - s.z[i], xi.z[i]}}) {
      num += (d / eps - t) * (d / eps - t);
      den += t * t;
    }
  }
  CHECK(std::sqrt(num / den) < 1e-3);
}

TEST_CASE("deterministic runs repeat bit for bit") {
  const auto p = desk(0.05);
  auto a = box_state(30, 8), b = a;
  RingStepper sa(p, IntegrationConfig{}), sb(p, IntegrationConfig{});
  for (int k = 0; k < 2000; ++k) {
    sa.step(a);
    sb.step(b);
  }
  CHECK(a == b);
}

TEST_CASE("zero-intensity noise leaves the deterministic path intact") {
  const auto p = desk(0.05);
  const auto s0 = box_state(30, 10);

  // Euler-Maruyama without noise is one explicit Euler step of the drift.
  IntegrationConfig em;
  em.scheme = Scheme::euler_maruyama_stochastic;
  RingStepper st(p, em);
  NoiseStream stream(1);
  auto s = s0;
  st.step_stochastic(s, NoiseSpec::uniform(0.0, 1), stream, 0.0);
  const auto f = vector_field(s0, p);
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(s.x[i] == doctest::Approx(s0.x[i] + 0.001 * f.x[i]).epsilon(1e-14));
    CHECK(s.z[i] == doctest::Approx(s0.z[i] + 0.001 * f.z[i]).epsilon(1e-14));
  }

  // The additive variant with D = 0 is exactly rk4.
  IntegrationConfig add;
  add.scheme = Scheme::rk4_additive_stochastic;
  RingStepper noisy(p, add);
  RingStepper clean(p, IntegrationConfig{});
  auto a = s0, b = s0;
  for (int k = 0; k < 300; ++k) {
    noisy.step_stochastic(a, NoiseSpec::uniform(0.0, 1), stream, 0.0, 0.01);
    clean.step(b);
  }
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.z == b.z);
}

TEST_CASE("noise-only variance grows as 2 D t") {
  IntegrationConfig em;
  em.scheme = Scheme::euler_maruyama_stochastic;
  RingStepper st(ModelParams{0.2, 0.2, 4.5, 3, 1, 0.0}, em);
  st.set_drift_enabled(false);
  NoiseStream stream(2024);
  const auto spec = NoiseSpec::uniform(0.05, 2024);
  double sum = 0.0, sum2 = 0.0;
  std::size_t count = 0;
  for (int path = 0; path < 10000; ++path) {
    EnsembleState s(3);
    for (int k = 0; k < 100; ++k) st.step_stochastic(s, spec, stream, k * 0.001);
    for (std::size_t i = 0; i < 3; ++i) {
      for (double v : {s.x[i], s.y[i], s.z[i]}) {
        sum += v;
        sum2 += v * v;
        ++count;
      }
    }
  }
  const double mean = sum / count;
  const double var = sum2 / count - mean * mean;
  CHECK(var == doctest::Approx(2 * 0.05 * 0.1).epsilon(0.05));
}

TEST_CASE("noise draws follow the documented order") {
  IntegrationConfig em;
  em.scheme = Scheme::euler_maruyama_stochastic;
  RingStepper st(ModelParams{0.2, 0.2, 4.5, 5, 1, 0.0}, em);
  st.set_drift_enabled(false);
  const double amp = std::sqrt(2 * 0.05 * 0.001);

  SUBCASE("independent components, quiet oscillators skipped") {
    NoiseStream stream(3), mirror(3);
    EnsembleState s(5);
    st.step_stochastic(s, NoiseSpec::localized(0.05, 2, 3, 0.1, 3), stream, 0.0);
    CHECK(s.x[0] == 0.0);
    CHECK(s.x[1] == amp * mirror.next());
    CHECK(s.y[1] == amp * mirror.next());
    CHECK(s.z[1] == amp * mirror.next());
    CHECK(s.x[2] == amp * mirror.next());
    CHECK(s.z[4] == 0.0);
  }
  SUBCASE("shared component draw") {
    NoiseStream stream(3), mirror(3);
    auto spec = NoiseSpec::localized(0.05, 2, 3, 0.1, 3);
    spec.shared_component_noise = true;
    EnsembleState s(5);
    st.step_stochastic(s, spec, stream, 0.0);
    const double first = amp * mirror.next();
    CHECK(s.x[1] == first);
    CHECK(s.y[1] == first);
    CHECK(s.z[1] == first);
    CHECK(s.x[2] == amp * mirror.next());
  }
  SUBCASE("window closes after t_end") {
    NoiseStream stream(3);
    EnsembleState s(5);
    st.step_stochastic(s, NoiseSpec::localized(0.05, 2, 3, 0.1, 3), stream, 0.2);
    CHECK(s == EnsembleState(5, 0.001));
  }
}

TEST_CASE("same seed, same stochastic trajectory") {
  const auto p = desk(0.05);
  IntegrationConfig em;
  em.scheme = Scheme::euler_maruyama_stochastic;
  auto run = [&] {
    RingStepper st(p, em);
    NoiseStream stream(77);
    auto s = box_state(30, 12);
    for (int k = 0; k < 1000; ++k) st.step_stochastic(s, NoiseSpec::uniform(1e-3, 77), stream, k * 0.001);
    return s;
  };
  CHECK(run() == run());
}

TEST_CASE("scheme mismatches are refused") {
  const auto p = desk(0.05);
  RingStepper det(p, IntegrationConfig{});
  NoiseStream stream(1);
  auto s = box_state(30, 1);
  CHECK_THROWS_AS(det.step_stochastic(s, NoiseSpec::uniform(1e-5, 1), stream, 0.0), std::logic_error);
  IntegrationConfig em;
  em.scheme = Scheme::euler_maruyama_stochastic;
  RingStepper sto(p, em);
  CHECK_THROWS_AS(sto.step(s), std::logic_error);
}

TEST_CASE("divergence aborts with the step index") {
  IntegrationConfig cfg;
  cfg.divergence_bound = 50.0;
  RingStepper st(desk(0.0), cfg);
  auto s = box_state(30, 1);
  s.z[4] = 40.0;
  s.x[4] = 30.0;
  try {
    for (int k = 0; k < 100000; ++k) st.step(s);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step() >= 1);
    CHECK(std::abs(e.value()) > 50.0);
  }
}
