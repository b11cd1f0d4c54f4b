#include "doctest.h"

#include <cmath>
#include <random>
#include <tuple>

#include "ils/model.hpp"
#include "oracles.hpp"

using namespace ils;

namespace {

EnsembleState random_state(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> uz(0.0, 3.0);
  EnsembleState s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.x[i] = u(rng);
    s.y[i] = u(rng);
    s.z[i] = uz(rng);
  }
  return s;
}

RingVector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RingVector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v.x[i] = g(rng);
    v.y[i] = g(rng);
    v.z[i] = g(rng);
  }
  return v;
}

ModelParams desk(double sigma) { return ModelParams{0.2, 0.2, 4.5, 30, 10, sigma}; }

}  // namespace

TEST_CASE("parameter constraints") {
  CHECK_NOTHROW(ModelParams{}.validate());
  CHECK_THROWS_WITH_AS((ModelParams{0.2, 0.2, 4.5, 2, 1, 0.0}.validate()), "N must be >= 3",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS((ModelParams{0.2, 0.2, 4.5, 300, 150, 0.0}.validate()), "2P must be < N",
                       std::invalid_argument);
  CHECK_THROWS_AS((ModelParams{0.2, 0.2, 4.5, 300, 0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ModelParams{0.2, 0.2, 4.5, 300, 100, -0.1}.validate()), std::invalid_argument);
  CHECK_NOTHROW((ModelParams{0.2, 0.2, 4.5, 3, 1, 2.0}.validate()));
}

TEST_CASE("homogeneous state sees the uncoupled field") {
  for (double sigma : {0.0, 0.05, 2.0}) {
    EnsembleState s(30);
    std::fill(s.x.begin(), s.x.end(), 1.0);
    std::fill(s.y.begin(), s.y.end(), 1.0);
    std::fill(s.z.begin(), s.z.end(), 1.0);
    const auto f = vector_field(s, desk(sigma));
    for (std::size_t i = 0; i < 30; ++i) {
      CHECK(f.x[i] == -2.0);
      CHECK(f.y[i] == doctest::Approx(1.2).epsilon(1e-15));
      CHECK(f.z[i] == doctest::Approx(-3.3).epsilon(1e-15));
    }
  }
}

TEST_CASE("fixed point is stationary") {
  const double a = 0.2, b = 0.2, c = 4.5;
  // Independent root of x^2 - c x + ab = 0.
  const double xs = (c - std::sqrt(c * c - 4 * a * b)) / 2;
  const auto fp = rossler_fixed_point(a, b, c);
  CHECK(fp.x == doctest::Approx(xs).epsilon(1e-15));
  CHECK(fp.y == doctest::Approx(-xs / a).epsilon(1e-15));
  CHECK(fp.z == doctest::Approx(xs / a).epsilon(1e-15));

  EnsembleState s(30);
  std::fill(s.x.begin(), s.x.end(), fp.x);
  std::fill(s.y.begin(), s.y.end(), fp.y);
  std::fill(s.z.begin(), s.z.end(), fp.z);
  const auto f = vector_field(s, desk(0.0));
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(std::abs(f.x[i]) < 1e-14);
    CHECK(std::abs(f.y[i]) < 1e-14);
    CHECK(std::abs(f.z[i]) < 1e-14);
  }
}

TEST_CASE("three-oscillator coupling by hand") {
  // N=3, P=1, sigma=2: gain 1, oscillator 1 displaced in x.
  EnsembleState s(3);
  s.x = {1.0, 0.0, 0.0};
  const ModelParams p{0.2, 0.2, 4.5, 3, 1, 2.0};
  const auto f = vector_field(s, p);
  // Uncoupled parts: xdot = -y - z = 0; coupling -2, +1, +1.
  CHECK(f.x[0] == -2.0);
  CHECK(f.x[1] == 1.0);
  CHECK(f.x[2] == 1.0);
  CHECK(f.y[0] == 1.0);  // x_1 + a y_1
  CHECK(f.z[0] == doctest::Approx(0.2 + 0.0).epsilon(1e-15));
}

TEST_CASE("vector field matches the written-out equations") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = random_state(30, rng);
    const auto f = vector_field(s, desk(0.05));
    const auto o = oracle::ring_field({s.x, s.y, s.z}, 0.2, 0.2, 4.5, 0.05, 10);
    for (std::size_t i = 0; i < 30; ++i) {
      CHECK(f.x[i] == doctest::Approx(o.x[i]).epsilon(1e-13));
      CHECK(f.y[i] == doctest::Approx(o.y[i]).epsilon(1e-13));
      CHECK(f.z[i] == doctest::Approx(o.z[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("rotation commutes with the vector field exactly") {
  std::mt19937_64 rng(11);
  const auto s = random_state(30, rng);
  for (std::ptrdiff_t shift : {1, 7, 29, -3}) {
    const auto lhs = vector_field(s.rotated(shift), desk(0.3));
    const auto f = vector_field(s, desk(0.3));
    EnsembleState fs(30);
    fs.x = f.x;
    fs.y = f.y;
    fs.z = f.z;
    const auto rhs = fs.rotated(shift);
    CHECK(lhs.x == rhs.x);
    CHECK(lhs.y == rhs.y);
    CHECK(lhs.z == rhs.z);
  }
}

TEST_CASE("jacobian is linear") {
  std::mt19937_64 rng(3);
  const auto s = random_state(30, rng);
  const auto p = desk(0.05);
  CHECK(jacobian_apply(s, p, RingVector(30)) == RingVector(30));
  const auto a = random_vector(30, rng);
  const auto b = random_vector(30, rng);
  const double al = 0.7, be = -1.3;
  RingVector mix(30);
  for (std::size_t i = 0; i < 30; ++i) {
    mix.x[i] = al * a.x[i] + be * b.x[i];
    mix.y[i] = al * a.y[i] + be * b.y[i];
    mix.z[i] = al * a.z[i] + be * b.z[i];
  }
  const auto ja = jacobian_apply(s, p, a);
  const auto jb = jacobian_apply(s, p, b);
  const auto jm = jacobian_apply(s, p, mix);
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(jm.x[i] == doctest::Approx(al * ja.x[i] + be * jb.x[i]).epsilon(1e-12));
    CHECK(jm.y[i] == doctest::Approx(al * ja.y[i] + be * jb.y[i]).epsilon(1e-12));
    CHECK(jm.z[i] == doctest::Approx(al * ja.z[i] + be * jb.z[i]).epsilon(1e-12));
  }
}

TEST_CASE("jacobian matches central differences") {
  std::mt19937_64 rng(5);
  const auto p = desk(0.05);
  const double h = 1e-5;
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = random_state(30, rng);
    const auto xi = random_vector(30, rng);
    EnsembleState plus = s, minus = s;
    for (std::size_t i = 0; i < 30; ++i) {
      plus.x[i] += h * xi.x[i];
      plus.y[i] += h * xi.y[i];
      plus.z[i] += h * xi.z[i];
      minus.x[i] -= h * xi.x[i];
      minus.y[i] -= h * xi.y[i];
      minus.z[i] -= h * xi.z[i];
    }
    const auto fp = vector_field(plus, p);
    const auto fm = vector_field(minus, p);
    const auto j = jacobian_apply(s, p, xi);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 30; ++i) {
      for (auto [f1, f0, jj] : {std::tuple{fp.x[i], fm.x[i], j.x[i]}, std::tuple{fp.y[i], fm.y[i], j.y[i]},
                                std::tuple{fp.z[i], fm.z[i], j.z[i]}}) {
        const double fd = (f1 - f0) / (2 * h);
        num += (fd - jj) * (fd - jj);
        den += jj * jj;
      }
    }
    CHECK(std::sqrt(num / den) < 1e-6);
  }
}

TEST_CASE("noise intensity field") {
  const auto u = NoiseSpec::uniform(1e-5, 1);
  CHECK(noise_intensity_at(u, 1, 0.0) == 1e-5);
  CHECK(noise_intensity_at(u, 300, 1e6) == 1e-5);

  const auto loc = NoiseSpec::localized(0.05, 140, 160, 0.1, 1);
  CHECK(noise_intensity_at(loc, 150, 0.05) == 0.05);
  CHECK(noise_intensity_at(loc, 150, 0.2) == 0.0);
  CHECK(noise_intensity_at(loc, 139, 0.05) == 0.0);
  CHECK(noise_intensity_at(loc, 161, 0.0) == 0.0);
  CHECK_THROWS_AS(NoiseSpec::localized(0.05, 10, 5, 0.1, 1).validate(300), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSpec::localized(0.05, 1, 301, 0.1, 1).validate(300), std::invalid_argument);
}

TEST_CASE("non-finite state is rejected") {
  EnsembleState s(5);
  s.y[3] = std::nan("");
  try {
    s.require_finite();
    FAIL("expected a divergence error");
  } catch (const DivergenceError& e) {
    CHECK(e.index() == 4);
  }
  CHECK_THROWS_AS(vector_field(s, ModelParams{0.2, 0.2, 4.5, 5, 1, 0.1}), DivergenceError);
  CHECK_THROWS_AS(vector_field(EnsembleState(4), ModelParams{0.2, 0.2, 4.5, 5, 1, 0.1}),
                  DimensionError);
}
