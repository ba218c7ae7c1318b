#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vwork/dynamics.hpp"
#include "vwork/random.hpp"

using namespace vwork;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

LagrangianSpec free_particle(std::size_t n = 1) {
  return LagrangianSpec::quadratic(Mat::Identity(n, n), Mat::Zero(n, n), Vec::Zero(n));
}

LagrangianSpec harmonic() { return LagrangianSpec::quadratic(Mat::Identity(1, 1), Mat::Identity(1, 1), Vec::Zero(1)); }

Vec scalar(double x) { return Vec::Constant(1, x); }

double sup_error(const DiscretePath& p, const std::function<double(double)>& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < p.q.size(); ++i) e = std::max(e, std::abs(p.q[i][0] - exact(p.time(i))));
  return e;
}

std::vector<Vec> random_variation(Rng& rng, std::size_t nodes, std::size_t dim, bool pinned) {
  std::vector<Vec> w;
  for (std::size_t i = 0; i < nodes; ++i) w.push_back(rng.gaussian(dim));
  if (pinned) {
    w.front().setZero();
    w.back().setZero();
  }
  return w;
}

}  // namespace

TEST_CASE("action examples") {
  for (std::size_t n : {2u, 3u, 17u}) {
    const DiscretePath line = sample_path([](double t) { return scalar(t); }, 0.0, 1.0, n);
    CHECK(discrete_action(free_particle(), line) == doctest::Approx(0.5).epsilon(1e-14));
  }
  const DiscretePath rest = sample_path([](double) { return scalar(0.0); }, 0.0, 2.0, 8);
  CHECK(discrete_action(harmonic(), rest) == 0.0);

  auto cosine = [](double t) { return scalar(std::cos(t)); };
  const double reference = discrete_action(harmonic(), sample_path(cosine, 0.0, kHalfPi, 4096));
  CHECK(std::abs(reference) < 1e-6);
  const double coarse = discrete_action(harmonic(), sample_path(cosine, 0.0, kHalfPi, 64));
  const double h = kHalfPi / 64;
  CHECK(std::abs(coarse - reference) < h * h);
}

TEST_CASE("path validation") {
  CHECK_THROWS_AS(DiscretePath(0.0, 1.0, {scalar(0)}), DomainError);
  CHECK_THROWS_AS(DiscretePath(1.0, 1.0, {scalar(0), scalar(1)}), DomainError);
  CHECK_THROWS_AS(LagrangianSpec::quadratic(-Mat::Identity(1, 1), Mat::Zero(1, 1), Vec::Zero(1)), DomainError);
  Mat k(2, 2);
  k << 0, 1, 0, 0;
  CHECK_THROWS_AS(LagrangianSpec::quadratic(Mat::Identity(2, 2), k, Vec::Zero(2)), DomainError);
}

TEST_CASE("free particle is solved exactly") {
  for (std::size_t n : {2u, 5u, 33u}) {
    const DiscretePath p = solve_bvp(free_particle(), scalar(0), scalar(3), 0.0, 1.0, n);
    CHECK(sup_error(p, [](double t) { return 3 * t; }) < 1e-12);
  }
}

TEST_CASE("constant force gives the parabola") {
  const double f = 2.0, q0 = 1.0, q1 = -1.0;
  const double v = q1 - q0 - f / 2;
  auto exact = [&](double t) { return q0 + v * t + f * t * t / 2; };
  const ForceField force = [&](double) { return scalar(f); };
  for (std::size_t n : {4u, 16u, 64u}) {
    const DiscretePath p = solve_bvp(free_particle(), scalar(q0), scalar(q1), 0.0, 1.0, n, force);
    const double h = 1.0 / static_cast<double>(n);
    CHECK(sup_error(p, exact) < 1e-12 + h * h);
    for (const auto& r : euler_lagrange_residual(free_particle(), p, force)) CHECK(r.norm() < 1e-9);
  }
}

TEST_CASE("harmonic oscillator") {
  auto exact = [](double t) { return std::cos(t); };
  const DiscretePath p = solve_bvp(harmonic(), scalar(1), scalar(0), 0.0, kHalfPi, 64);
  CHECK(sup_error(p, exact) < 2e-3);
  double previous = 0.0;
  for (std::size_t n : {16u, 32u, 64u, 128u}) {
    const double e = sup_error(solve_bvp(harmonic(), scalar(1), scalar(0), 0.0, kHalfPi, n), exact);
    if (previous > 0.0) CHECK(previous / e >= 3.5);
    previous = e;
  }
}

TEST_CASE("boundary momenta converge") {
  double e0 = 1.0, e1 = 1.0;
  for (std::size_t n : {32u, 64u, 128u}) {
    const DiscretePath p = solve_bvp(harmonic(), scalar(1), scalar(0), 0.0, kHalfPi, n);
    const auto [p0, p1] = boundary_momenta(harmonic(), p);
    const double h = kHalfPi / static_cast<double>(n);
    CHECK(std::abs(p0[0]) < 10 * h);
    CHECK(std::abs(p1[0] + 1.0) < 10 * h);
    CHECK(std::abs(p0[0]) <= e0);
    CHECK(std::abs(p1[0] + 1.0) <= e1);
    e0 = std::abs(p0[0]);
    e1 = std::abs(p1[0] + 1.0);
  }
}

TEST_CASE("solved paths are stationary") {
  Rng rng(81);
  Mat m(2, 2), k(2, 2);
  m << 2, 0.3, 0.3, 1;
  k << 1, -0.5, -0.5, 3;
  const LagrangianSpec l = LagrangianSpec::quadratic(m, k, Vec::Constant(2, 0.25));
  const ForceField f = [](double t) { return Vec(Eigen::Vector2d(std::sin(t), 1 - t)); };
  for (int t = 0; t < 10; ++t) {
    const DiscretePath p = solve_bvp(l, rng.gaussian(2), rng.gaussian(2), 0.0, 1.5, 40, f);
    const auto [p0, p1] = boundary_momenta(l, p);
    for (int i = 0; i < 10; ++i) {
      CHECK(std::abs(action_variation(l, p, f, random_variation(rng, p.q.size(), 2, true))) < 1e-8);
      const auto w = random_variation(rng, p.q.size(), 2, false);
      const double boundary = p1.coords().dot(w.back()) - p0.coords().dot(w.front());
      const double scale = 1.0 + std::abs(boundary);
      CHECK(std::abs(action_variation(l, p, f, w) - boundary) < 1e-6 * scale);
    }
  }
}

TEST_CASE("variation matches finite differences of the action") {
  Rng rng(82);
  const LagrangianSpec l = harmonic();
  const ForceField f = [](double t) { return scalar(t); };
  const DiscretePath p = sample_path([](double t) { return scalar(std::sin(3 * t)); }, 0.0, 1.0, 20);
  const auto w = random_variation(rng, p.q.size(), 1, false);
  const double eps = 1e-6;
  auto shifted = [&](double s) {
    std::vector<Vec> q = p.q;
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += s * w[i];
    return forced_action(l, DiscretePath(p.t0, p.t1, q), f);
  };
  const double fd = (shifted(eps) - shifted(-eps)) / (2 * eps);
  CHECK(action_variation(l, p, f, w) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("custom Lagrangians use Newton") {
  const LagrangianSpec as_custom = LagrangianSpec::custom(
      1, [](const Vec& q, const Vec& v) { return 0.5 * v.squaredNorm() - 0.5 * q.squaredNorm(); },
      [](const Vec& q, const Vec&) { return Vec(-q); }, [](const Vec&, const Vec& v) { return v; });
  CHECK_FALSE(as_custom.is_quadratic());
  const DiscretePath a = solve_bvp(as_custom, scalar(1), scalar(0), 0.0, kHalfPi, 32);
  const DiscretePath b = solve_bvp(harmonic(), scalar(1), scalar(0), 0.0, kHalfPi, 32);
  for (std::size_t i = 0; i < a.q.size(); ++i) CHECK(std::abs(a.q[i][0] - b.q[i][0]) < 1e-9);

  const LagrangianSpec quartic = LagrangianSpec::custom(
      1, [](const Vec& q, const Vec& v) { return 0.5 * v.squaredNorm() - 0.25 * std::pow(q[0], 4); },
      [](const Vec& q, const Vec&) { return scalar(-std::pow(q[0], 3)); }, [](const Vec&, const Vec& v) { return v; });
  const DiscretePath p = solve_bvp(quartic, scalar(0.5), scalar(-0.8), 0.0, 1.0, 50);
  for (const auto& r : euler_lagrange_residual(quartic, p)) CHECK(r.norm() < 1e-8);
  CHECK(p.q.front()[0] == 0.5);
  CHECK(p.q.back()[0] == -0.8);
}
