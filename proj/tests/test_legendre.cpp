#include <doctest.h>

#include <Eigen/LU>
#include <cmath>

#include "vwork/legendre.hpp"
#include "vwork/random.hpp"
#include "vwork/systems.hpp"

using namespace vwork;

namespace {

Covector random_covector(Rng& rng, std::size_t n, double scale) { return Covector(scale * rng.gaussian(n)); }

}  // namespace

TEST_CASE("membership examples") {
  const ConstitutiveSet spring(make_spring(Point{0, 0, 0}, 2.0));
  CHECK(spring.mode() == ConstitutiveMode::ExactSpring);
  CHECK(spring.contains(Point{1, 0, 0}, Covector{2, 0, 0}) == Membership::In);
  CHECK(spring.contains(Point{1, 0, 0}, Covector{2, 0.1, 0}) == Membership::Out);

  const ConstitutiveSet friction(make_friction(Mat::Identity(2, 2)));
  CHECK(friction.contains(Point{4, -1}, Covector{0.3, 0.4}) == Membership::In);
  CHECK(friction.contains(Point{4, -1}, Covector{1.2, 1.6}) == Membership::Out);
  CHECK(friction.contains(Point{0, 0}, Covector{0.6, 0.8}) == Membership::Boundary);

  const double a = 2.0;
  const ConstitutiveSet rod(make_rod(Point{0, 0, 0}, a));
  const Point q{0, 0, a};
  CHECK(rod.contains(q, (3.0 / (a * a)) * Covector{0, 0, a}) == Membership::In);
  CHECK(rod.contains(q, Covector{0.5, 0, 1}) == Membership::Out);

  const ConstitutiveSet coulomb(make_coulomb(Point{0, 0, 0}, Vector{0, 0, 1}, 0.5));
  const Point b{1, 2, 0};
  CHECK(coulomb.contains(b, Covector{0, 0, -1}) == Membership::In);
  CHECK(coulomb.contains(b, Covector{1, 0, 0}) == Membership::Out);
  CHECK(coulomb.contains(Point{0, 0, 1}, Covector{0, 0, 0}) == Membership::In);
  CHECK(coulomb.contains(Point{0, 0, 1}, Covector{0, 0, -1}) == Membership::Out);
}

TEST_CASE("skate constraint forces") {
  const double phi = 0.3;
  const Point q{0, 0, phi};
  const Covector normal{-std::sin(phi), std::cos(phi)};
  CHECK(skate_constitutive(q, normal, 0.0) == Membership::In);
  CHECK(skate_constitutive(q, Covector{std::cos(phi), std::sin(phi)}, 0.0) == Membership::Out);
  CHECK(skate_constitutive(q, Covector{0, 0}, 1.0) == Membership::Out);
  CHECK_THROWS_AS(skate_constitutive(Point{0, 0}, normal, 0.0), DimensionError);
}

TEST_CASE("boundary sampling") {
  Rng rng(51);
  const ConstitutiveSet friction(make_friction(Mat::Identity(2, 2)));
  const auto ball = friction.sample_boundary(Point{0, 0}, 4, rng);
  CHECK(ball.size() == 4);
  for (const auto& f : ball) CHECK(f.coords().norm() == doctest::Approx(1.0));

  const ConstitutiveSet spring(make_spring(Point{0, 0}, 2.0));
  const auto single = spring.sample_boundary(Point{1, 1}, 3, rng);
  REQUIRE_FALSE(single.empty());
  for (const auto& f : single) CHECK((f.coords() - Vec::Constant(2, 2.0)).norm() < 1e-12);

  const ConstitutiveSet cone(make_coulomb(Point{0, 0, 0}, Vector{0, 0, 1}, 1.0));
  for (const auto& f : cone.sample_boundary(Point{0, 0, 0}, 20, rng)) {
    CHECK(std::hypot(f[0], f[1]) == doctest::Approx(-f[2]).epsilon(1e-9));
    CHECK(cone.contains(Point{0, 0, 0}, f) != Membership::Out);
  }
}

TEST_CASE("exact and generic paths agree") {
  Rng rng(52);
  const EuclideanSpace s(3);
  Mat rho = Mat::Identity(3, 3);
  rho(2, 2) = 4.0;
  Mat omega(3, 3);
  omega << 1, 0.5, 0, 0.5, 2, 0, 0, 0, 1;
  struct Case {
    StaticSystem sys;
    std::function<Point(Rng&)> point;
  };
  const std::vector<Case> cases{
      {make_spring(Point{0, 0, 0}, 2.0, s), [](Rng& r) { return Point(r.gaussian(3)); }},
      {make_bilinear(Point{1, 0, 0}, omega, s), [](Rng& r) { return Point(r.gaussian(3)); }},
      {make_friction(rho, s), [](Rng& r) { return Point(r.gaussian(3)); }},
      {make_rod(Point{0, 0, 0}, 1.5, s),
       [](Rng& r) {
         Vec v = r.gaussian(3);
         return Point(1.5 * v / v.norm());
       }},
      {make_coulomb(Point{0, 0, 0}, Vector{0, 0, 1}, 0.6, s),
       [](Rng& r) {
         Vec v = r.gaussian(3);
         v[2] = r.uniform() < 0.5 ? 0.0 : std::abs(v[2]);
         return Point(v);
       }},
  };
  for (const auto& c : cases) {
    const ConstitutiveSet exact(c.sys);
    const ConstitutiveSet generic(c.sys, ConstitutiveMode::Generic, 1e-7, 3);
    int compared = 0;
    for (int t = 0; t < 150; ++t) {
      const Point q = c.point(rng);
      Covector f = random_covector(rng, 3, 1.5);
      if (rng.uniform() < 0.5) {
        try {
          const auto b = exact.sample_boundary(q, 1, rng);
          if (!b.empty()) f = rng.uniform(0.0, 1.2) * b.front();
        } catch (const DomainError&) {
          f = Covector(rng.normal() * q.coords());
        }
      }
      const Margin m = exact.margin(q, f);
      if (std::abs(m.value(exact.tol())) <= 10 * exact.tol()) continue;
      ++compared;
      CHECK(exact.contains(q, f) == generic.contains(q, f));
    }
    CHECK(compared > 50);
  }
}

TEST_CASE("potential systems have singleton constraint sets") {
  Rng rng(53);
  const StaticSystem pot = make_potential_poly(EuclideanSpace(2), {{1.0, {2, 0}}, {0.5, {1, 2}}, {-0.3, {0, 3}}});
  const ConstitutiveSet generic(pot, ConstitutiveMode::Generic, 1e-7, 1);
  for (int t = 0; t < 20; ++t) {
    const Point q(rng.gaussian(2));
    const Covector du = pot.potential->differential(q);
    CHECK(generic.contains(q, du) != Membership::Out);
    const Covector off = du + Covector(1e-3 * rng.gaussian(2));
    CHECK(generic.contains(q, off) == Membership::Out);
    CHECK(generic.margin(q, du).residual < 1e-6);
  }
}

TEST_CASE("zero covector lies in cone-constrained sets") {
  Rng rng(54);
  const ConstitutiveSet corner(make_corner(Point{0, 0}, Vector{1, 0}, Vector{0, 1}), ConstitutiveMode::Generic);
  const ConstitutiveSet rod(make_rod(Point{0, 0}, 1.0));
  const ConstitutiveSet coulomb(make_coulomb(Point{0, 0}, Vector{0, 1}, 0.4));
  for (const Point& q : {Point{0, 0}, Point{0, 3}, Point{2, 0}}) CHECK(corner.contains(q, Covector{0, 0}) != Membership::Out);
  for (int t = 0; t < 20; ++t) {
    const double a = rng.uniform(0.0, 6.3);
    CHECK(rod.contains(Point{std::cos(a), std::sin(a)}, Covector{0, 0}) != Membership::Out);
    CHECK(coulomb.contains(Point{rng.normal(), 0}, Covector{0, 0}) != Membership::Out);
  }
}

TEST_CASE("friction ball satisfies the Schwarz bound") {
  Rng rng(55);
  Mat a(3, 3);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  const Mat rho = a * a.transpose() + Mat::Identity(3, 3);
  const Mat rho_inv = rho.inverse();
  for (int t = 0; t < 20; ++t) {
    Covector f(rng.gaussian(3));
    const double n = std::sqrt(f.coords().dot(rho_inv * f.coords()));
    f = (rng.uniform() / n) * f;
    REQUIRE(f.coords().dot(rho_inv * f.coords()) <= 1.0);
    int violations = 0;
    for (int i = 0; i < 500; ++i) {
      const Vec v = rng.gaussian(3);
      if (f.coords().dot(v) > std::sqrt(v.dot(rho * v)) + 1e-12) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("margin value") {
  CHECK(Margin{0.0, 0.5}.value(1e-7) == 0.5);
  CHECK(Margin{0.2, 0.5}.value(1e-7) == -0.2);
  CHECK(to_string(Membership::Boundary) == "Boundary");
}
