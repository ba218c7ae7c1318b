#include <doctest.h>

#include <cmath>

#include "vwork/compose.hpp"
#include "vwork/examples.hpp"
#include "vwork/legendre.hpp"
#include "vwork/random.hpp"
#include "vwork/systems.hpp"

using namespace vwork;

namespace {

StaticSystem plane(const Covector& n, const Point& q0) {
  const EuclideanSpace s(n.dim());
  return make_holonomic(s, {affine_constraint(n, q0, Constraint::Kind::Equality, "plane")}, std::nullopt, "plane");
}

void check_same(const StaticSystem& a, const StaticSystem& b, Rng& rng, const Point& base) {
  const std::size_t n = a.dim();
  for (int t = 0; t < 20; ++t) {
    const Point q = rng.uniform() < 0.5 ? base : Point(rng.gaussian(n));
    CHECK(a.admissible(q) == b.admissible(q));
    if (!a.admissible(q)) continue;
    const VirtualSet va = a.V(q), vb = b.V(q);
    for (int i = 0; i < 10; ++i) {
      Vector v(rng.gaussian(n));
      if (rng.uniform() < 0.5) v = va.project(a.space, v);
      CHECK(va.contains(a.space, v) == vb.contains(b.space, v));
      CHECK(a.theta(q, v) == doctest::Approx(b.theta(q, v)).epsilon(1e-12).scale(1.0));
    }
  }
}

}  // namespace

TEST_CASE("springs add") {
  const Point c{0.5, -1, 2};
  const StaticSystem both = compose(make_spring(c, 1.0), make_spring(c, 2.0));
  const ConstitutiveSet s(both, ConstitutiveMode::Generic, 1e-7, 1);
  const Point q{1, 0, 0};
  const Covector f(Vec(3.0 * (q - c).coords()));
  CHECK(s.contains(q, f) != Membership::Out);
  CHECK(s.contains(q, f + Covector{1e-3, 0, 0}) == Membership::Out);
  CHECK(s.contains(q, Covector(Vec(2.0 * (q - c).coords()))) == Membership::Out);
}

TEST_CASE("potential sums are singletons") {
  Rng rng(71);
  const EuclideanSpace sp(2);
  const StaticSystem a = make_potential_poly(sp, {{1.0, {2, 0}}, {0.5, {1, 1}}});
  const StaticSystem b = make_potential_poly(sp, {{-0.25, {0, 3}}, {2.0, {0, 2}}});
  const StaticSystem c = compose(a, b);
  REQUIRE(c.potential);
  const ConstitutiveSet s(c, ConstitutiveMode::Generic, 1e-7, 1);
  for (int t = 0; t < 20; ++t) {
    const Point q(rng.gaussian(2));
    const Covector du = a.potential->differential(q) + b.potential->differential(q);
    CHECK((c.potential->differential(q) - du).coords().norm() < 1e-12);
    CHECK(s.contains(q, du) != Membership::Out);
    CHECK(s.contains(q, du + Covector(1e-3 * rng.gaussian(2))) == Membership::Out);
  }
}

TEST_CASE("the free system is an identity") {
  Rng rng(72);
  const StaticSystem rod = make_rod(Point{0, 0, 0}, 1.0);
  const StaticSystem free3 = make_free(EuclideanSpace(3));
  const StaticSystem left = compose(free3, rod);
  const StaticSystem right = compose(rod, free3);
  CHECK(left.kind == "rod");
  CHECK(right.kind == "rod");
  check_same(left, rod, rng, Point{0, 0, 1});
}

TEST_CASE("composition is commutative and associative") {
  Rng rng(73);
  const StaticSystem a = make_spring(Point{0, 0, 0}, 1.5);
  const StaticSystem b = make_friction(Mat::Identity(3, 3));
  const StaticSystem c = plane(Covector{0, 0, 1}, Point{0, 0, 0});
  check_same(compose(a, b), compose(b, a), rng, Point{0, 0, 0});
  check_same(compose(a, c), compose(c, a), rng, Point{1, 1, 0});
  check_same(compose(compose(a, b), c), compose(a, compose(b, c)), rng, Point{0.3, -0.2, 0});
  const StaticSystem s1 = sphere_system(Point{0, 0, 0}, 1.0);
  const StaticSystem s2 = sphere_system(Point{1, 0, 0}, 1.0);
  check_same(compose(s1, s2), compose(s2, s1), rng, Point{0.5, std::sqrt(0.75), 0});
}

TEST_CASE("clean and non-clean intersections of spheres") {
  const double a = 1.0;
  const StaticSystem s1 = sphere_system(Point{0, 0, 0}, a);
  const StaticSystem near = sphere_system(Point{a, 0, 0}, a);
  const Point on_circle{a / 2, std::sqrt(0.75) * a, 0};
  const CleanReport clean = clean_check(s1, near, on_circle);
  CHECK(clean.status == Cleanliness::Clean);
  CHECK(clean.virtual_dim == 1);
  CHECK(clean.tangent_dim == 1);
  CHECK(clean.jacobian_rank == 2);
  CHECK(compose(s1, near).V(on_circle).contains(s1.space, Vector{0, 0, 1}));
  CHECK_FALSE(compose(s1, near).V(on_circle).contains(s1.space, Vector{1, 0, 0}));

  const StaticSystem far = sphere_system(Point{2 * a, 0, 0}, a);
  const Point touch{a, 0, 0};
  const CleanReport dirty = clean_check(s1, far, touch);
  CHECK(dirty.status == Cleanliness::NotClean);
  CHECK(dirty.virtual_dim == 2);
  CHECK(dirty.tangent_dim == 0);
  const ComposedConstitutive cc = composed_constitutive(s1, far, touch);
  CHECK(cc.status == Cleanliness::NotClean);
  CHECK_FALSE(cc.warning.empty());
  CHECK(cc.virtual_basis.cols() == 2);
  CHECK(cc.residual(s1.space, Covector{3, 0, 0}) < 1e-12);
  CHECK(cc.residual(s1.space, Covector{0, 1, 0}) > 0.5);

  CHECK(clean_check(s1, s1, on_circle).status == Cleanliness::Clean);
  CHECK(to_string(Cleanliness::NotClean) == "NotClean");
}

TEST_CASE("nearly tangent spheres stay clean") {
  const double a = 1.0, eps = 1e-3;
  const StaticSystem s1 = sphere_system(Point{0, 0, 0}, a);
  const StaticSystem s2 = sphere_system(Point{2 * a - eps, 0, 0}, a);
  const double x = (2 * a - eps) / 2;
  const Point q{x, std::sqrt(a * a - x * x), 0};
  const CleanReport r = clean_check(s1, s2, q);
  CHECK(r.status == Cleanliness::Clean);
  CHECK(r.virtual_dim == 1);
}

TEST_CASE("orthogonal planes") {
  Rng rng(74);
  const StaticSystem p1 = plane(Covector{1, 0, 0}, Point{0, 0, 0});
  const StaticSystem p2 = plane(Covector{0, 1, 0}, Point{0, 0, 0});
  const Point q{0, 0, 5};
  const CleanReport r = clean_check(p1, p2, q);
  CHECK(r.status == Cleanliness::Clean);
  CHECK(r.virtual_dim == 1);
  const SumReport sr = sum_check(p1, p2, q, 200, rng);
  CHECK(sr.trials == 200);
  CHECK(sr.max_violation < 1e-10);
  CHECK(sr.equivalence_failures == 0);
  const ComposedConstitutive cc = composed_constitutive(p1, p2, q);
  CHECK(cc.status == Cleanliness::Clean);
  CHECK(cc.residual(p1.space, Covector{2, -3, 0}) < 1e-12);
  CHECK(cc.residual(p1.space, Covector{0, 0, 1}) > 0.5);
}

TEST_CASE("sum of constitutive sets at a clean point") {
  Rng rng(75);
  const StaticSystem s1 = sphere_system(Point{0, 0, 0}, 1.0);
  const StaticSystem s2 = sphere_system(Point{1, 0, 0}, 1.0);
  const SumReport r = sum_check(s1, s2, Point{0.5, std::sqrt(0.75), 0}, 300, rng);
  CHECK(r.max_violation < 1e-10);
  CHECK(r.equivalence_failures == 0);
}

TEST_CASE("inequality constraints are rejected by the cleanliness check") {
  const StaticSystem corner = make_corner(Point{0, 0, 0}, Vector{1, 0, 0}, Vector{0, 1, 0});
  const StaticSystem s1 = sphere_system(Point{0, 0, 1}, 1.0);
  CHECK_THROWS_AS(clean_check(corner, s1, Point{0, 0, 0}), DomainError);
}
