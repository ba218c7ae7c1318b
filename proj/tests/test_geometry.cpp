#include <doctest.h>

#include "vwork/geometry.hpp"
#include "vwork/random.hpp"

using namespace vwork;

namespace {

EuclideanSpace random_space(Rng& rng, std::size_t n) {
  Mat a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return EuclideanSpace(Mat(a * a.transpose() + Mat::Identity(a.rows(), a.cols())));
}

}  // namespace

TEST_CASE("pairing examples") {
  CHECK(pair(Covector{1, 0}, Vector{0, 1}) == 0.0);
  CHECK(pair(Covector{2, 3}, Vector{1, 1}) == 5.0);
  CHECK(pair(Covector::zero(2), Vector{4, -7}) == 0.0);
  CHECK_THROWS_AS(pair(Covector{1, 2, 3}, Vector{1, 2}), DimensionError);
}

TEST_CASE("metric application") {
  const EuclideanSpace id(2);
  const Covector f = id.metric_apply(Vector{1, 2});
  CHECK(f[0] == 1.0);
  CHECK(f[1] == 2.0);
  Mat g = Mat::Identity(2, 2) * 2.0;
  const EuclideanSpace two(g);
  const Covector h = two.metric_apply(Vector{1, 0});
  CHECK(h[0] == 2.0);
  CHECK(h[1] == 0.0);
  CHECK(two.norm(Vector{1, 0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(two.dual_norm(h) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("metric validation") {
  Mat asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(EuclideanSpace{asym}, DomainError);
  Mat indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_AS(EuclideanSpace{indef}, DomainError);
}

TEST_CASE("affine arithmetic") {
  const Point p{1, 2};
  const Point q{4, 6};
  const Vector d = q - p;
  CHECK(d[0] == 3.0);
  CHECK(d[1] == 4.0);
  const Point r = p + d;
  CHECK(r[0] == 4.0);
  CHECK(r[1] == 6.0);
  CHECK(EuclideanSpace(2).norm(d) == doctest::Approx(5.0));
}

TEST_CASE("metric round trip and symmetry on random spaces") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.index(6);
    const EuclideanSpace s = random_space(rng, n);
    const Vector u(rng.gaussian(n));
    const Vector v(rng.gaussian(n));
    const Vector back = s.metric_invert(s.metric_apply(u));
    CHECK((back.coords() - u.coords()).norm() <= 1e-9 * (1.0 + u.coords().norm()));
    const double a = pair(s.metric_apply(u), v);
    const double b = pair(s.metric_apply(v), u);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
    CHECK(pair(s.metric_apply(v), v) > 0.0);
    CHECK(a <= s.norm(u) * s.norm(v) * (1.0 + 1e-12));
    CHECK(s.dual_norm(s.metric_apply(v)) == doctest::Approx(s.norm(v)).epsilon(1e-10));
  }
}

TEST_CASE("product space is block diagonal") {
  Mat g(2, 2);
  g << 2, 0.5, 0.5, 1;
  const EuclideanSpace a(g);
  const EuclideanSpace p = a.product(EuclideanSpace(3));
  CHECK(p.dim() == 5);
  CHECK(p.metric()(0, 1) == 0.5);
  CHECK(p.metric()(2, 2) == 1.0);
  CHECK(p.metric().block(0, 2, 2, 3).norm() == 0.0);
}

TEST_CASE("bases") {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const EuclideanSpace s = random_space(rng, 5);
    Mat cols(5, 3);
    for (Eigen::Index i = 0; i < cols.size(); ++i) cols.data()[i] = rng.normal();
    cols.col(2) = cols.col(0) + 2.0 * cols.col(1);
    const Mat b = s.orthonormal_basis(cols);
    REQUIRE(b.cols() == 2);
    CHECK((b.transpose() * s.metric() * b - Mat::Identity(2, 2)).norm() < 1e-9);
    const Mat c = s.orthogonal_complement(cols);
    REQUIRE(c.cols() == 3);
    CHECK((cols.transpose() * s.metric() * c).norm() < 1e-8);
    const Mat rows = cols.transpose();
    const Mat ann = s.annihilated_subspace(rows);
    REQUIRE(ann.cols() == 3);
    CHECK((rows * ann).norm() < 1e-8);
  }
}
