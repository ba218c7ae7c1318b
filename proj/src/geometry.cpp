#include "vwork/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

namespace vwork {

namespace detail {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
}

}  // namespace detail

Vector Vector::operator+(const Vector& o) const {
  detail::require_same_dim(dim(), o.dim(), "Vector +");
  return Vector(c_ + o.c_);
}
Vector Vector::operator-(const Vector& o) const {
  detail::require_same_dim(dim(), o.dim(), "Vector -");
  return Vector(c_ - o.c_);
}
Vector& Vector::operator+=(const Vector& o) {
  detail::require_same_dim(dim(), o.dim(), "Vector +=");
  c_ += o.c_;
  return *this;
}
Covector Covector::operator+(const Covector& o) const {
  detail::require_same_dim(dim(), o.dim(), "Covector +");
  return Covector(c_ + o.c_);
}
Covector Covector::operator-(const Covector& o) const {
  detail::require_same_dim(dim(), o.dim(), "Covector -");
  return Covector(c_ - o.c_);
}
Vector Point::operator-(const Point& o) const {
  detail::require_same_dim(dim(), o.dim(), "Point -");
  return Vector(c_ - o.c_);
}
Point Point::operator+(const Vector& v) const {
  detail::require_same_dim(dim(), v.dim(), "Point +");
  return Point(c_ + v.coords());
}
Point Point::operator-(const Vector& v) const {
  detail::require_same_dim(dim(), v.dim(), "Point -");
  return Point(c_ - v.coords());
}

double pair(const Covector& f, const Vector& v) {
  detail::require_same_dim(f.dim(), v.dim(), "pair");
  return f.coords().dot(v.coords());
}

EuclideanSpace::EuclideanSpace(std::size_t dim)
    : EuclideanSpace(Mat::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))) {}

EuclideanSpace::EuclideanSpace(Mat metric) : dim_(static_cast<std::size_t>(metric.rows())), metric_(std::move(metric)) {
  if (dim_ == 0) throw DomainError("EuclideanSpace: dimension must be positive");
  if (metric_.rows() != metric_.cols()) throw DimensionError("EuclideanSpace: metric must be square");
  if ((metric_ - metric_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw DomainError("EuclideanSpace: metric is not symmetric");
  llt_.compute(metric_);
  if (llt_.info() != Eigen::Success) throw DomainError("EuclideanSpace: metric is not positive definite");
  standard_ = metric_.isIdentity(0.0);
}

Covector EuclideanSpace::metric_apply(const Vector& v) const {
  check_dim(v.dim(), "metric_apply");
  return Covector(metric_ * v.coords());
}

Vector EuclideanSpace::metric_invert(const Covector& f) const {
  check_dim(f.dim(), "metric_invert");
  return Vector(llt_.solve(f.coords()));
}

double EuclideanSpace::inner(const Vector& u, const Vector& v) const {
  check_dim(u.dim(), "inner");
  check_dim(v.dim(), "inner");
  return u.coords().dot(metric_ * v.coords());
}

double EuclideanSpace::norm(const Vector& v) const { return std::sqrt(std::max(0.0, inner(v, v))); }

double EuclideanSpace::dual_norm(const Covector& f) const {
  check_dim(f.dim(), "dual_norm");
  return std::sqrt(std::max(0.0, f.coords().dot(llt_.solve(f.coords()))));
}

Vector EuclideanSpace::normalized(const Vector& v) const {
  const double n = norm(v);
  if (n == 0.0) throw DomainError("normalized: zero vector");
  return (1.0 / n) * v;
}

EuclideanSpace EuclideanSpace::product(const EuclideanSpace& other) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  const auto m = static_cast<Eigen::Index>(other.dim_);
  Mat g = Mat::Zero(n + m, n + m);
  g.topLeftCorner(n, n) = metric_;
  g.bottomRightCorner(m, m) = other.metric_;
  return EuclideanSpace(std::move(g));
}

Mat EuclideanSpace::orthonormal_basis(const Mat& columns, double rel_tol) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  if (columns.cols() == 0) return Mat(n, 0);
  if (columns.rows() != n) throw DimensionError("orthonormal_basis: row count must equal dim");
  // In coordinates y = L^T v the metric becomes Euclidean.
  const Mat lt = llt_.matrixU();
  const Mat y = lt * columns;
  Eigen::JacobiSVD<Mat> svd(y, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  const double smax = s.size() ? s[0] : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > rel_tol * smax && s[i] > 1e-300) ++rank;
  const Mat u = svd.matrixU().leftCols(rank);
  return llt_.matrixU().solve(u);
}

Mat EuclideanSpace::annihilated_subspace(const Mat& covector_rows, double rel_tol) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  if (covector_rows.rows() == 0) return orthonormal_basis(Mat::Identity(n, n));
  if (covector_rows.cols() != n) throw DimensionError("annihilated_subspace: column count must equal dim");
  Eigen::JacobiSVD<Mat> svd(covector_rows, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  const double smax = s.size() ? s[0] : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > rel_tol * smax && s[i] > 1e-300) ++rank;
  const Mat null = svd.matrixV().rightCols(n - rank);
  return orthonormal_basis(null);
}

Mat EuclideanSpace::orthogonal_complement(const Mat& columns, double rel_tol) const {
  if (columns.cols() == 0) return annihilated_subspace(Mat(0, static_cast<Eigen::Index>(dim_)), rel_tol);
  const Mat basis = orthonormal_basis(columns, rel_tol);
  if (basis.cols() == 0) return annihilated_subspace(Mat(0, static_cast<Eigen::Index>(dim_)), rel_tol);
  return annihilated_subspace((metric_ * basis).transpose(), rel_tol);
}

}  // namespace vwork
