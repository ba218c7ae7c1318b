#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstddef>
#include <initializer_list>
#include <span>

#include "vwork/error.hpp"

namespace vwork {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace detail {

template <class Derived>
class Coords {
 public:
  Coords() = default;
  explicit Coords(Vec c) : c_(std::move(c)) {}
  Coords(std::initializer_list<double> xs) : c_(static_cast<Eigen::Index>(xs.size())) {
    Eigen::Index i = 0;
    for (double x : xs) c_[i++] = x;
  }

  static Derived zero(std::size_t dim) { return Derived(Vec::Zero(static_cast<Eigen::Index>(dim))); }

  std::size_t dim() const { return static_cast<std::size_t>(c_.size()); }
  double operator[](std::size_t i) const { return c_[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return c_[static_cast<Eigen::Index>(i)]; }
  const Vec& coords() const { return c_; }
  Vec& coords() { return c_; }
  std::span<const double> span() const { return {c_.data(), dim()}; }

 protected:
  Vec c_;
};

void require_same_dim(std::size_t a, std::size_t b, const char* what);

}  // namespace detail


/// Element of the model vector space W (a displacement or virtual displacement).
class Vector : public detail::Coords<Vector> {
 public:
  using Coords::Coords;
  Vector operator+(const Vector& o) const;
  Vector operator-(const Vector& o) const;
  Vector operator-() const { return Vector(-c_); }
  Vector& operator+=(const Vector& o);
  friend Vector operator*(double s, const Vector& v) { return Vector(s * v.c_); }
};

/// Element of the dual space W*.
class Covector : public detail::Coords<Covector> {
 public:
  using Coords::Coords;
  Covector operator+(const Covector& o) const;
  Covector operator-(const Covector& o) const;
  Covector operator-() const { return Covector(-c_); }
  friend Covector operator*(double s, const Covector& f) { return Covector(s * f.c_); }
};

/// Point of the affine configuration space Q.
class Point : public detail::Coords<Point> {
 public:
  using Coords::Coords;
  Vector operator-(const Point& o) const;
  Point operator+(const Vector& v) const;
  Point operator-(const Vector& v) const;
};

/// Canonical pairing <f, v>.
double pair(const Covector& f, const Vector& v);

/// Affine Euclidean space: dimension plus an SPD metric g on the model space.
/// Immutable after construction.
class EuclideanSpace {
 public:
  explicit EuclideanSpace(std::size_t dim);
  /// Throws DomainError unless `metric` is symmetric (1e-12) and positive definite.
  explicit EuclideanSpace(Mat metric);

  std::size_t dim() const { return dim_; }
  const Mat& metric() const { return metric_; }
  bool is_standard() const { return standard_; }

  Covector metric_apply(const Vector& v) const;
  Vector metric_invert(const Covector& f) const;

  double inner(const Vector& u, const Vector& v) const;
  double norm(const Vector& v) const;
  /// Norm of f in W* induced by g^{-1}.
  double dual_norm(const Covector& f) const;
  Vector normalized(const Vector& v) const;

  /// Q x Q' with block-diagonal metric; coordinates of `this` come first.
  EuclideanSpace product(const EuclideanSpace& other) const;

  /// g-orthonormal basis (as columns) of the span of `columns`; rank decided
  /// relative to the largest singular value.
  Mat orthonormal_basis(const Mat& columns, double rel_tol = 1e-10) const;
  /// g-orthonormal basis of {v : rows * v = 0} where rows are covectors.
  Mat annihilated_subspace(const Mat& covector_rows, double rel_tol = 1e-10) const;
  /// g-orthonormal basis of the g-orthogonal complement of span(columns).
  Mat orthogonal_complement(const Mat& columns, double rel_tol = 1e-10) const;

  void check_dim(std::size_t d, const char* what) const { detail::require_same_dim(dim_, d, what); }

 private:
  std::size_t dim_;
  Mat metric_;
  Eigen::LLT<Mat> llt_;
  bool standard_ = false;
};

}  // namespace vwork
