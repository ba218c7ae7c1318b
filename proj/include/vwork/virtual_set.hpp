#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "vwork/geometry.hpp"
#include "vwork/random.hpp"

namespace vwork {

class VirtualSet;

/// V(q) = W.
struct FullSpace {};

/// V(q) = span of the columns of `basis`.
struct LinearSubspace {
  Mat basis;
};

/// V(q) = {v : <n_i, v> >= 0 for each row n_i of `normals`, <e_j, v> = 0 for
/// each row e_j of `equalities`}. Rows are covectors.
struct HalfSpaceCone {
  Mat normals;
  Mat equalities;
};

/// V(q) = {v : <g(k), v> >= nu * sqrt(|v|^2 - <g(k), v>^2)} with |k| = 1.
struct FrictionCone {
  Vector normal;
  double coefficient = 0.0;
};

/// Skate distribution: translations along the blade direction plus free
/// rotation; stored as the basis of that plane in ambient coordinates.
struct SkateDistribution {
  Mat basis;
};

/// Membership predicate plus a sampler of unit members.
struct CustomSet {
  std::function<bool(const Vector&)> contains;
  std::function<Vector(Rng&)> sample_unit;
  bool reversible = false;
};

/// Pointwise intersection of cones (membership is conjunctive).
struct Intersection {
  std::vector<VirtualSet> parts;
};

/// The admissible virtual displacements at a single configuration. Every
/// alternative is a cone containing the zero vector.
class VirtualSet {
 public:
  using Variant =
      std::variant<FullSpace, LinearSubspace, HalfSpaceCone, FrictionCone, SkateDistribution, CustomSet, Intersection>;

  VirtualSet() : v_(FullSpace{}) {}
  template <class T>
  VirtualSet(T alt) : v_(std::move(alt)) {}

  const Variant& variant() const { return v_; }
  std::string kind() const;

  /// Membership with tolerance `tol` relative to |v|.
  bool contains(const EuclideanSpace& space, const Vector& v, double tol = 1e-9) const;
  /// v in V implies -v in V.
  bool is_reversible() const;
  /// Linear subspace alternatives (full space, subspaces, skate, cones
  /// without one-sided normals).
  bool is_linear() const;
  /// g-orthonormal basis of the largest linear subspace contained in V.
  Mat lineality(const EuclideanSpace& space) const;
  /// g-nearest member of V. Custom sets return v if it is a member and the
  /// zero vector otherwise.
  Vector project(const EuclideanSpace& space, const Vector& v) const;
  /// Unit members: structural generators first (both signs of lineality
  /// directions, extreme rays, pairwise midpoints), then random members.
  std::vector<Vector> sample_unit(const EuclideanSpace& space, Rng& rng, std::size_t n_random) const;
  /// True when V = {0}.
  bool is_trivial(const EuclideanSpace& space) const;

 private:
  Variant v_;
};

/// g-orthonormal basis of span(a) ∩ span(b).
Mat intersect_subspaces(const EuclideanSpace& space, const Mat& a, const Mat& b);

}  // namespace vwork
