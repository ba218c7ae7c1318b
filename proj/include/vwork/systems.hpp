#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vwork/geometry.hpp"
#include "vwork/jets.hpp"
#include "vwork/virtual_set.hpp"

namespace vwork {

/// Scalar function on Q evaluable on points and on per-coordinate jets, with
/// its differential.
struct ScalarField {
  std::function<double(std::span<const double>)> value;
  std::function<Jet(std::span<const Jet>)> value_jet;
  std::function<Vec(std::span<const double>)> gradient;
  /// Differential along per-coordinate jets; optional.
  std::function<std::vector<Jet>(std::span<const Jet>)> gradient_jet;

  double operator()(const Point& q) const { return value(q.span()); }
  Covector differential(const Point& q) const { return Covector(gradient(q.span())); }
};

/// Builds a ScalarField from generic callables `f(span<const T>) -> T` and
/// `grad(span<const T>) -> std::vector<T>`, usable with T = double and T = Jet.
template <class F, class G>
ScalarField make_scalar_field(F f, G grad) {
  ScalarField s;
  s.value = [f](std::span<const double> x) { return f(x); };
  s.value_jet = [f](std::span<const Jet> x) { return f(x); };
  s.gradient = [grad](std::span<const double> x) -> Vec {
    const std::vector<double> g = grad(x);
    return Eigen::Map<const Vec>(g.data(), static_cast<Eigen::Index>(g.size()));
  };
  s.gradient_jet = [grad](std::span<const Jet> x) { return grad(x); };
  return s;
}

/// Infinitesimal work theta(q, v), positive homogeneous in v.
struct WorkForm {
  std::function<double(std::span<const double>, std::span<const double>)> eval;
  /// Optional jet evaluation along (q(s), v(s)); empty when unavailable.
  std::function<Jet(std::span<const Jet>, std::span<const Jet>)> eval_jet;
  /// theta(q, .) is linear (potential and bilinear forms, zero form).
  bool linear = false;
  bool zero = false;

  double operator()(const Point& q, const Vector& v) const { return eval(q.span(), v.span()); }
};

template <class F>
WorkForm make_work_form(F f, bool linear) {
  WorkForm w;
  w.eval = [f](std::span<const double> q, std::span<const double> v) { return f(q, v); };
  w.eval_jet = [f](std::span<const Jet> q, std::span<const Jet> v) { return f(q, v); };
  w.linear = linear;
  return w;
}

WorkForm zero_work_form();
WorkForm sum(const WorkForm& a, const WorkForm& b);
WorkForm scaled(const WorkForm& a, double lambda);
/// theta(q, v) = <dU(q), v>.
WorkForm work_form_of(const ScalarField& potential);

/// A defining relation of C0: value == 0 (equality) or value >= 0 (inequality).
struct Constraint {
  enum class Kind { Equality, Inequality };
  Kind kind = Kind::Equality;
  ScalarField field;
  std::string label;
};

/// Parameters of the catalog constructors, kept for closed-form constitutive
/// sets and reporting.
struct SpringParams {
  Point center;
  double stiffness;
};
struct BilinearParams {
  Point center;
  Mat omega;
};
struct FrictionParams {
  Mat rho;
};
struct RodParams {
  Point center;
  double length;
};
struct CornerParams {
  Point vertex;
  Vector u1, u2;
};
struct SkateParams {};
struct CoulombParams {
  Point origin;
  Vector normal;
  double coefficient;
};
using CatalogParams = std::variant<std::monostate, SpringParams, BilinearParams, FrictionParams, RodParams,
                                   CornerParams, SkateParams, CoulombParams>;

/// Constraints C0 and V with a work form theta on V. Immutable after
/// construction; all members are pure functions.
struct StaticSystem {
  EuclideanSpace space{1};
  std::string kind;
  std::function<bool(const Point&)> admissible;
  std::function<VirtualSet(const Point&)> virtual_set;
  WorkForm theta;
  std::optional<ScalarField> potential;
  std::vector<Constraint> constraints;
  /// Declared order of the constraints (0 holonomic, 1 non-holonomic).
  int constraint_order = 0;
  CatalogParams params;

  std::size_t dim() const { return space.dim(); }
  VirtualSet V(const Point& q) const { return virtual_set(q); }
  /// Throws DomainError when q is outside C0.
  void require_admissible(const Point& q, const char* what) const;
};

/// Tolerance on constraint values used for C0 membership and active sets.
inline constexpr double kConstraintTol = 1e-9;

StaticSystem make_free(const EuclideanSpace& space);
StaticSystem make_spring(const Point& q0, double k, const EuclideanSpace& space);
StaticSystem make_spring(const Point& q0, double k);
StaticSystem make_bilinear(const Point& q0, const Mat& omega, const EuclideanSpace& space);
StaticSystem make_bilinear(const Point& q0, const Mat& omega);
StaticSystem make_friction(const Mat& rho, const EuclideanSpace& space);
StaticSystem make_friction(const Mat& rho);
StaticSystem make_rod(const Point& q0, double a, const EuclideanSpace& space);
StaticSystem make_rod(const Point& q0, double a);
StaticSystem make_corner(const Point& q0, const Vector& u1, const Vector& u2, const EuclideanSpace& space);
StaticSystem make_corner(const Point& q0, const Vector& u1, const Vector& u2);
/// Skate on X x D with coordinates (x, y, angle).
StaticSystem make_skate();
StaticSystem make_coulomb(const Point& q0, const Vector& k, double nu, const EuclideanSpace& space);
StaticSystem make_coulomb(const Point& q0, const Vector& k, double nu);

/// Monomial coeff * prod x_i^{exponents[i]} in Cartesian coordinates.
struct Monomial {
  double coeff;
  std::vector<int> exponents;
};
ScalarField polynomial_field(std::size_t dim, const std::vector<Monomial>& terms);
/// Unconstrained potential system with a polynomial internal energy.
StaticSystem make_potential_poly(const EuclideanSpace& space, const std::vector<Monomial>& terms);

/// Holonomic system: C0 = {c_i = 0} ∩ {d_j >= 0}, V = tangent cone of C0
/// (linear subspace where only equalities are active), optional potential.
StaticSystem make_holonomic(const EuclideanSpace& space, std::vector<Constraint> constraints,
                            std::optional<ScalarField> potential, std::string kind);

/// Equality constraint <n, q - q0> = 0 (affine, exact on jets).
Constraint affine_constraint(const Covector& n, const Point& q0, Constraint::Kind kind, std::string label);
/// Equality constraint |q_block - center|_g^2 - a^2 = 0 on the coordinate
/// block starting at `offset` of length center.dim().
Constraint sphere_constraint(const EuclideanSpace& block_space, std::size_t offset, std::size_t total_dim,
                             const Point& center, double a, std::string label);

}  // namespace vwork
