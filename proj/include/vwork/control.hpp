#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vwork/geometry.hpp"
#include "vwork/systems.hpp"

namespace vwork {

/// Linear-affine fibration eta(qbar) = P qbar + b of the internal space onto
/// the control space.
class Fibration {
 public:
  Fibration(EuclideanSpace total, EuclideanSpace base, Mat projection, Vec offset);
  Fibration(EuclideanSpace total, EuclideanSpace base, Mat projection);
  /// (q1, q2) -> q1 on Q x Q.
  static Fibration first_factor(const EuclideanSpace& q);

  const EuclideanSpace& total() const { return total_; }
  const EuclideanSpace& base() const { return base_; }
  const Mat& projection() const { return p_; }
  /// g-orthonormal basis of ker(T eta).
  const Mat& vertical() const { return vertical_; }

  Point project(const Point& qbar) const;
  Vector push_forward(const Vector& v) const;
  /// Some qbar with eta(qbar) = q.
  Point lift(const Point& q) const;

 private:
  EuclideanSpace total_, base_;
  Mat p_;
  Vec b_;
  Mat vertical_;
};

struct CriticalPoint {
  Point qbar;
  Point q;
  double residual = 0.0;
  std::string branch;
  /// Dimension of the critical set through qbar within the fiber (0 for an
  /// isolated point).
  std::size_t family_dim = 0;
};

struct CriticalSet {
  std::vector<CriticalPoint> points;
  std::size_t failed_seeds = 0;
  /// Set when the critical set over q has more than one point or a family.
  std::string warning;
};

/// Labels a converged critical point; the default labels everything
/// "critical".
using BranchLabeler = std::function<std::string(const CriticalPoint&)>;

/// sup over unit vertical admissible v of -theta(qbar, v), clamped at 0.
/// Exact (norm of the vertical restriction of theta) when V(qbar) is linear.
double critical_residual(const StaticSystem& bar, const Fibration& fib, const Point& qbar, std::size_t n_samples = 256,
                         std::uint64_t seed = 0);

/// Newton on the vertical stationarity conditions with equality-constraint
/// multipliers, from every seed in the fiber over q. Seeds are projected onto
/// the fiber first. Points closer than 1e-6 are merged.
CriticalSet solve_critical(const StaticSystem& bar, const Fibration& fib, const Point& q,
                           const std::vector<Point>& seeds, const BranchLabeler& label = {});

struct ReducedForce {
  Covector force;
  /// Covectors on Q (rows) annihilating T eta(V); force + span(rows) all
  /// satisfy the reduced equality.
  Mat free_directions;
  double residual = 0.0;
  bool unique() const { return free_directions.rows() == 0; }
};

/// f on Q with <f, T eta(v)> = theta(qbar, v) for v in V(qbar) (least
/// squares). Throws DomainError when qbar is not critical within tol.
ReducedForce reduced_force(const StaticSystem& bar, const Fibration& fib, const CriticalPoint& cp, double tol = 1e-7);

/// Numerical rank (singular values > 1e-8 * max) of the tangent map
/// (w, r) -> q0 + r w on T(K x R), K the unit sphere of R^3.
int singularity_rank(const Vector& w, double r);

/// Pull-back of the canonical symplectic form of Q x W* by
/// phi(w, r) = (q0 + r w, k (r - a) g(w)), from its explicit expression.
double pullback_form(const EuclideanSpace& space, double k, double a, const Vector& w, double r, const Vector& d1w,
                     double d1r, const Vector& d2w, double d2r);
/// The same value as omega_Q(T phi(d1), T phi(d2)).
double pullback_form_via_tangent_map(const EuclideanSpace& space, double k, double a, const Vector& w, double r,
                                     const Vector& d1w, double d1r, const Vector& d2w, double d2r);

}  // namespace vwork
