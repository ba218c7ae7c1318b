#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vwork/geometry.hpp"
#include "vwork/random.hpp"
#include "vwork/systems.hpp"

namespace vwork {

enum class Membership { In, Out, Boundary };
std::string to_string(Membership m);

enum class ConstitutiveMode {
  ExactSpring,
  ExactBilinear,
  ExactFrictionBall,
  ExactRod,
  ExactCorner,
  ExactSkate,
  ExactCoulombCone,
  Generic
};
std::string to_string(ConstitutiveMode m);

/// Normalized margin of f against S_q. `residual` is the norm of
/// (theta - f) restricted to the lineality space of V(q); `support` is
/// inf (theta(v) - <f, v>) over unit v in the pointed part of V(q) (or over
/// all unit v in V(q) when theta is not linear there). `support` is +inf when
/// that part is {0}.
struct Margin {
  double residual = 0.0;
  double support = 0.0;
  /// -residual when residual > tol, support otherwise.
  double value(double tol) const;
};

/// The constitutive set S of a static system: pairs (q, f) with
/// theta(v) - <f, v> >= 0 for every v in V(q).
class ConstitutiveSet {
 public:
  /// Picks the exact mode matching the catalog system, Generic otherwise.
  explicit ConstitutiveSet(StaticSystem sys, double tol = 1e-7);
  ConstitutiveSet(StaticSystem sys, ConstitutiveMode mode, double tol = 1e-7, std::uint64_t seed = 0);

  const StaticSystem& system() const { return sys_; }
  ConstitutiveMode mode() const { return mode_; }
  double tol() const { return tol_; }

  /// Throws DomainError when q is outside C0.
  Margin margin(const Point& q, const Covector& f) const;
  Membership contains(const Point& q, const Covector& f) const;

  /// Boundary covectors of S_q. A singleton S_q of a potential-type system
  /// is returned as is; throws DomainError when S_q has no relative
  /// boundary (an affine S_q, or S_q = {0} from constraint reactions).
  std::vector<Covector> sample_boundary(const Point& q, std::size_t n, Rng& rng) const;

 private:
  Margin exact_margin(const Point& q, const Covector& f) const;
  Margin generic_margin(const Point& q, const Covector& f) const;

  StaticSystem sys_;
  ConstitutiveMode mode_;
  double tol_;
  std::uint64_t seed_ = 0;
};

/// Skate constitutive set at q = (x, y, angle): In iff <f, phi> = 0 and
/// tau = 0 within tol, phi the blade direction.
Membership skate_constitutive(const Point& q, const Covector& f, double tau, double tol = 1e-7);

}  // namespace vwork
