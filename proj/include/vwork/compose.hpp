#pragma once

#include <cstdint>
#include <string>

#include "vwork/geometry.hpp"
#include "vwork/random.hpp"
#include "vwork/systems.hpp"

namespace vwork {

/// C0 = C0_1 ∩ C0_2, V = V_1 ∩ V_2, theta = theta_1 + theta_2 on V.
/// Throws DimensionError unless both systems live on the same space.
StaticSystem compose(const StaticSystem& a, const StaticSystem& b);

/// Sum of scalar fields (value, jets and gradients).
ScalarField add_fields(const ScalarField& a, const ScalarField& b);

enum class Cleanliness { Clean, NotClean };
std::string to_string(Cleanliness c);

struct CleanReport {
  Cleanliness status = Cleanliness::Clean;
  /// dim(V_1(q) ∩ V_2(q)).
  std::size_t virtual_dim = 0;
  /// Dimension of the tangent set of C0_1 ∩ C0_2 at q.
  std::size_t tangent_dim = 0;
  /// Rank of the stacked constraint Jacobian.
  std::size_t jacobian_rank = 0;
};

/// Compares V_1(q) ∩ V_2(q) with the tangent set of C0_1 ∩ C0_2 at q. When
/// the stacked equality Jacobian J is rank deficient, the tangent set is cut
/// down by v^T (sum_i lambda_i H_i) v = 0 for lambda in the left null space of
/// J (H_i the constraint Hessians). Requires equality constraints carrying
/// the constraint sets and linear V.
CleanReport clean_check(const StaticSystem& a, const StaticSystem& b, const Point& q);

struct SumReport {
  std::size_t trials = 0;
  /// Max over members f of S_q of the violation of f = f1 + f2,
  /// f1 in S_1q, f2 in S_2q for the decomposition built from complements.
  double max_violation = 0.0;
  /// Random covectors whose membership in S_q disagreed with least-squares
  /// decomposability into S_1q + S_2q.
  std::size_t equivalence_failures = 0;
};

/// Checks S_q = S_1q + S_2q on random covectors. Requires V_1(q), V_2(q)
/// linear subspaces and linear work forms; throws DomainError otherwise.
SumReport sum_check(const StaticSystem& a, const StaticSystem& b, const Point& q, std::size_t trials, Rng& rng);

/// S_q of the composed system as the affine set particular + annihilator of
/// the g-orthonormal basis `virtual_basis` (V_1(q) ∩ V_2(q)).
struct ComposedConstitutive {
  Cleanliness status = Cleanliness::Clean;
  Mat virtual_basis;
  Covector particular;
  std::string warning;
  /// Equality residual of f on virtual_basis.
  double residual(const EuclideanSpace& space, const Covector& f) const;
};

/// In the NotClean case the set is generated by V_1 ∩ V_2 (not by the
/// tangent set of C0) and carries a warning.
ComposedConstitutive composed_constitutive(const StaticSystem& a, const StaticSystem& b, const Point& q);

}  // namespace vwork
