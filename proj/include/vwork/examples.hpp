#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vwork/control.hpp"
#include "vwork/geometry.hpp"
#include "vwork/systems.hpp"

namespace vwork {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExampleReport {
  int number = 0;
  std::string title;
  std::vector<Check> checks;
  /// Named quantities reported alongside the checks.
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::pair<std::string, std::string>> labels;
  bool passed() const;
};

inline constexpr int kExampleCount = 11;

/// Builds the n-th worked example with unit desk-scale constants and runs its
/// verification suite. Throws DomainError for n outside 1..11.
ExampleReport run_example(int n, std::uint64_t seed = 0);

/// An internal system on Q x Q controlled through its first factor.
struct ControlledSystem {
  StaticSystem system;
  Fibration fibration;
};

/// Points q1, q2 tied to the fixed q0 and to each other by three springs.
ControlledSystem three_springs(const Point& q0, double k10, double k20, double k21);

/// q1 on the line through the origin along e3, q2 in the plane normal to e3,
/// joined by an elastic rod of relaxed length a and stiffness k; q2 is held
/// to the origin by a spring k'. Q = R^3.
struct BucklingParams {
  double a = 1.0, k = 1.0, k_prime = 1.0;
};
ControlledSystem buckling_rod(const BucklingParams& p);
/// Critical set over q1 = d e3 from seeds spread over the plane; branches are
/// labelled "straight" (q2 at the origin) and "buckled".
CriticalSet buckling_critical_set(const ControlledSystem& cs, double d);
/// Bisection on whether the buckled branch is present, over d in [lo, hi].
double buckling_threshold(const BucklingParams& p, double lo, double hi, double tol);

/// q2 on the sphere of radius a about the origin (rigid rod), q1 tied to q2 by
/// a spring k. Q = R^3.
ControlledSystem tethered_rod(double a, double k);
/// Critical set over q1 from seeds spread over the sphere; branches are
/// "aligned" / "opposed" relative to q1, or "family" when q1 is the origin.
CriticalSet tethered_critical_set(const ControlledSystem& cs, double a, const Point& q1);

/// Rigid sphere constraint of radius a about `center` in R^3 with zero work.
StaticSystem sphere_system(const Point& center, double a);

}  // namespace vwork
