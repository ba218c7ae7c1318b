#pragma once

#include <functional>
#include <vector>

#include "vwork/geometry.hpp"
#include "vwork/jets.hpp"
#include "vwork/systems.hpp"

namespace vwork {

/// Oriented arc s -> gamma(s), s in [0, a], with Taylor data at s = 0.
struct Process {
  EuclideanSpace space{1};
  double a = 1.0;
  std::function<Point(double)> gamma;
  std::function<Vector(double)> velocity;
  /// Per-coordinate jets of gamma at 0.
  std::vector<Jet> taylor;

  Point start() const { return gamma(0.0); }
  Point end() const { return gamma(a); }
  Vector initial_velocity() const;
  std::size_t taylor_order() const { return taylor.empty() ? 0 : taylor.front().order(); }
};

/// gamma(s) = q0 + sum_{i>=1} s^i c_i with coeffs = (c_1, c_2, ...). Throws
/// DomainError if c_1 = 0 or the arc is closed.
Process polynomial_arc(const EuclideanSpace& space, const Point& q0, const std::vector<Vector>& coeffs, double a);
Process straight_line(const EuclideanSpace& space, const Point& from, const Point& to);

/// Arc from callables; the Taylor data must be consistent with gamma.
Process make_process(const EuclideanSpace& space, double a, std::function<Point(double)> gamma,
                     std::function<Vector(double)> velocity, std::vector<Jet> taylor);

/// s -> gamma(sigma(s)) on [0, a_new] with sigma increasing, sigma(0) = 0 and
/// sigma(a_new) = p.a. `sigma_jet` is the Taylor data of sigma at 0.
Process reparameterize(const Process& p, std::function<double(double)> sigma, std::function<double(double)> dsigma,
                       const Jet& sigma_jet, double a_new);

/// Initial segment on [0, s_star].
Process restrict(const Process& p, double s_star);
/// Tail on [s_star, a] re-based to start at gamma(s_star), parameter s - s_star.
Process tail(const Process& p, double s_star);

struct WorkSamples {
  std::vector<double> grid;
  std::vector<double> w;
  double total = 0.0;
};

/// w(s_j) = integral of theta(gamma, gamma') on [0, s_j] over a uniform grid
/// of n_grid intervals. Throws DomainError at the first inadmissible node.
WorkSamples work_along(const StaticSystem& sys, const Process& p, std::size_t n_grid = 8);

/// Jet of order k of s -> w(s) at 0. Uses jet evaluation of theta when
/// available, finite differences of the integrand otherwise.
Jet work_jet(const StaticSystem& sys, const Process& p, std::size_t k);

}  // namespace vwork
