#include "vwork/processes.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

namespace vwork {

namespace {

constexpr double kQuadTol = 1e-10;

Jet compose_polynomial(const Jet& p, const Jet& sigma) {
  const std::size_t k = std::min(p.order(), sigma.order());
  const Jet s = sigma.truncated(k);
  Jet r = Jet::constant(k, p[k]);
  for (std::size_t i = k; i-- > 0;) r = r * s + p[i];
  return r;
}

void check_velocity(const EuclideanSpace& space, const std::vector<Jet>& taylor) {
  if (taylor.size() != space.dim()) throw DimensionError("process Taylor data has the wrong dimension");
  if (taylor.front().order() < 1) throw DomainError("process Taylor data must include the initial velocity");
  double n = 0.0;
  for (const auto& t : taylor) n += t[1] * t[1];
  if (!(n > 0.0)) throw DomainError("process has zero initial velocity (constant processes are excluded)");
}

}  // namespace

Vector Process::initial_velocity() const {
  Vec v(static_cast<Eigen::Index>(taylor.size()));
  for (std::size_t i = 0; i < taylor.size(); ++i) v[static_cast<Eigen::Index>(i)] = taylor[i][1];
  return Vector(v);
}

Process make_process(const EuclideanSpace& space, double a, std::function<Point(double)> gamma,
                     std::function<Vector(double)> velocity, std::vector<Jet> taylor) {
  if (!(a > 0.0)) throw DomainError("process parameter length must be positive");
  check_velocity(space, taylor);
  Process p;
  p.space = space;
  p.a = a;
  p.gamma = std::move(gamma);
  p.velocity = std::move(velocity);
  p.taylor = std::move(taylor);
  const Point q0 = p.gamma(0.0);
  for (std::size_t i = 0; i < q0.dim(); ++i)
    if (std::abs(q0[i] - p.taylor[i][0]) > 1e-10 * (1.0 + std::abs(q0[i])))
      throw DomainError("gamma(0) does not match the Taylor data");
  if (space.norm(p.gamma(a) - q0) <= 1e-14 * (1.0 + q0.coords().norm()))
    throw DomainError("cyclic processes are excluded (gamma(a) = gamma(0))");
  return p;
}

Process polynomial_arc(const EuclideanSpace& space, const Point& q0, const std::vector<Vector>& coeffs, double a) {
  space.check_dim(q0.dim(), "polynomial_arc");
  if (coeffs.empty() || coeffs.size() > kMaxJetOrder) throw DimensionError("polynomial_arc: 1..8 coefficients required");
  for (const auto& c : coeffs) space.check_dim(c.dim(), "polynomial_arc");
  std::vector<Jet> taylor(space.dim(), Jet(kMaxJetOrder));
  for (std::size_t d = 0; d < space.dim(); ++d) {
    taylor[d][0] = q0[d];
    for (std::size_t i = 0; i < coeffs.size(); ++i) taylor[d][i + 1] = coeffs[i][d];
  }
  auto gamma = [q0, coeffs](double s) {
    Vec x = q0.coords();
    double sp = 1.0;
    for (const auto& c : coeffs) {
      sp *= s;
      x += sp * c.coords();
    }
    return Point(x);
  };
  auto velocity = [coeffs](double s) {
    Vec v = Vec::Zero(coeffs.front().coords().size());
    double sp = 1.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      v += static_cast<double>(i + 1) * sp * coeffs[i].coords();
      sp *= s;
    }
    return Vector(v);
  };
  return make_process(space, a, gamma, velocity, std::move(taylor));
}

Process straight_line(const EuclideanSpace& space, const Point& from, const Point& to) {
  return polynomial_arc(space, from, {to - from}, 1.0);
}

Process reparameterize(const Process& p, std::function<double(double)> sigma, std::function<double(double)> dsigma,
                       const Jet& sigma_jet, double a_new) {
  if (std::abs(sigma(0.0)) > 1e-12 || std::abs(sigma(a_new) - p.a) > 1e-9 * (1.0 + p.a))
    throw DomainError("reparameterization must map [0, a_new] onto [0, a]");
  if (!(sigma_jet[1] > 0.0)) throw DomainError("reparameterization must be increasing at 0");
  std::vector<Jet> taylor;
  for (const auto& t : p.taylor) taylor.push_back(compose_polynomial(t, sigma_jet));
  auto g = p.gamma;
  auto v = p.velocity;
  return make_process(
      p.space, a_new, [g, sigma](double s) { return g(sigma(s)); },
      [v, sigma, dsigma](double s) { return dsigma(s) * v(sigma(s)); }, std::move(taylor));
}

Process restrict(const Process& p, double s_star) {
  if (!(s_star > 0.0) || s_star > p.a) throw DomainError("restrict: split point must lie in (0, a]");
  Process r = p;
  r.a = s_star;
  return r;
}

Process tail(const Process& p, double s_star) {
  if (!(s_star >= 0.0) || !(s_star < p.a)) throw DomainError("tail: split point must lie in [0, a)");
  auto g = p.gamma;
  auto v = p.velocity;
  const std::size_t k = std::min<std::size_t>(4, p.taylor_order());
  std::vector<Jet> taylor;
  for (std::size_t d = 0; d < p.space.dim(); ++d)
    taylor.push_back(jet_of_function([g, s_star, d](double s) { return g(s_star + s)[d]; }, k, p.a - s_star));
  const Point q = g(s_star);
  for (std::size_t d = 0; d < q.dim(); ++d) taylor[d][0] = q[d];
  return make_process(
      p.space, p.a - s_star, [g, s_star](double s) { return g(s_star + s); },
      [v, s_star](double s) { return v(s_star + s); }, std::move(taylor));
}

WorkSamples work_along(const StaticSystem& sys, const Process& p, std::size_t n_grid) {
  sys.space.check_dim(p.space.dim(), "work_along");
  if (n_grid == 0) throw DomainError("work_along: n_grid must be positive");
  auto integrand = [&](double s) {
    const Point q = p.gamma(s);
    const Vector v = p.velocity(s);
    if (!sys.admissible(q) || !sys.V(q).contains(sys.space, v, 1e-8)) {
      std::ostringstream os;
      os << "process is inadmissible at s = " << s;
      throw DomainError(os.str());
    }
    return sys.theta(q, v);
  };
  WorkSamples out;
  out.grid.push_back(0.0);
  out.w.push_back(0.0);
  double acc = 0.0;
  for (std::size_t j = 1; j <= n_grid; ++j) {
    const double lo = p.a * static_cast<double>(j - 1) / static_cast<double>(n_grid);
    const double hi = p.a * static_cast<double>(j) / static_cast<double>(n_grid);
    double err = 0.0, l1 = 0.0;
    const double width = hi - lo;
    auto unit = [&](double u) { return width * integrand(lo + width * u); };
    const double piece = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(unit, 0.0, 1.0, 15, 1e-13, &err, &l1);
    if (err > kQuadTol * std::max(1.0, l1)) throw NumericalError("work_along: quadrature did not converge");
    acc += piece;
    out.grid.push_back(hi);
    out.w.push_back(acc);
  }
  out.total = acc;
  return out;
}

Jet work_jet(const StaticSystem& sys, const Process& p, std::size_t k) {
  if (k < 1 || k > kMaxJetOrder) throw DimensionError("work_jet: order must be in 1..8");
  sys.space.check_dim(p.space.dim(), "work_jet");
  if (p.taylor_order() < k) throw DimensionError("work_jet: process Taylor data is shorter than the requested order");
  Jet integrand;
  if (sys.theta.eval_jet) {
    std::vector<Jet> q, v;
    for (const auto& t : p.taylor) {
      q.push_back(t.truncated(k - 1));
      v.push_back(t.derivative().truncated(k - 1));
    }
    integrand = sys.theta.eval_jet(q, v);
  } else {
    auto f = [&](double s) { return sys.theta(p.gamma(s), p.velocity(s)); };
    integrand = jet_of_function(f, k - 1, p.a);
  }
  return jet_antiderivative(integrand);
}

}  // namespace vwork
