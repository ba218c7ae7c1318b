#include "vwork/legendre.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>

namespace vwork {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kStarts = 64;
constexpr int kIterations = 200;

bool active(const Constraint& c, const Point& q) {
  const double scale = std::max(1.0, c.field.gradient(q.span()).norm());
  return c.field(q) <= kConstraintTol * scale;
}

ConstitutiveMode exact_mode_for(const StaticSystem& sys) {
  return std::visit(
      [](const auto& p) -> ConstitutiveMode {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SpringParams>) return ConstitutiveMode::ExactSpring;
        if constexpr (std::is_same_v<T, BilinearParams>) return ConstitutiveMode::ExactBilinear;
        if constexpr (std::is_same_v<T, FrictionParams>) return ConstitutiveMode::ExactFrictionBall;
        if constexpr (std::is_same_v<T, RodParams>) return ConstitutiveMode::ExactRod;
        if constexpr (std::is_same_v<T, CornerParams>) return ConstitutiveMode::ExactCorner;
        if constexpr (std::is_same_v<T, SkateParams>) return ConstitutiveMode::ExactSkate;
        if constexpr (std::is_same_v<T, CoulombParams>) return ConstitutiveMode::ExactCoulombCone;
        return ConstitutiveMode::Generic;
      },
      sys.params);
}

void require_mode(const StaticSystem& sys, ConstitutiveMode mode) {
  if (mode != ConstitutiveMode::Generic && exact_mode_for(sys) != mode)
    throw DomainError("constitutive mode " + to_string(mode) + " does not match system kind " + sys.kind);
}

// Covector c with c(b_j) = theta(q, b_j) on a g-orthonormal basis and
// c = 0 on its g-orthogonal complement.
Covector theta_on_basis(const StaticSystem& sys, const Point& q, const Mat& b) {
  Vec c = Vec::Zero(static_cast<Eigen::Index>(sys.dim()));
  for (Eigen::Index j = 0; j < b.cols(); ++j) c += sys.theta(q, Vector(Vec(b.col(j)))) * (sys.space.metric() * b.col(j));
  return Covector(c);
}

double restricted_residual(const StaticSystem& sys, const Point& q, const Covector& f, const Mat& b) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    const Vector v(Vec(b.col(j)));
    const double r = sys.theta(q, v) - pair(f, v);
    acc += r * r;
  }
  return std::sqrt(acc);
}

Vec remove_component(const EuclideanSpace& space, const Mat& onb, const Vec& v) {
  if (onb.cols() == 0) return v;
  return v - onb * (onb.transpose() * (space.metric() * v));
}

// Multi-start projected descent of h over {unit v in the cone given by proj}.
template <class H, class P>
double sphere_descent(const EuclideanSpace& space, const std::vector<Vec>& starts, H h, P proj, bool linear) {
  const auto n = static_cast<Eigen::Index>(space.dim());
  auto grad = [&](const Vec& v) {
    Vec g(n);
    if (linear) {
      for (Eigen::Index i = 0; i < n; ++i) g[i] = h(Vec::Unit(n, i));
    } else {
      const double step = 1e-6;
      for (Eigen::Index i = 0; i < n; ++i) g[i] = (h(v + step * Vec::Unit(n, i)) - h(v - step * Vec::Unit(n, i))) / (2 * step);
    }
    return space.metric_invert(Covector(g)).coords();
  };
  auto unit = [&](const Vec& y) -> std::optional<Vec> {
    const Vec p = proj(y);
    const double pn = space.norm(Vector(p));
    if (pn < 1e-12) return std::nullopt;
    return Vec(p / pn);
  };
  const Vec gl = linear ? grad(Vec::Zero(n)) : Vec();
  double best = kInf;
  for (const Vec& s : starts) {
    auto v0 = unit(s);
    if (!v0) continue;
    Vec v = *v0;
    double hv = h(v);
    double t = 1.0;
    for (int it = 0; it < kIterations && t > 1e-13; ++it) {
      const Vec d = linear ? gl : grad(v);
      auto cand = unit(v - t * d);
      if (cand && h(*cand) < hv) {
        v = *cand;
        hv = h(v);
        t = std::min(2.0 * t, 1e3);
      } else {
        t *= 0.5;
      }
    }
    best = std::min(best, hv);
  }
  return best;
}

}  // namespace

std::string to_string(Membership m) {
  switch (m) {
    case Membership::In:
      return "In";
    case Membership::Out:
      return "Out";
    case Membership::Boundary:
      return "Boundary";
  }
  return "?";
}

std::string to_string(ConstitutiveMode m) {
  switch (m) {
    case ConstitutiveMode::ExactSpring:
      return "ExactSpring";
    case ConstitutiveMode::ExactBilinear:
      return "ExactBilinear";
    case ConstitutiveMode::ExactFrictionBall:
      return "ExactFrictionBall";
    case ConstitutiveMode::ExactRod:
      return "ExactRod";
    case ConstitutiveMode::ExactCorner:
      return "ExactCorner";
    case ConstitutiveMode::ExactSkate:
      return "ExactSkate";
    case ConstitutiveMode::ExactCoulombCone:
      return "ExactCoulombCone";
    case ConstitutiveMode::Generic:
      return "Generic";
  }
  return "?";
}

double Margin::value(double tol) const { return residual > tol ? -residual : support; }

ConstitutiveSet::ConstitutiveSet(StaticSystem sys, double tol)
    : sys_(std::move(sys)), mode_(exact_mode_for(sys_)), tol_(tol) {}

ConstitutiveSet::ConstitutiveSet(StaticSystem sys, ConstitutiveMode mode, double tol, std::uint64_t seed)
    : sys_(std::move(sys)), mode_(mode), tol_(tol), seed_(seed) {
  require_mode(sys_, mode_);
}

Margin ConstitutiveSet::margin(const Point& q, const Covector& f) const {
  sys_.require_admissible(q, "ConstitutiveSet::margin");
  sys_.space.check_dim(f.dim(), "ConstitutiveSet::margin");
  return mode_ == ConstitutiveMode::Generic ? generic_margin(q, f) : exact_margin(q, f);
}

Membership ConstitutiveSet::contains(const Point& q, const Covector& f) const {
  const Margin m = margin(q, f);
  if (m.residual > tol_) return Membership::Out;
  if (m.support >= tol_) return Membership::In;
  if (m.support <= -tol_) return Membership::Out;
  return Membership::Boundary;
}

Margin ConstitutiveSet::exact_margin(const Point& q, const Covector& f) const {
  const EuclideanSpace& sp = sys_.space;
  Margin m{0.0, kInf};
  switch (mode_) {
    case ConstitutiveMode::ExactSpring: {
      const auto& p = std::get<SpringParams>(sys_.params);
      m.residual = sp.dual_norm(f - p.stiffness * sp.metric_apply(q - p.center));
      break;
    }
    case ConstitutiveMode::ExactBilinear: {
      const auto& p = std::get<BilinearParams>(sys_.params);
      m.residual = sp.dual_norm(f - Covector(Vec(p.omega.transpose() * (q - p.center).coords())));
      break;
    }
    case ConstitutiveMode::ExactFrictionBall: {
      const auto& p = std::get<FrictionParams>(sys_.params);
      const double fn = std::sqrt(std::max(0.0, f.coords().dot(p.rho.llt().solve(f.coords()))));
      m.support = 1.0 - fn;
      break;
    }
    case ConstitutiveMode::ExactRod: {
      const auto& p = std::get<RodParams>(sys_.params);
      const Vector u = sp.normalized(q - p.center);
      m.residual = sp.dual_norm(f - pair(f, u) * sp.metric_apply(u));
      break;
    }
    case ConstitutiveMode::ExactCorner: {
      const auto& p = std::get<CornerParams>(sys_.params);
      const bool a1 = active(sys_.constraints[0], q);
      const bool a2 = active(sys_.constraints[1], q);
      const double f1 = pair(f, p.u1), f2 = pair(f, p.u2);
      Covector rest = f;
      if (a1) rest = rest - f1 * sp.metric_apply(p.u1);
      if (a2) rest = rest - f2 * sp.metric_apply(p.u2);
      m.residual = sp.dual_norm(rest);
      if (a1 && a2) {
        m.support = (f1 > 0.0 && f2 > 0.0) ? -std::hypot(f1, f2) : std::min(-f1, -f2);
      } else if (a1) {
        m.support = -f1;
      } else if (a2) {
        m.support = -f2;
      }
      break;
    }
    case ConstitutiveMode::ExactSkate: {
      const double c = std::cos(q[2]), s = std::sin(q[2]);
      m.residual = std::hypot(f[0] * c + f[1] * s, f[2]);
      break;
    }
    case ConstitutiveMode::ExactCoulombCone: {
      const auto& p = std::get<CoulombParams>(sys_.params);
      if (!active(sys_.constraints[0], q)) {
        m.residual = sp.dual_norm(f);
        break;
      }
      const Vector k = sp.normalized(p.normal);
      const double fn = pair(f, k);
      if (p.coefficient == 0.0) {
        m.residual = sp.dual_norm(f - fn * sp.metric_apply(k));
        m.support = -fn;
        break;
      }
      const double r = sp.dual_norm(f);
      const double ft = std::sqrt(std::max(0.0, r * r - fn * fn));
      const double beta = std::atan2(ft, fn);
      const double amax = std::atan2(1.0, p.coefficient);
      if (beta <= amax) {
        m.support = -r;
      } else {
        m.support = std::min(-r * std::cos(beta), -r * std::cos(amax - beta));
      }
      break;
    }
    case ConstitutiveMode::Generic:
      break;
  }
  return m;
}

Margin ConstitutiveSet::generic_margin(const Point& q, const Covector& f) const {
  const EuclideanSpace& sp = sys_.space;
  const VirtualSet vs = sys_.V(q);
  Rng rng(seed_);
  auto h = [&](const Vec& v) {
    const Vector w(v);
    return sys_.theta(q, w) - pair(f, w);
  };
  std::vector<Vec> starts;
  for (const auto& v : vs.sample_unit(sp, rng, kStarts)) {
    if (starts.size() >= kStarts) break;
    starts.push_back(v.coords());
  }
  Margin m{0.0, kInf};
  if (sys_.theta.linear) {
    const Mat lin = vs.lineality(sp);
    m.residual = restricted_residual(sys_, q, f, lin);
    if (vs.is_linear()) return m;
    auto proj = [&](const Vec& y) {
      const Vec p = vs.project(sp, Vector(remove_component(sp, lin, y))).coords();
      return remove_component(sp, lin, p);
    };
    // theta - f is linear on V, so its gradient is constant.
    m.support = sphere_descent(sp, starts, h, proj, true);
  } else {
    auto proj = [&](const Vec& y) { return vs.project(sp, Vector(y)).coords(); };
    m.support = sphere_descent(sp, starts, h, proj, false);
  }
  return m;
}

std::vector<Covector> ConstitutiveSet::sample_boundary(const Point& q, std::size_t n, Rng& rng) const {
  sys_.require_admissible(q, "sample_boundary");
  const EuclideanSpace& sp = sys_.space;
  const auto dim = sp.dim();
  std::vector<Covector> out;
  auto no_boundary = [](const char* what) { return DomainError(std::string("S_q has no relative boundary: ") + what); };
  auto tangent_dirs = [&](const Mat& basis, std::size_t count) {
    std::vector<Vec> dirs;
    for (std::size_t i = 0; i < count; ++i) {
      Vec y;
      if (basis.cols() == 2) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
        y = Vec(2);
        y << std::cos(a), std::sin(a);
      } else if (basis.cols() == 1) {
        y = Vec::Constant(1, i % 2 ? -1.0 : 1.0);
      } else {
        y = rng.gaussian(static_cast<std::size_t>(basis.cols()));
        y /= y.norm();
      }
      dirs.push_back(basis * y);
    }
    return dirs;
  };
  switch (mode_) {
    case ConstitutiveMode::ExactSpring: {
      const auto& p = std::get<SpringParams>(sys_.params);
      return {p.stiffness * sp.metric_apply(q - p.center)};
    }
    case ConstitutiveMode::ExactBilinear: {
      const auto& p = std::get<BilinearParams>(sys_.params);
      return {Covector(Vec(p.omega.transpose() * (q - p.center).coords()))};
    }
    case ConstitutiveMode::ExactFrictionBall: {
      const auto& p = std::get<FrictionParams>(sys_.params);
      const Mat id = Mat::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
      for (const Vec& w : tangent_dirs(id, n)) out.emplace_back(Vec(p.rho * w / std::sqrt(w.dot(p.rho * w))));
      return out;
    }
    case ConstitutiveMode::ExactRod:
      throw no_boundary("rod reactions form a line");
    case ConstitutiveMode::ExactSkate:
      throw no_boundary("skate reactions form an affine subspace");
    case ConstitutiveMode::ExactCorner: {
      const auto& p = std::get<CornerParams>(sys_.params);
      const bool a1 = active(sys_.constraints[0], q);
      const bool a2 = active(sys_.constraints[1], q);
      if (!a1 && !a2) throw no_boundary("S_q = {0} away from the walls");
      if (a1 != a2) return {Covector::zero(dim)};
      for (std::size_t i = 0; i < n; ++i) {
        const double t = 1.0 + static_cast<double>(i / 2);
        out.push_back(-t * sp.metric_apply(i % 2 ? p.u2 : p.u1));
      }
      return out;
    }
    case ConstitutiveMode::ExactCoulombCone: {
      const auto& p = std::get<CoulombParams>(sys_.params);
      if (!active(sys_.constraints[0], q)) throw no_boundary("S_q = {0} away from the contact plane");
      if (p.coefficient == 0.0) return {Covector::zero(dim)};
      const Vector k = sp.normalized(p.normal);
      const Mat tang = sp.annihilated_subspace(sp.metric_apply(k).coords().transpose());
      for (const Vec& t : tangent_dirs(tang, n))
        out.push_back(-1.0 * sp.metric_apply(k) + p.coefficient * sp.metric_apply(Vector(t)));
      return out;
    }
    case ConstitutiveMode::Generic:
      break;
  }

  // Generic: bisection along rays from a member f0.
  const VirtualSet vs = sys_.V(q);
  const Mat lin = sys_.theta.linear ? vs.lineality(sp) : Mat(static_cast<Eigen::Index>(dim), 0);
  const Covector c = theta_on_basis(sys_, q, lin);
  Covector f0 = c;
  if (sys_.theta.linear) {
    if (vs.is_linear()) {
      if (static_cast<std::size_t>(lin.cols()) == dim) return {c};
      throw no_boundary("S_q is an affine subspace");
    }
    Vec kappa = Vec::Zero(static_cast<Eigen::Index>(dim));
    Rng srng(seed_);
    for (const auto& v : vs.sample_unit(sp, srng, kStarts)) kappa += remove_component(sp, lin, v.coords());
    if (sp.norm(Vector(kappa)) < 1e-12) throw no_boundary("S_q is an affine subspace");
    kappa = sp.normalized(Vector(kappa)).coords();
    double mu = 1.0;
    while (mu < 1e6 && margin(q, c - mu * sp.metric_apply(Vector(kappa))).value(tol_) < tol_) mu *= 2.0;
    if (mu >= 1e6) throw NumericalError("sample_boundary: no interior member found");
    f0 = c - mu * sp.metric_apply(Vector(kappa));
  } else if (margin(q, c).value(tol_) < tol_) {
    throw NumericalError("sample_boundary: the zero covector is not interior");
  }
  auto inside = [&](const Covector& f) { return margin(q, f).value(tol_) >= 0.0; };
  for (std::size_t attempt = 0; out.size() < n && attempt < 20 * n + 20; ++attempt) {
    Vec d = rng.gaussian(dim);
    if (lin.cols()) d = sp.metric_apply(Vector(remove_component(sp, lin, sp.metric_invert(Covector(d)).coords()))).coords();
    const double dn = sp.dual_norm(Covector(d));
    if (dn < 1e-12) continue;
    const Covector dir(Vec(d / dn));
    double lo = 0.0, hi = 1.0;
    while (hi < 1e6 && inside(f0 + hi * dir)) {
      lo = hi;
      hi *= 2.0;
    }
    if (hi >= 1e6) continue;
    for (int it = 0; it < 60 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (inside(f0 + mid * dir) ? lo : hi) = mid;
    }
    out.push_back(f0 + 0.5 * (lo + hi) * dir);
  }
  return out;
}

Membership skate_constitutive(const Point& q, const Covector& f, double tau, double tol) {
  if (q.dim() != 3 || f.dim() != 2) throw DimensionError("skate_constitutive: q = (x, y, angle), f in the plane");
  const double along = f[0] * std::cos(q[2]) + f[1] * std::sin(q[2]);
  return std::hypot(along, tau) <= tol ? Membership::In : Membership::Out;
}

}  // namespace vwork
