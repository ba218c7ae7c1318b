#include "vwork/control.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "vwork/random.hpp"

namespace vwork {

namespace {

constexpr double kFdStep = 1e-6;
constexpr int kMaxNewton = 100;
constexpr double kConverged = 1e-10;
constexpr double kMergeDist = 1e-6;

Eigen::Index rank_of(const Eigen::JacobiSVD<Mat>& svd, double rel) {
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > rel * s[0]) ++r;
  return r;
}

Eigen::Index nullity(const Mat& m, double rel) {
  if (m.cols() == 0) return 0;
  if (m.rows() == 0) return m.cols();
  Eigen::JacobiSVD<Mat> svd(m);
  return m.cols() - rank_of(svd, rel);
}

// Differential of the work form as a covector, theta linear.
Vec work_covector(const StaticSystem& sys, const Point& q) {
  if (sys.potential) return sys.potential->gradient(q.span());
  if (!sys.theta.linear) throw DomainError("critical sets need a potential or a linear work form");
  const auto n = static_cast<Eigen::Index>(sys.dim());
  Vec g(n);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = sys.theta(q, Vector(Vec(Vec::Unit(n, i))));
  return g;
}

struct KktSystem {
  const StaticSystem& sys;
  Mat vertical;
  Point base;
  std::vector<const Constraint*> eq;

  Eigen::Index nz() const { return vertical.cols(); }
  Eigen::Index nmu() const { return static_cast<Eigen::Index>(eq.size()); }

  Point point(const Vec& x) const { return Point(Vec(base.coords() + vertical * x.head(nz()))); }

  Vec residual(const Vec& x) const {
    const Point q = point(x);
    Vec g = work_covector(sys, q);
    Vec out(nz() + nmu());
    for (Eigen::Index j = 0; j < nmu(); ++j) {
      g += x[nz() + j] * eq[static_cast<std::size_t>(j)]->field.gradient(q.span());
      out[nz() + j] = eq[static_cast<std::size_t>(j)]->field(q);
    }
    out.head(nz()) = vertical.transpose() * g;
    return out;
  }

  Mat jacobian(const Vec& x) const {
    const Eigen::Index n = x.size();
    Mat j(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec xp = x, xm = x;
      xp[i] += kFdStep;
      xm[i] -= kFdStep;
      j.col(i) = (residual(xp) - residual(xm)) / (2.0 * kFdStep);
    }
    return j;
  }
};

}  // namespace

Fibration::Fibration(EuclideanSpace total, EuclideanSpace base, Mat projection, Vec offset)
    : total_(std::move(total)), base_(std::move(base)), p_(std::move(projection)), b_(std::move(offset)) {
  if (static_cast<std::size_t>(p_.rows()) != base_.dim() || static_cast<std::size_t>(p_.cols()) != total_.dim())
    throw DimensionError("fibration projection must be dim(Q) x dim(Qbar)");
  base_.check_dim(static_cast<std::size_t>(b_.size()), "fibration offset");
  Eigen::JacobiSVD<Mat> svd(p_);
  if (static_cast<std::size_t>(rank_of(svd, 1e-10)) != base_.dim())
    throw DomainError("fibration projection must be surjective");
  vertical_ = total_.annihilated_subspace(p_);
}

Fibration::Fibration(EuclideanSpace total, EuclideanSpace base, Mat projection)
    : Fibration(std::move(total), base, std::move(projection), Vec::Zero(static_cast<Eigen::Index>(base.dim()))) {}

Fibration Fibration::first_factor(const EuclideanSpace& q) {
  const auto n = static_cast<Eigen::Index>(q.dim());
  Mat p = Mat::Zero(n, 2 * n);
  p.leftCols(n).setIdentity();
  return Fibration(q.product(q), q, p);
}

Point Fibration::project(const Point& qbar) const {
  total_.check_dim(qbar.dim(), "Fibration::project");
  return Point(Vec(p_ * qbar.coords() + b_));
}

Vector Fibration::push_forward(const Vector& v) const {
  total_.check_dim(v.dim(), "Fibration::push_forward");
  return Vector(Vec(p_ * v.coords()));
}

Point Fibration::lift(const Point& q) const {
  base_.check_dim(q.dim(), "Fibration::lift");
  return Point(Vec(p_.completeOrthogonalDecomposition().solve(q.coords() - b_)));
}

double critical_residual(const StaticSystem& bar, const Fibration& fib, const Point& qbar, std::size_t n_samples,
                         std::uint64_t seed) {
  bar.require_admissible(qbar, "critical_residual");
  const EuclideanSpace& sp = bar.space;
  const VirtualSet vs = bar.V(qbar);
  if (bar.theta.zero) return 0.0;
  if (vs.is_linear()) {
    const Mat b = intersect_subspaces(sp, vs.lineality(sp), fib.vertical());
    if (bar.theta.linear) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < b.cols(); ++j) {
        const double t = bar.theta(qbar, Vector(Vec(b.col(j))));
        acc += t * t;
      }
      return std::sqrt(acc);
    }
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < n_samples && b.cols() > 0; ++i) {
      const Vector v(Vec(b * rng.gaussian(static_cast<std::size_t>(b.cols()))));
      const double nv = sp.norm(v);
      if (nv > 0.0) worst = std::max(worst, -bar.theta(qbar, (1.0 / nv) * v));
    }
    return worst;
  }
  Rng rng(seed);
  const Mat& nv = fib.vertical();
  double worst = 0.0;
  for (std::size_t i = 0; i < n_samples && nv.cols() > 0; ++i) {
    const Vector y(Vec(nv * rng.gaussian(static_cast<std::size_t>(nv.cols()))));
    const Vector p = vs.project(sp, y);
    const double pn = sp.norm(p);
    if (pn < 1e-12 || sp.norm(fib.push_forward(p)) > 1e-9 * pn) continue;
    worst = std::max(worst, -bar.theta(qbar, (1.0 / pn) * p));
  }
  return worst;
}

CriticalSet solve_critical(const StaticSystem& bar, const Fibration& fib, const Point& q,
                           const std::vector<Point>& seeds, const BranchLabeler& label) {
  bar.space.check_dim(fib.total().dim(), "solve_critical");
  fib.base().check_dim(q.dim(), "solve_critical");
  KktSystem kkt{bar, fib.vertical(), Point(), {}};
  for (const auto& c : bar.constraints) {
    if (c.kind == Constraint::Kind::Inequality) throw DomainError("solve_critical supports equality constraints only");
    kkt.eq.push_back(&c);
  }
  const Mat pinv = fib.projection().completeOrthogonalDecomposition().pseudoInverse();
  CriticalSet out;
  std::vector<CriticalPoint> found;
  for (const Point& seed : seeds) {
    bar.space.check_dim(seed.dim(), "solve_critical seed");
    kkt.base = Point(Vec(seed.coords() - pinv * (fib.project(seed).coords() - q.coords())));
    Vec x = Vec::Zero(kkt.nz() + kkt.nmu());
    if (kkt.nmu() > 0) {
      Mat jn(kkt.nz(), kkt.nmu());
      for (Eigen::Index j = 0; j < kkt.nmu(); ++j)
        jn.col(j) = kkt.vertical.transpose() * kkt.eq[static_cast<std::size_t>(j)]->field.gradient(kkt.base.span());
      x.tail(kkt.nmu()) = jn.completeOrthogonalDecomposition().solve(-kkt.vertical.transpose() * work_covector(bar, kkt.base));
    }
    Vec f = kkt.residual(x);
    for (int it = 0; it < kMaxNewton; ++it) {
      if (f.norm() <= 1e-15) break;
      const Vec step = kkt.jacobian(x).completeOrthogonalDecomposition().solve(-f);
      double t = 1.0;
      Vec xn = x + step, fn = kkt.residual(xn);
      for (int ls = 0; ls < 12 && fn.norm() > f.norm(); ++ls) {
        t *= 0.5;
        xn = x + t * step;
        fn = kkt.residual(xn);
      }
      x = xn;
      f = fn;
      if (t * step.norm() <= 1e-14 * (1.0 + x.norm())) break;
    }
    if (!(f.norm() <= kConverged)) {
      ++out.failed_seeds;
      continue;
    }
    CriticalPoint cp;
    cp.qbar = kkt.point(x);
    cp.q = fib.project(cp.qbar);
    if (!bar.admissible(cp.qbar)) {
      ++out.failed_seeds;
      continue;
    }
    cp.residual = critical_residual(bar, fib, cp.qbar);
    const Mat jac = kkt.jacobian(x);
    const Eigen::Index total_null = nullity(jac, 1e-6);
    const Eigen::Index mu_null = nullity(jac.rightCols(kkt.nmu()), 1e-6);
    cp.family_dim = static_cast<std::size_t>(std::max<Eigen::Index>(0, total_null - mu_null));
    cp.branch = label ? label(cp) : "critical";
    found.push_back(std::move(cp));
  }
  std::sort(found.begin(), found.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.branch != b.branch) return a.branch < b.branch;
    const Vec &x = a.qbar.coords(), &y = b.qbar.coords();
    return std::lexicographical_compare(x.data(), x.data() + x.size(), y.data(), y.data() + y.size());
  });
  for (auto& cp : found) {
    const bool dup = std::any_of(out.points.begin(), out.points.end(), [&](const CriticalPoint& o) {
      return (o.qbar.coords() - cp.qbar.coords()).norm() < kMergeDist;
    });
    if (!dup) out.points.push_back(std::move(cp));
  }
  const bool family = std::any_of(out.points.begin(), out.points.end(), [](const CriticalPoint& c) { return c.family_dim > 0; });
  if (out.points.size() > 1 || family) out.warning = "critical set is not a section";
  return out;
}

ReducedForce reduced_force(const StaticSystem& bar, const Fibration& fib, const CriticalPoint& cp, double tol) {
  const double res = critical_residual(bar, fib, cp.qbar);
  if (res > tol) throw DomainError("reduced_force: configuration is not critical");
  const VirtualSet vs = bar.V(cp.qbar);
  if (!vs.is_linear()) throw DomainError("reduced_force: V(qbar) must be a linear subspace");
  const Mat b = vs.lineality(bar.space);
  const Mat a = (fib.projection() * b).transpose();
  Vec rhs(b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) rhs[j] = bar.theta(cp.qbar, Vector(Vec(b.col(j))));
  ReducedForce out;
  const Vec f = a.completeOrthogonalDecomposition().solve(rhs);
  out.force = Covector(f);
  out.residual = (a * f - rhs).norm();
  const auto n = a.cols();
  Eigen::JacobiSVD<Mat> svd(a.rows() ? a : Mat::Zero(1, n), Eigen::ComputeFullV);
  const Eigen::Index r = a.rows() ? rank_of(svd, 1e-10) : 0;
  out.free_directions = svd.matrixV().rightCols(n - r).transpose();
  return out;
}

int singularity_rank(const Vector& w, double r) {
  if (w.dim() != 3) throw DimensionError("singularity_rank: w must be in R^3");
  const EuclideanSpace sp(3);
  const Mat t = sp.annihilated_subspace(w.coords().transpose());
  Mat j(3, 3);
  j << r * t.col(0), r * t.col(1), w.coords();
  Eigen::JacobiSVD<Mat> svd(j);
  return static_cast<int>(rank_of(svd, 1e-8));
}

double pullback_form(const EuclideanSpace& space, double k, double a, const Vector& w, double r, const Vector& d1w,
                     double d1r, const Vector& d2w, double d2r) {
  const double ww = space.inner(w, w);
  const double w_d1 = space.inner(w, d1w), w_d2 = space.inner(w, d2w), d1_d2 = space.inner(d1w, d2w);
  const double first = k * d1r * d2r * ww + k * r * d1r * w_d2 + k * (r - a) * d2r * w_d1 + k * (r - a) * r * d1_d2;
  const double second = k * d2r * d1r * ww + k * r * d2r * w_d1 + k * (r - a) * d1r * w_d2 + k * (r - a) * r * d1_d2;
  return first - second;
}

double pullback_form_via_tangent_map(const EuclideanSpace& space, double k, double a, const Vector& w, double r,
                                     const Vector& d1w, double d1r, const Vector& d2w, double d2r) {
  auto tphi = [&](const Vector& dw, double dr) {
    const Vector dq = dr * w + r * dw;
    const Covector df = (k * dr) * space.metric_apply(w) + (k * (r - a)) * space.metric_apply(dw);
    return std::pair{dq, df};
  };
  const auto [q1, f1] = tphi(d1w, d1r);
  const auto [q2, f2] = tphi(d2w, d2r);
  return pair(f1, q2) - pair(f2, q1);
}

}  // namespace vwork
