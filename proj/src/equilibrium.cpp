#include "vwork/equilibrium.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "vwork/processes.hpp"
#include "vwork/random.hpp"

namespace vwork {

namespace {

struct TrialBuilder {
  const StaticSystem& sys;
  Point q0;
  std::size_t k;
  double s_check;
  std::vector<const Constraint*> equalities;
  std::vector<const Constraint*> inequalities;
  Mat jac;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod;

  TrialBuilder(const StaticSystem& s, const Point& q, std::size_t order, double check)
      : sys(s), q0(q), k(order), s_check(check) {
    for (const auto& c : sys.constraints) {
      if (c.kind == Constraint::Kind::Equality) {
        equalities.push_back(&c);
      } else {
        inequalities.push_back(&c);
      }
    }
    const auto n = static_cast<Eigen::Index>(sys.dim());
    jac = Mat(static_cast<Eigen::Index>(equalities.size()), n);
    for (std::size_t i = 0; i < equalities.size(); ++i)
      jac.row(static_cast<Eigen::Index>(i)) = equalities[i]->field.gradient(q0.span()).transpose();
    if (jac.rows()) cod.compute(jac);
  }

  std::vector<Jet> jets_of(const std::vector<Vec>& c, std::size_t order) const {
    std::vector<Jet> out(sys.dim(), Jet(order));
    for (std::size_t d = 0; d < sys.dim(); ++d) {
      out[d][0] = q0[d];
      for (std::size_t i = 1; i <= order && i <= c.size(); ++i) out[d][i] = c[i - 1][static_cast<Eigen::Index>(d)];
    }
    return out;
  }

  /// Coefficients c_1 = v, c_i from z_i corrected so equality constraints
  /// vanish to order k.
  std::vector<Vec> coefficients(const Vector& v, const std::vector<Vec>& z) const {
    std::vector<Vec> c{v.coords()};
    for (std::size_t i = 2; i <= k; ++i) {
      Vec ci = i - 2 < z.size() ? z[i - 2] : Vec::Zero(v.coords().size());
      if (jac.rows()) {
        ci -= cod.solve(jac * ci);
        c.push_back(ci);
        const auto jets = jets_of(c, i);
        Vec r(jac.rows());
        for (std::size_t e = 0; e < equalities.size(); ++e) r[static_cast<Eigen::Index>(e)] = equalities[e]->field.value_jet(jets)[i];
        c.back() -= cod.solve(r);
      } else {
        c.push_back(ci);
      }
    }
    return c;
  }

  bool admissible(const std::vector<Vec>& c) const {
    if (inequalities.empty()) return true;
    for (int j = 1; j <= 16; ++j) {
      const double s = s_check * j / 16.0;
      Vec x = q0.coords();
      double sp = 1.0;
      for (const auto& ci : c) {
        sp *= s;
        x += sp * ci;
      }
      const Point q(x);
      for (const auto* g : inequalities) {
        const double scale = std::max(1.0, g->field.gradient(q.span()).norm());
        if (g->field(q) < -kConstraintTol * scale) return false;
      }
    }
    return true;
  }

  std::optional<Jet> jet(const Vector& v, const std::vector<Vec>& z) const {
    const auto c = coefficients(v, z);
    if (!admissible(c)) return std::nullopt;
    std::vector<Vector> coeffs;
    for (const auto& ci : c) coeffs.emplace_back(ci);
    std::optional<Process> p;
    try {
      p = polynomial_arc(sys.space, q0, coeffs, s_check);
    } catch (const DomainError&) {
      return std::nullopt;
    }
    return work_jet(sys, *p, k);
  }
};

bool near_zero(const Jet& j, std::size_t i) {
  double scale = 1.0;
  for (std::size_t m = 1; m <= j.order(); ++m) scale += std::abs(j[m]);
  return std::abs(j[i]) <= kJetZeroBand * scale;
}

struct Tally {
  EquilibriumVerdict v;
  bool any_negative = false;
  bool all_positive = true;

  void add(const Vector& dir, const Jet& j, bool source_zero) {
    ++v.n_samples;
    const JetSign s = classify(j, kJetZeroBand, source_zero);
    if (s == JetSign::Positive) {
      ++v.n_positive;
      return;
    }
    all_positive = false;
    if (s == JetSign::Zero || s == JetSign::Indeterminate) ++v.n_zero;
    if (s == JetSign::Negative && !any_negative) {
      any_negative = true;
      v.witness_direction = dir;
      v.witness_jet = j;
    }
  }

  EquilibriumVerdict finish(std::size_t order) {
    v.order_used = order;
    if (any_negative) {
      v.status = EquilibriumStatus::NotEquilibrium;
    } else if (all_positive && v.n_samples > 0) {
      v.status = EquilibriumStatus::EquilibriumSampled;
    } else {
      v.status = EquilibriumStatus::Indeterminate;
    }
    return v;
  }
};

// Eigenvectors of the Hessian of U restricted to the subspace spanned by b.
std::vector<Vector> hessian_directions(const StaticSystem& sys, const Point& q0, const Mat& b) {
  std::vector<Vector> out;
  if (!sys.potential || !sys.potential->gradient_jet || b.cols() == 0) return out;
  const auto n = static_cast<Eigen::Index>(sys.dim());
  Mat hb(n, b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    std::vector<Jet> x(sys.dim(), Jet(1));
    for (Eigen::Index d = 0; d < n; ++d) {
      x[static_cast<std::size_t>(d)][0] = q0[static_cast<std::size_t>(d)];
      x[static_cast<std::size_t>(d)][1] = b(d, j);
    }
    const auto g = sys.potential->gradient_jet(x);
    for (Eigen::Index d = 0; d < n; ++d) hb(d, j) = g[static_cast<std::size_t>(d)][1];
  }
  Mat h = b.transpose() * hb;
  h = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    const Vec v = b * es.eigenvectors().col(j);
    const double nv = sys.space.norm(Vector(v));
    if (nv < 1e-12) continue;
    out.emplace_back(v / nv);
    out.emplace_back(-v / nv);
  }
  return out;
}

// Trial arcs with c_2 chosen to drive the first undecided coefficient
// negative: e_3 is affine in c_2, e_4 quadratic once e_3 is independent of it.
void curvature_refinement(const TrialBuilder& tb, const Vector& v, const Jet& straight, Tally& tally) {
  if (tb.k < 3 || !near_zero(straight, 1) || !near_zero(straight, 2)) return;
  const auto n = static_cast<Eigen::Index>(tb.sys.dim());
  auto coeff = [&](const Vec& z, std::size_t i) -> std::optional<double> {
    auto j = tb.jet(v, {z});
    if (!j) return std::nullopt;
    return (*j)[i];
  };
  auto try_z = [&](const Vec& z) {
    if (auto j = tb.jet(v, {z})) tally.add(v, *j, tb.sys.theta.zero);
  };
  const double e3 = straight[3];
  Vec g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto c = coeff(Vec::Unit(n, i), 3);
    if (!c) return;
    g[i] = *c - e3;
  }
  if (g.norm() > kJetZeroBand * (1.0 + std::abs(e3))) {
    try_z(-(std::abs(e3) + 1.0) / g.squaredNorm() * g);
    try_z((std::abs(e3) + 1.0) / g.squaredNorm() * g);
    return;
  }
  if (tb.k < 4) return;
  const double e0 = straight[4];
  Vec ep(n), em(n), b(n);
  Mat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto p = coeff(Vec::Unit(n, i), 4);
    auto m = coeff(-Vec::Unit(n, i), 4);
    if (!p || !m) return;
    ep[i] = *p;
    em[i] = *m;
    b[i] = 0.5 * (*p - *m);
    a(i, i) = *p + *m - 2.0 * e0;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      auto p = coeff(Vec::Unit(n, i) + Vec::Unit(n, j), 4);
      if (!p) return;
      a(i, j) = a(j, i) = *p - ep[i] - ep[j] + e0;
    }
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  const double lmin = es.eigenvalues()[0];
  const double amax = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (lmin < -1e-9 * amax) {
    const Vec y = es.eigenvectors().col(0);
    const double by = b.dot(y);
    const double t = (std::abs(by) + std::sqrt(by * by + 2.0 * std::abs(lmin) * (std::abs(e0) + 1.0))) / std::abs(lmin);
    try_z((by > 0.0 ? -t : t) * y);
  } else {
    try_z(-a.completeOrthogonalDecomposition().solve(b));
  }
}

}  // namespace

std::string to_string(EquilibriumStatus s) {
  switch (s) {
    case EquilibriumStatus::NotEquilibrium:
      return "NotEquilibrium";
    case EquilibriumStatus::EquilibriumSampled:
      return "EquilibriumSampled";
    case EquilibriumStatus::Indeterminate:
      return "Indeterminate";
  }
  return "?";
}

EquilibriumVerdict virtual_work_check(const StaticSystem& sys, const Point& q0, std::size_t n_samples,
                                      std::uint64_t seed) {
  sys.require_admissible(q0, "virtual_work_check");
  Rng rng(seed);
  Tally tally;
  for (const Vector& v : sys.V(q0).sample_unit(sys.space, rng, n_samples)) {
    Jet j(1);
    j[1] = sys.theta(q0, v);
    tally.add(v, j, sys.theta.zero);
  }
  return tally.finish(1);
}

EquilibriumVerdict jet_equilibrium_check(const StaticSystem& sys, const Point& q0, const JetCheckOptions& opt) {
  sys.require_admissible(q0, "jet_equilibrium_check");
  if (opt.order < 1 || opt.order > kMaxJetOrder) throw DimensionError("jet_equilibrium_check: order must be in 1..8");
  Rng rng(opt.seed);
  const VirtualSet vs = sys.V(q0);
  std::vector<Vector> dirs = vs.sample_unit(sys.space, rng, opt.n_samples);
  if (vs.is_linear())
    for (auto& d : hessian_directions(sys, q0, vs.lineality(sys.space))) dirs.push_back(std::move(d));

  const TrialBuilder tb(sys, q0, opt.order, opt.s_check);
  Tally tally;
  const Mat lin = vs.is_linear() ? vs.lineality(sys.space) : Mat();
  for (const Vector& v : dirs) {
    const auto straight = tb.jet(v, {});
    if (straight) {
      tally.add(v, *straight, sys.theta.zero);
      curvature_refinement(tb, v, *straight, tally);
    }
    if (opt.order < 2) continue;
    for (std::size_t t = 0; t < opt.curvature_trials; ++t) {
      std::vector<Vec> z;
      for (std::size_t i = 2; i <= opt.order; ++i) {
        Vec zi = rng.gaussian(sys.dim());
        if (lin.cols() && sys.constraints.empty()) zi = lin * (lin.transpose() * (sys.space.metric() * zi));
        z.push_back(zi);
      }
      if (auto j = tb.jet(v, z)) tally.add(v, *j, sys.theta.zero);
    }
  }
  return tally.finish(opt.order);
}

}  // namespace vwork
