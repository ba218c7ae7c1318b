#include "vwork/compose.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace vwork {

namespace {

bool is_free(const StaticSystem& s) {
  return s.kind == "free" && s.theta.zero && s.constraints.empty();
}

Covector theta_covector(const StaticSystem& a, const StaticSystem* b, const Point& q, const Mat& basis) {
  Vec c = Vec::Zero(static_cast<Eigen::Index>(a.dim()));
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    const Vector v(Vec(basis.col(j)));
    double t = a.theta(q, v);
    if (b) t += b->theta(q, v);
    c += t * (a.space.metric() * basis.col(j));
  }
  return Covector(c);
}

double restricted_residual(const StaticSystem& s, const Point& q, const Covector& f, const Mat& basis) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    const Vector v(Vec(basis.col(j)));
    const double r = s.theta(q, v) - pair(f, v);
    acc += r * r;
  }
  return std::sqrt(acc);
}

Mat hessian(const ScalarField& f, const Point& q) {
  const auto n = static_cast<Eigen::Index>(q.dim());
  Mat h(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (f.gradient_jet) {
      std::vector<Jet> x(q.dim(), Jet(1));
      for (Eigen::Index d = 0; d < n; ++d) {
        x[static_cast<std::size_t>(d)][0] = q[static_cast<std::size_t>(d)];
        x[static_cast<std::size_t>(d)][1] = d == j ? 1.0 : 0.0;
      }
      const auto g = f.gradient_jet(x);
      for (Eigen::Index d = 0; d < n; ++d) h(d, j) = g[static_cast<std::size_t>(d)][1];
    } else {
      const double step = 1e-6;
      Vec xp = q.coords(), xm = q.coords();
      xp[j] += step;
      xm[j] -= step;
      h.col(j) = (f.gradient({xp.data(), q.dim()}) - f.gradient({xm.data(), q.dim()})) / (2 * step);
    }
  }
  return 0.5 * (h + h.transpose());
}

Eigen::Index svd_rank(const Eigen::JacobiSVD<Mat>& svd, double rel) {
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > rel * s[0]) ++r;
  return r;
}

void require_linear(const StaticSystem& s, const VirtualSet& v, const char* what) {
  if (!v.is_linear()) throw DomainError(std::string(what) + ": V(q) must be a linear subspace");
  if (!s.theta.linear) throw DomainError(std::string(what) + ": work forms must be linear on V(q)");
}

}  // namespace

ScalarField add_fields(const ScalarField& a, const ScalarField& b) {
  ScalarField s;
  s.value = [a, b](std::span<const double> x) { return a.value(x) + b.value(x); };
  s.value_jet = [a, b](std::span<const Jet> x) { return a.value_jet(x) + b.value_jet(x); };
  s.gradient = [a, b](std::span<const double> x) -> Vec { return a.gradient(x) + b.gradient(x); };
  if (a.gradient_jet && b.gradient_jet)
    s.gradient_jet = [a, b](std::span<const Jet> x) {
      auto g = a.gradient_jet(x);
      const auto h = b.gradient_jet(x);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += h[i];
      return g;
    };
  return s;
}

StaticSystem compose(const StaticSystem& a, const StaticSystem& b) {
  if (a.dim() != b.dim() || (a.space.metric() - b.space.metric()).cwiseAbs().maxCoeff() > 1e-12)
    throw DimensionError("compose: systems must share the configuration space");
  if (is_free(b)) return a;
  if (is_free(a)) return b;
  StaticSystem s;
  s.space = a.space;
  s.kind = "composed";
  s.admissible = [a, b](const Point& q) { return a.admissible(q) && b.admissible(q); };
  s.virtual_set = [a, b](const Point& q) -> VirtualSet {
    const VirtualSet va = a.V(q), vb = b.V(q);
    if (std::holds_alternative<FullSpace>(va.variant())) return vb;
    if (std::holds_alternative<FullSpace>(vb.variant())) return va;
    if (va.is_linear() && vb.is_linear())
      return LinearSubspace{intersect_subspaces(a.space, va.lineality(a.space), vb.lineality(a.space))};
    return Intersection{{va, vb}};
  };
  s.theta = sum(a.theta, b.theta);
  if (a.potential && b.potential) {
    s.potential = add_fields(*a.potential, *b.potential);
  } else if (a.potential && b.theta.zero) {
    s.potential = a.potential;
  } else if (b.potential && a.theta.zero) {
    s.potential = b.potential;
  }
  s.constraints = a.constraints;
  s.constraints.insert(s.constraints.end(), b.constraints.begin(), b.constraints.end());
  s.constraint_order = std::max(a.constraint_order, b.constraint_order);
  return s;
}

std::string to_string(Cleanliness c) { return c == Cleanliness::Clean ? "Clean" : "NotClean"; }

CleanReport clean_check(const StaticSystem& a, const StaticSystem& b, const Point& q) {
  a.require_admissible(q, "clean_check");
  b.require_admissible(q, "clean_check");
  const EuclideanSpace& sp = a.space;
  const auto n = static_cast<Eigen::Index>(sp.dim());
  std::vector<const Constraint*> eq;
  for (const StaticSystem* s : {&a, &b}) {
    const VirtualSet v = s->V(q);
    if (!v.is_linear()) throw DomainError("clean_check: V(q) must be a linear subspace");
    bool has_eq = false;
    for (const auto& c : s->constraints) {
      if (c.kind == Constraint::Kind::Equality) {
        eq.push_back(&c);
        has_eq = true;
      } else if (c.field(q) <= kConstraintTol * std::max(1.0, c.field.gradient(q.span()).norm())) {
        throw DomainError("clean_check: active one-sided constraints are not supported");
      }
    }
    if (!has_eq && v.lineality(sp).cols() < n)
      throw DomainError("clean_check: system " + s->kind + " restricts V without constraint gradients");
  }
  CleanReport r;
  r.virtual_dim = static_cast<std::size_t>(
      intersect_subspaces(sp, a.V(q).lineality(sp), b.V(q).lineality(sp)).cols());
  const auto m = static_cast<Eigen::Index>(eq.size());
  if (m == 0) {
    r.tangent_dim = sp.dim();
  } else {
    Mat j(m, n);
    for (Eigen::Index i = 0; i < m; ++i) j.row(i) = eq[static_cast<std::size_t>(i)]->field.gradient(q.span()).transpose();
    Eigen::JacobiSVD<Mat> svd(j, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Index rank = svd_rank(svd, 1e-8);
    r.jacobian_rank = static_cast<std::size_t>(rank);
    const Mat ker = svd.matrixV().rightCols(n - rank);
    r.tangent_dim = static_cast<std::size_t>(ker.cols());
    if (rank < m && ker.cols() > 0) {
      std::vector<Mat> hs;
      for (const auto* c : eq) hs.push_back(hessian(c->field, q));
      const Mat left = svd.matrixU().rightCols(m - rank);
      Mat stacked(0, ker.cols());
      bool indefinite = false;
      for (Eigen::Index l = 0; l < left.cols(); ++l) {
        Mat h = Mat::Zero(n, n);
        for (Eigen::Index i = 0; i < m; ++i) h += left(i, l) * hs[static_cast<std::size_t>(i)];
        const Mat qf = ker.transpose() * h * ker;
        Eigen::SelfAdjointEigenSolver<Mat> es(qf);
        const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
        if (es.eigenvalues().minCoeff() < -1e-8 * scale && es.eigenvalues().maxCoeff() > 1e-8 * scale) indefinite = true;
        Mat next(stacked.rows() + qf.rows(), ker.cols());
        next << stacked, qf / scale;
        stacked = next;
      }
      if (indefinite) {
        r.tangent_dim = 0;
        r.status = Cleanliness::NotClean;
        return r;
      }
      Eigen::JacobiSVD<Mat> qs(stacked);
      Eigen::Index qr = 0;
      for (Eigen::Index i = 0; i < qs.singularValues().size(); ++i)
        if (qs.singularValues()[i] > 1e-8) ++qr;
      r.tangent_dim = static_cast<std::size_t>(ker.cols() - qr);
    }
  }
  r.status = r.tangent_dim == r.virtual_dim ? Cleanliness::Clean : Cleanliness::NotClean;
  return r;
}

SumReport sum_check(const StaticSystem& a, const StaticSystem& b, const Point& q, std::size_t trials, Rng& rng) {
  a.require_admissible(q, "sum_check");
  b.require_admissible(q, "sum_check");
  const EuclideanSpace& sp = a.space;
  const VirtualSet v1 = a.V(q), v2 = b.V(q);
  require_linear(a, v1, "sum_check");
  require_linear(b, v2, "sum_check");
  const Mat g = sp.metric();
  const Mat b1 = v1.lineality(sp), b2 = v2.lineality(sp);
  const Mat bv = intersect_subspaces(sp, b1, b2);
  auto strip = [&](const Mat& x) { return Mat(x - bv * (bv.transpose() * g * x)); };
  const Mat b1p = sp.orthonormal_basis(strip(b1));
  const Mat b2p = sp.orthonormal_basis(strip(b2));
  Mat both(b1.rows(), b1.cols() + b2.cols());
  both << b1, b2;
  const Mat b0 = sp.orthogonal_complement(both);

  // f1 prescribed on V1 + V'2 + V0, f2 on V2 + V'1 + V0.
  auto solve_on = [&](const Mat& m, const Vec& rhs) { return Vec(m.transpose().completeOrthogonalDecomposition().solve(rhs)); };
  auto theta_values = [&](const StaticSystem& s, const Mat& basis) {
    Vec out(basis.cols());
    for (Eigen::Index j = 0; j < basis.cols(); ++j) out[j] = s.theta(q, Vector(Vec(basis.col(j))));
    return out;
  };
  auto decompose = [&](const Covector& f) {
    const Vec& fc = f.coords();
    Mat m1(b1.rows(), b1.cols() + b2p.cols() + b0.cols());
    m1 << b1, b2p, b0;
    Vec r1(m1.cols());
    r1 << theta_values(a, b1), b2p.transpose() * fc - theta_values(b, b2p), 0.5 * (b0.transpose() * fc);
    Mat m2(b2.rows(), b2.cols() + b1p.cols() + b0.cols());
    m2 << b2, b1p, b0;
    Vec r2(m2.cols());
    r2 << theta_values(b, b2), b1p.transpose() * fc - theta_values(a, b1p), 0.5 * (b0.transpose() * fc);
    return std::pair{Covector(solve_on(m1, r1)), Covector(solve_on(m2, r2))};
  };

  const Covector c = theta_covector(a, &b, q, bv);
  const Mat ann = g * sp.orthogonal_complement(bv);
  const Covector c1 = theta_covector(a, nullptr, q, b1), c2 = theta_covector(b, nullptr, q, b2);
  Mat ann12(b1.rows(), 0);
  {
    const Mat a1 = g * sp.orthogonal_complement(b1), a2 = g * sp.orthogonal_complement(b2);
    ann12.resize(b1.rows(), a1.cols() + a2.cols());
    ann12 << a1, a2;
  }
  const auto ann12_cod = ann12.completeOrthogonalDecomposition();

  SumReport rep;
  rep.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    Vec fc = c.coords();
    if (ann.cols()) fc += ann * rng.gaussian(static_cast<std::size_t>(ann.cols()));
    const Covector f(fc);
    const auto [f1, f2] = decompose(f);
    const double viol = std::max({sp.dual_norm(f - f1 - f2), restricted_residual(a, q, f1, b1),
                                  restricted_residual(b, q, f2, b2)});
    rep.max_violation = std::max(rep.max_violation, viol);

    // Half members, half arbitrary covectors.
    const Covector probe = t % 2 ? Covector(rng.gaussian(sp.dim())) : f;
    const double scale = 1.0 + sp.dual_norm(probe);
    double mem = 0.0;
    for (Eigen::Index j = 0; j < bv.cols(); ++j) {
      const Vector v(Vec(bv.col(j)));
      const double d = a.theta(q, v) + b.theta(q, v) - pair(probe, v);
      mem += d * d;
    }
    const bool member = std::sqrt(mem) <= 1e-8 * scale;
    const Vec rest = probe.coords() - c1.coords() - c2.coords();
    const Vec fit = ann12.cols() ? Vec(ann12 * ann12_cod.solve(rest)) : Vec::Zero(rest.size());
    const bool decomposable = (rest - fit).norm() <= 1e-8 * scale;
    if (member != decomposable) ++rep.equivalence_failures;
  }
  return rep;
}

double ComposedConstitutive::residual(const EuclideanSpace& space, const Covector& f) const {
  space.check_dim(f.dim(), "ComposedConstitutive::residual");
  const Vec d = (f - particular).coords();
  return (virtual_basis.transpose() * d).norm();
}

ComposedConstitutive composed_constitutive(const StaticSystem& a, const StaticSystem& b, const Point& q) {
  const CleanReport cr = clean_check(a, b, q);
  ComposedConstitutive out;
  out.status = cr.status;
  out.virtual_basis = intersect_subspaces(a.space, a.V(q).lineality(a.space), b.V(q).lineality(a.space));
  out.particular = theta_covector(a, &b, q, out.virtual_basis);
  if (cr.status == Cleanliness::NotClean)
    out.warning =
        "intersection of constraints is not clean: S_q is generated by V1 ∩ V2, not by the tangent set of C0; "
        "perfect rigidity is not a realistic assumption here";
  return out;
}

}  // namespace vwork
