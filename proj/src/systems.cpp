#include "vwork/systems.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace vwork {

namespace {

template <class T>
T pow_int(const T& x, int e) {
  T r = constant_like(x, 1.0);
  for (int i = 0; i < e; ++i) r = r * x;
  return r;
}

double constraint_scale(const Constraint& c, const Point& q) { return std::max(1.0, c.field.gradient(q.span()).norm()); }

void require_positive(double x, const char* what) {
  if (!(x > 0.0)) throw DomainError(std::string(what) + " must be positive");
}

void require_unit(const EuclideanSpace& space, const Vector& u, const char* what) {
  if (std::abs(space.norm(u) - 1.0) > 1e-9) throw DomainError(std::string(what) + " must be a unit vector");
}

}  // namespace

void StaticSystem::require_admissible(const Point& q, const char* what) const {
  space.check_dim(q.dim(), what);
  if (!admissible(q)) throw DomainError(std::string(what) + ": configuration is outside the admissible region C0");
}

WorkForm zero_work_form() {
  WorkForm w = make_work_form([](auto, auto v) { return constant_like(v[0], 0.0); }, true);
  w.zero = true;
  return w;
}

WorkForm sum(const WorkForm& a, const WorkForm& b) {
  if (a.zero) return b;
  if (b.zero) return a;
  WorkForm w;
  w.eval = [a, b](std::span<const double> q, std::span<const double> v) { return a.eval(q, v) + b.eval(q, v); };
  if (a.eval_jet && b.eval_jet)
    w.eval_jet = [a, b](std::span<const Jet> q, std::span<const Jet> v) { return a.eval_jet(q, v) + b.eval_jet(q, v); };
  w.linear = a.linear && b.linear;
  return w;
}

WorkForm scaled(const WorkForm& a, double lambda) {
  WorkForm w = a;
  w.eval = [a, lambda](std::span<const double> q, std::span<const double> v) { return lambda * a.eval(q, v); };
  if (a.eval_jet)
    w.eval_jet = [a, lambda](std::span<const Jet> q, std::span<const Jet> v) { return lambda * a.eval_jet(q, v); };
  return w;
}

WorkForm work_form_of(const ScalarField& potential) {
  WorkForm w;
  w.eval = [potential](std::span<const double> q, std::span<const double> v) {
    const Vec g = potential.gradient(q);
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += g[static_cast<Eigen::Index>(i)] * v[i];
    return acc;
  };
  if (potential.gradient_jet)
    w.eval_jet = [potential](std::span<const Jet> q, std::span<const Jet> v) {
      const std::vector<Jet> g = potential.gradient_jet(q);
      Jet acc = Jet::constant(v[0].order(), 0.0);
      for (std::size_t i = 0; i < v.size(); ++i) acc += g[i].truncated(v[0].order()) * v[i];
      return acc;
    };
  w.linear = true;
  return w;
}

StaticSystem make_free(const EuclideanSpace& space) {
  StaticSystem s;
  s.space = space;
  s.kind = "free";
  s.admissible = [](const Point&) { return true; };
  s.virtual_set = [](const Point&) { return VirtualSet(FullSpace{}); };
  s.theta = zero_work_form();
  return s;
}

StaticSystem make_spring(const Point& q0, double k, const EuclideanSpace& space) {
  require_positive(k, "spring constant");
  space.check_dim(q0.dim(), "make_spring");
  const Vec c = q0.coords();
  const Mat g = space.metric();
  const auto n = static_cast<std::size_t>(c.size());
  auto u = [c, g, k, n](auto x) {
    auto acc = constant_like(x[0], 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        acc = acc + (0.5 * k * g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) * (x[i] - c[static_cast<Eigen::Index>(i)]) *
                        (x[j] - c[static_cast<Eigen::Index>(j)]);
    return acc;
  };
  auto grad = [c, g, k, n](auto x) {
    using T = std::decay_t<decltype(x[0])>;
    std::vector<T> out;
    for (std::size_t i = 0; i < n; ++i) {
      auto acc = constant_like(x[0], 0.0);
      for (std::size_t j = 0; j < n; ++j)
        acc = acc + (k * g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) * (x[j] - c[static_cast<Eigen::Index>(j)]);
      out.push_back(acc);
    }
    return out;
  };
  StaticSystem s = make_free(space);
  s.kind = "spring";
  s.potential = make_scalar_field(u, grad);
  s.theta = work_form_of(*s.potential);
  s.params = SpringParams{q0, k};
  return s;
}

StaticSystem make_spring(const Point& q0, double k) { return make_spring(q0, k, EuclideanSpace(q0.dim())); }

StaticSystem make_bilinear(const Point& q0, const Mat& omega, const EuclideanSpace& space) {
  space.check_dim(q0.dim(), "make_bilinear");
  if (omega.rows() != omega.cols() || static_cast<std::size_t>(omega.rows()) != space.dim())
    throw DimensionError("make_bilinear: omega must be dim x dim");
  const Vec c = q0.coords();
  const auto n = space.dim();
  StaticSystem s = make_free(space);
  s.kind = "bilinear";
  s.theta = make_work_form(
      [c, omega, n](auto q, auto v) {
        auto acc = constant_like(v[0], 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            acc = acc + omega(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                            ((q[i] - c[static_cast<Eigen::Index>(i)]) * v[j]);
        return acc;
      },
      true);
  if ((omega - omega.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + omega.cwiseAbs().maxCoeff())) {
    auto u = [c, omega, n](auto x) {
      auto acc = constant_like(x[0], 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          acc = acc + (0.5 * omega(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) *
                          (x[i] - c[static_cast<Eigen::Index>(i)]) * (x[j] - c[static_cast<Eigen::Index>(j)]);
      return acc;
    };
    auto grad = [c, omega, n](auto x) {
      using T = std::decay_t<decltype(x[0])>;
      std::vector<T> out;
      for (std::size_t j = 0; j < n; ++j) {
        auto acc = constant_like(x[0], 0.0);
        for (std::size_t i = 0; i < n; ++i)
          acc = acc + omega(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * (x[i] - c[static_cast<Eigen::Index>(i)]);
        out.push_back(acc);
      }
      return out;
    };
    s.potential = make_scalar_field(u, grad);
  }
  s.params = BilinearParams{q0, omega};
  return s;
}

StaticSystem make_bilinear(const Point& q0, const Mat& omega) { return make_bilinear(q0, omega, EuclideanSpace(q0.dim())); }

StaticSystem make_friction(const Mat& rho, const EuclideanSpace& space) {
  if (rho.rows() != rho.cols() || static_cast<std::size_t>(rho.rows()) != space.dim())
    throw DimensionError("make_friction: rho must be dim x dim");
  (void)EuclideanSpace(rho);  // rejects non-SPD rho
  const auto n = space.dim();
  StaticSystem s = make_free(space);
  s.kind = "friction";
  s.theta = make_work_form(
      [rho, n](auto, auto v) {
        using std::sqrt;
        auto acc = constant_like(v[0], 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            acc = acc + rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * (v[i] * v[j]);
        return sqrt(acc);
      },
      false);
  s.params = FrictionParams{rho};
  return s;
}

StaticSystem make_friction(const Mat& rho) { return make_friction(rho, EuclideanSpace(static_cast<std::size_t>(rho.rows()))); }

Constraint affine_constraint(const Covector& n, const Point& q0, Constraint::Kind kind, std::string label) {
  const Vec nc = n.coords();
  const Vec c = q0.coords();
  const auto dim = q0.dim();
  auto f = [nc, c, dim](auto x) {
    auto acc = constant_like(x[0], 0.0);
    for (std::size_t i = 0; i < dim; ++i)
      acc = acc + nc[static_cast<Eigen::Index>(i)] * (x[i] - c[static_cast<Eigen::Index>(i)]);
    return acc;
  };
  auto grad = [nc, dim](auto x) {
    using T = std::decay_t<decltype(x[0])>;
    std::vector<T> out;
    for (std::size_t i = 0; i < dim; ++i) out.push_back(constant_like(x[0], nc[static_cast<Eigen::Index>(i)]));
    return out;
  };
  return Constraint{kind, make_scalar_field(f, grad), std::move(label)};
}

Constraint sphere_constraint(const EuclideanSpace& block_space, std::size_t offset, std::size_t total_dim,
                             const Point& center, double a, std::string label) {
  block_space.check_dim(center.dim(), "sphere_constraint");
  const Vec c = center.coords();
  const Mat g = block_space.metric();
  const auto m = center.dim();
  auto f = [c, g, m, offset, a](auto x) {
    auto acc = constant_like(x[0], -a * a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        acc = acc + g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                        ((x[offset + i] - c[static_cast<Eigen::Index>(i)]) * (x[offset + j] - c[static_cast<Eigen::Index>(j)]));
    return acc;
  };
  auto grad = [c, g, m, offset, total_dim](auto x) {
    using T = std::decay_t<decltype(x[0])>;
    std::vector<T> out(total_dim, constant_like(x[0], 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      auto acc = constant_like(x[0], 0.0);
      for (std::size_t j = 0; j < m; ++j)
        acc = acc + (2.0 * g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) * (x[offset + j] - c[static_cast<Eigen::Index>(j)]);
      out[offset + i] = acc;
    }
    return out;
  };
  return Constraint{Constraint::Kind::Equality, make_scalar_field(f, grad), std::move(label)};
}

StaticSystem make_holonomic(const EuclideanSpace& space, std::vector<Constraint> constraints,
                            std::optional<ScalarField> potential, std::string kind) {
  StaticSystem s = make_free(space);
  s.kind = std::move(kind);
  s.constraints = constraints;
  s.admissible = [constraints](const Point& q) {
    for (const auto& c : constraints) {
      const double v = c.field(q);
      const double tol = kConstraintTol * constraint_scale(c, q);
      if (c.kind == Constraint::Kind::Equality ? std::abs(v) > tol : v < -tol) return false;
    }
    return true;
  };
  s.virtual_set = [constraints, dim = space.dim()](const Point& q) -> VirtualSet {
    std::vector<Vec> eq, ineq;
    for (const auto& c : constraints) {
      if (c.kind == Constraint::Kind::Equality) {
        eq.push_back(c.field.gradient(q.span()));
      } else if (c.field(q) <= kConstraintTol * constraint_scale(c, q)) {
        ineq.push_back(c.field.gradient(q.span()));
      }
    }
    const auto n = static_cast<Eigen::Index>(dim);
    Mat e(static_cast<Eigen::Index>(eq.size()), n), m(static_cast<Eigen::Index>(ineq.size()), n);
    for (std::size_t i = 0; i < eq.size(); ++i) e.row(static_cast<Eigen::Index>(i)) = eq[i].transpose();
    for (std::size_t i = 0; i < ineq.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = ineq[i].transpose();
    if (ineq.empty() && eq.empty()) return FullSpace{};
    if (ineq.empty()) {
      // Euclidean null space; the set does not depend on the metric.
      Eigen::JacobiSVD<Mat> svd(e, Eigen::ComputeFullV);
      Eigen::Index rank = 0;
      const auto& sv = svd.singularValues();
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-10 * sv[0]) ++rank;
      return LinearSubspace{svd.matrixV().rightCols(n - rank)};
    }
    return HalfSpaceCone{m, e};
  };
  if (potential) {
    s.theta = work_form_of(*potential);
    s.potential = std::move(potential);
  }
  return s;
}

StaticSystem make_rod(const Point& q0, double a, const EuclideanSpace& space) {
  require_positive(a, "rod length");
  StaticSystem s = make_holonomic(space, {sphere_constraint(space, 0, space.dim(), q0, a, "rod")}, std::nullopt, "rod");
  s.params = RodParams{q0, a};
  return s;
}

StaticSystem make_rod(const Point& q0, double a) { return make_rod(q0, a, EuclideanSpace(q0.dim())); }

StaticSystem make_corner(const Point& q0, const Vector& u1, const Vector& u2, const EuclideanSpace& space) {
  require_unit(space, u1, "corner u1");
  require_unit(space, u2, "corner u2");
  if (std::abs(space.inner(u1, u2)) > 1e-9) throw DomainError("corner: u1 and u2 must be orthogonal");
  std::vector<Constraint> cs{
      affine_constraint(space.metric_apply(u1), q0, Constraint::Kind::Inequality, "u1"),
      affine_constraint(space.metric_apply(u2), q0, Constraint::Kind::Inequality, "u2"),
  };
  StaticSystem s = make_holonomic(space, std::move(cs), std::nullopt, "corner");
  s.params = CornerParams{q0, u1, u2};
  return s;
}

StaticSystem make_corner(const Point& q0, const Vector& u1, const Vector& u2) {
  return make_corner(q0, u1, u2, EuclideanSpace(q0.dim()));
}

StaticSystem make_skate() {
  StaticSystem s = make_free(EuclideanSpace(3));
  s.kind = "skate";
  s.constraint_order = 1;
  s.virtual_set = [](const Point& q) -> VirtualSet {
    Mat b = Mat::Zero(3, 2);
    b(0, 0) = std::cos(q[2]);
    b(1, 0) = std::sin(q[2]);
    b(2, 1) = 1.0;
    return SkateDistribution{b};
  };
  s.params = SkateParams{};
  return s;
}

StaticSystem make_coulomb(const Point& q0, const Vector& k, double nu, const EuclideanSpace& space) {
  require_unit(space, k, "Coulomb normal k");
  if (!(nu >= 0.0)) throw DomainError("Coulomb coefficient must be non-negative");
  Constraint half = affine_constraint(space.metric_apply(k), q0, Constraint::Kind::Inequality, "contact");
  StaticSystem s = make_free(space);
  s.kind = "coulomb";
  s.constraint_order = 1;
  s.constraints = {half};
  s.admissible = [half](const Point& q) { return half.field(q) >= -kConstraintTol * constraint_scale(half, q); };
  s.virtual_set = [half, k, nu](const Point& q) -> VirtualSet {
    if (half.field(q) > kConstraintTol * constraint_scale(half, q)) return FullSpace{};
    return FrictionCone{k, nu};
  };
  s.params = CoulombParams{q0, k, nu};
  return s;
}

StaticSystem make_coulomb(const Point& q0, const Vector& k, double nu) {
  return make_coulomb(q0, k, nu, EuclideanSpace(q0.dim()));
}

ScalarField polynomial_field(std::size_t dim, const std::vector<Monomial>& terms) {
  for (const auto& t : terms) {
    if (t.exponents.size() != dim) throw DimensionError("polynomial term has the wrong number of exponents");
    for (int e : t.exponents)
      if (e < 0) throw DomainError("polynomial exponents must be non-negative");
  }
  auto f = [terms, dim](auto x) {
    auto acc = constant_like(x[0], 0.0);
    for (const auto& t : terms) {
      auto m = constant_like(x[0], t.coeff);
      for (std::size_t i = 0; i < dim; ++i) m = m * pow_int(x[i], t.exponents[i]);
      acc = acc + m;
    }
    return acc;
  };
  auto grad = [terms, dim](auto x) {
    using T = std::decay_t<decltype(x[0])>;
    std::vector<T> out(dim, constant_like(x[0], 0.0));
    for (const auto& t : terms) {
      for (std::size_t d = 0; d < dim; ++d) {
        if (t.exponents[d] == 0) continue;
        auto m = constant_like(x[0], t.coeff * t.exponents[d]);
        for (std::size_t i = 0; i < dim; ++i) m = m * pow_int(x[i], i == d ? t.exponents[i] - 1 : t.exponents[i]);
        out[d] = out[d] + m;
      }
    }
    return out;
  };
  return make_scalar_field(f, grad);
}

StaticSystem make_potential_poly(const EuclideanSpace& space, const std::vector<Monomial>& terms) {
  StaticSystem s = make_free(space);
  s.kind = "potential-poly";
  s.potential = polynomial_field(space.dim(), terms);
  s.theta = work_form_of(*s.potential);
  return s;
}

}  // namespace vwork
