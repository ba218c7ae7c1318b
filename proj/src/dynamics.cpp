#include "vwork/dynamics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace vwork {

LagrangianSpec LagrangianSpec::quadratic(Mat m, Mat k, Vec c) {
  const auto n = m.rows();
  if (m.cols() != n || k.rows() != n || k.cols() != n || c.size() != n)
    throw DimensionError("LagrangianSpec: M, K, c must share one dimension");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 || m.llt().info() != Eigen::Success)
    throw DomainError("LagrangianSpec: M must be symmetric positive definite");
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("LagrangianSpec: K must be symmetric");
  LagrangianSpec l;
  l.dim_ = static_cast<std::size_t>(n);
  l.quadratic_ = true;
  l.m_ = std::move(m);
  l.k_ = std::move(k);
  l.c_ = std::move(c);
  return l;
}

LagrangianSpec LagrangianSpec::custom(std::size_t dim, Scalar value, Partial d_q, Partial d_v) {
  if (!value || !d_q || !d_v) throw DomainError("LagrangianSpec: custom Lagrangian needs value and both partials");
  LagrangianSpec l;
  l.dim_ = dim;
  l.value_ = std::move(value);
  l.d_q_ = std::move(d_q);
  l.d_v_ = std::move(d_v);
  return l;
}

double LagrangianSpec::value(const Vec& q, const Vec& v) const {
  if (!quadratic_) return value_(q, v);
  return 0.5 * v.dot(m_ * v) - 0.5 * q.dot(k_ * q) - c_.dot(q);
}

Vec LagrangianSpec::d_q(const Vec& q, const Vec& v) const {
  if (!quadratic_) return d_q_(q, v);
  return -(k_ * q) - c_;
}

Vec LagrangianSpec::d_v(const Vec& q, const Vec& v) const {
  if (!quadratic_) return d_v_(q, v);
  return m_ * v;
}

DiscretePath::DiscretePath(double a, double b, std::vector<Vec> nodes) : t0(a), t1(b), q(std::move(nodes)) {
  if (q.size() < 3) throw DomainError("DiscretePath: need N >= 2");
  if (!(t1 > t0)) throw DomainError("DiscretePath: need t1 > t0");
  for (const auto& x : q)
    if (x.size() != q.front().size()) throw DimensionError("DiscretePath: nodes of mixed dimension");
}

Vec DiscretePath::momentum(const LagrangianSpec& l, std::size_t i) const { return l.d_v(midpoint(i), velocity(i)); }

DiscretePath sample_path(const std::function<Vec(double)>& q, double t0, double t1, std::size_t n) {
  std::vector<Vec> nodes;
  for (std::size_t i = 0; i <= n; ++i) nodes.push_back(q(t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n)));
  return DiscretePath(t0, t1, std::move(nodes));
}

namespace {

void check_dim(const LagrangianSpec& l, const DiscretePath& p) {
  if (static_cast<std::size_t>(p.q.front().size()) != l.dim()) throw DimensionError("path and Lagrangian dimensions differ");
}

Vec force_at(const ForceField& f, double t, std::size_t dim) {
  if (!f) return Vec::Zero(static_cast<Eigen::Index>(dim));
  Vec v = f(t);
  if (static_cast<std::size_t>(v.size()) != dim) throw DimensionError("force dimension differs from the path");
  return v;
}

}  // namespace

double discrete_action(const LagrangianSpec& l, const DiscretePath& path) {
  check_dim(l, path);
  double s = 0.0;
  for (std::size_t i = 0; i < path.steps(); ++i) s += l.value(path.midpoint(i), path.velocity(i));
  return s * path.h();
}

double forced_action(const LagrangianSpec& l, const DiscretePath& path, const ForceField& f) {
  double s = discrete_action(l, path);
  for (std::size_t i = 1; i < path.steps(); ++i) s += path.h() * force_at(f, path.time(i), l.dim()).dot(path.q[i]);
  return s;
}

std::vector<Vec> euler_lagrange_residual(const LagrangianSpec& l, const DiscretePath& path, const ForceField& f) {
  check_dim(l, path);
  const double h = path.h();
  std::vector<Vec> r;
  for (std::size_t i = 1; i < path.steps(); ++i) {
    const Vec dq = 0.5 * (l.d_q(path.midpoint(i - 1), path.velocity(i - 1)) + l.d_q(path.midpoint(i), path.velocity(i)));
    r.push_back((path.momentum(l, i) - path.momentum(l, i - 1)) / h - dq - force_at(f, path.time(i), l.dim()));
  }
  return r;
}

namespace {

Vec stack(const std::vector<Vec>& r) {
  Vec out(static_cast<Eigen::Index>(r.size()) * (r.empty() ? 0 : r.front().size()));
  Eigen::Index k = 0;
  for (const auto& x : r) {
    out.segment(k, x.size()) = x;
    k += x.size();
  }
  return out;
}

void scatter(DiscretePath& p, const Vec& x) {
  const auto d = p.q.front().size();
  for (std::size_t i = 1; i < p.steps(); ++i) p.q[i] = x.segment(static_cast<Eigen::Index>(i - 1) * d, d);
}

Vec gather(const DiscretePath& p) {
  std::vector<Vec> interior(p.q.begin() + 1, p.q.end() - 1);
  return stack(interior);
}

}  // namespace

DiscretePath solve_bvp(const LagrangianSpec& l, const Vec& q_start, const Vec& q_end, double t0, double t1,
                       std::size_t n, const ForceField& f, const BvpOptions& opt) {
  const auto d = static_cast<Eigen::Index>(l.dim());
  if (q_start.size() != d || q_end.size() != d) throw DimensionError("solve_bvp: endpoint dimension");
  std::vector<Vec> init;
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n);
    init.push_back((1 - s) * q_start + s * q_end);
  }
  DiscretePath path(t0, t1, std::move(init));
  const auto m = static_cast<Eigen::Index>(n - 1) * d;

  if (l.is_quadratic()) {
    // M(q+ - 2q + q-)/h^2 + K(q- + 2q + q+)/4 + c = f
    const double h = path.h();
    const Mat& mm = l.mass();
    const Mat& kk = l.stiffness();
    const Mat diag = -2.0 * mm / (h * h) + 0.5 * kk;
    const Mat off = mm / (h * h) + 0.25 * kk;
    Mat a = Mat::Zero(m, m);
    Vec rhs(m);
    for (std::size_t i = 1; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i - 1) * d;
      a.block(r, r, d, d) = diag;
      Vec b = force_at(f, path.time(i), l.dim()) - l.linear();
      if (i > 1) a.block(r, r - d, d, d) = off;
      else b -= off * q_start;
      if (i + 1 < n) a.block(r, r + d, d, d) = off;
      else b -= off * q_end;
      rhs.segment(r, d) = b;
    }
    Eigen::FullPivLU<Mat> lu(a);
    if (!lu.isInvertible()) throw NumericalError("solve_bvp: singular discrete Euler-Lagrange system");
    scatter(path, lu.solve(rhs));
    return path;
  }

  auto residual = [&](const Vec& x) {
    DiscretePath p = path;
    scatter(p, x);
    return stack(euler_lagrange_residual(l, p, f));
  };
  Vec x = gather(path);
  Vec r = residual(x);
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    const double scale = 1.0 + x.cwiseAbs().maxCoeff();
    if (r.norm() <= opt.tol * scale * std::sqrt(static_cast<double>(m))) {
      scatter(path, x);
      return path;
    }
    Mat jac(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double step = 1e-6 * std::max(1.0, std::abs(x[j]));
      Vec xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      jac.col(j) = (residual(xp) - residual(xm)) / (2 * step);
    }
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible()) throw NumericalError("solve_bvp: singular Newton system");
    const Vec dx = lu.solve(-r);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, t *= 0.5) {
      const Vec xn = x + t * dx;
      const Vec rn = residual(xn);
      if (rn.norm() < r.norm() || rn.norm() <= opt.tol) {
        x = xn;
        r = rn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (r.norm() <= 1e-8 * (1.0 + x.cwiseAbs().maxCoeff()) * std::sqrt(static_cast<double>(m))) {
    scatter(path, x);
    return path;
  }
  throw NumericalError("solve_bvp: Newton did not converge (residual " + std::to_string(r.norm()) + ")");
}

std::pair<Covector, Covector> boundary_momenta(const LagrangianSpec& l, const DiscretePath& path) {
  check_dim(l, path);
  const double h = path.h();
  const std::size_t last = path.steps() - 1;
  const Vec p0 = path.momentum(l, 0) - 0.5 * h * l.d_q(path.midpoint(0), path.velocity(0));
  const Vec p1 = path.momentum(l, last) + 0.5 * h * l.d_q(path.midpoint(last), path.velocity(last));
  return {Covector(p0), Covector(p1)};
}

double action_variation(const LagrangianSpec& l, const DiscretePath& path, const ForceField& f,
                        const std::vector<Vec>& w) {
  check_dim(l, path);
  if (w.size() != path.q.size()) throw DimensionError("action_variation: variation needs one vector per node");
  const double h = path.h();
  double s = 0.0;
  for (std::size_t i = 0; i < path.steps(); ++i) {
    const Vec qm = path.midpoint(i), v = path.velocity(i);
    s += h * 0.5 * l.d_q(qm, v).dot(w[i] + w[i + 1]) + l.d_v(qm, v).dot(w[i + 1] - w[i]);
  }
  for (std::size_t i = 1; i < path.steps(); ++i) s += h * force_at(f, path.time(i), l.dim()).dot(w[i]);
  return s;
}

}  // namespace vwork
