#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "vwork/geometry.hpp"

namespace vwork {

/// lambda(q, v) = 1/2 v^T M v - 1/2 q^T K q - <c, q>, or a custom Lagrangian
/// with analytic partial derivatives.
class LagrangianSpec {
 public:
  using Scalar = std::function<double(const Vec& q, const Vec& v)>;
  using Partial = std::function<Vec(const Vec& q, const Vec& v)>;

  static LagrangianSpec quadratic(Mat m, Mat k, Vec c);
  static LagrangianSpec custom(std::size_t dim, Scalar value, Partial d_q, Partial d_v);

  std::size_t dim() const { return dim_; }
  bool is_quadratic() const { return quadratic_; }
  const Mat& mass() const { return m_; }
  const Mat& stiffness() const { return k_; }
  const Vec& linear() const { return c_; }

  double value(const Vec& q, const Vec& v) const;
  Vec d_q(const Vec& q, const Vec& v) const;
  Vec d_v(const Vec& q, const Vec& v) const;

 private:
  std::size_t dim_ = 0;
  bool quadratic_ = false;
  Mat m_, k_;
  Vec c_;
  Scalar value_;
  Partial d_q_, d_v_;
};

using ForceField = std::function<Vec(double t)>;

struct DiscretePath {
  double t0 = 0.0, t1 = 1.0;
  /// Rows are q_0..q_N.
  std::vector<Vec> q;

  DiscretePath(double t0, double t1, std::vector<Vec> q);
  std::size_t steps() const { return q.size() - 1; }
  double h() const { return (t1 - t0) / static_cast<double>(steps()); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) * h(); }
  Vec midpoint(std::size_t i) const { return 0.5 * (q[i] + q[i + 1]); }
  Vec velocity(std::size_t i) const { return (q[i + 1] - q[i]) / h(); }
  /// d_v lambda at the midpoint of step i.
  Vec momentum(const LagrangianSpec& l, std::size_t i) const;
};

/// Samples q(t) at N + 1 uniform nodes of [t0, t1].
DiscretePath sample_path(const std::function<Vec(double)>& q, double t0, double t1, std::size_t n);

/// sum_i lambda(qbar_i, (q_{i+1} - q_i)/h) h.
double discrete_action(const LagrangianSpec& l, const DiscretePath& path);

/// Discrete action plus sum over interior nodes of h <f(t_i), q_i>.
double forced_action(const LagrangianSpec& l, const DiscretePath& path, const ForceField& f);

/// Interior residuals (p_i - p_{i-1})/h - avg d_q lambda - f(t_i), i = 1..N-1.
std::vector<Vec> euler_lagrange_residual(const LagrangianSpec& l, const DiscretePath& path, const ForceField& f = {});

struct BvpOptions {
  std::size_t max_iterations = 50;
  double tol = 1e-11;
};

/// Endpoints pinned at q_start, q_end; interior nodes solve the discrete
/// Euler-Lagrange equations. Quadratic Lagrangians take one linear solve,
/// custom ones damped Newton. Throws NumericalError on a singular system or
/// divergence.
DiscretePath solve_bvp(const LagrangianSpec& l, const Vec& q_start, const Vec& q_end, double t0, double t1,
                       std::size_t n, const ForceField& f = {}, const BvpOptions& opt = {});

/// Discrete Legendre momenta p0 = d_v lambda_0 - h/2 d_q lambda_0 and
/// p1 = d_v lambda_{N-1} + h/2 d_q lambda_{N-1}, so that
/// dS(w) = -sum h <f_i, w_i> + <p1, w_N> - <p0, w_0>.
std::pair<Covector, Covector> boundary_momenta(const LagrangianSpec& l, const DiscretePath& path);

/// Directional derivative of forced_action along the node variation w.
double action_variation(const LagrangianSpec& l, const DiscretePath& path, const ForceField& f,
                        const std::vector<Vec>& w);

}  // namespace vwork
