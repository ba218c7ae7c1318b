#include "vwork/virtual_set.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace vwork {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Mat identity(const EuclideanSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.dim());
  return Mat::Identity(n, n);
}

// Orthogonal projector coordinates: B B^T G v for g-orthonormal B.
Vec project_onto(const EuclideanSpace& space, const Mat& onb, const Vec& v) {
  if (onb.cols() == 0) return Vec::Zero(v.size());
  return onb * (onb.transpose() * (space.metric() * v));
}

double row_norm(const Eigen::Ref<const Eigen::RowVectorXd>& r) { return r.norm(); }

// Euclidean projection of y0 onto {y : a y >= 0} by enumerating active sets.
Vec project_polyhedral(const Mat& a, const Vec& y0) {
  const auto m = a.rows();
  if (m == 0) return y0;
  if ((a * y0).minCoeff() >= 0.0) return y0;
  Vec best = Vec::Zero(y0.size());
  double best_dist = y0.squaredNorm();
  if (m > 16) {
    // Dykstra's algorithm for large constraint counts.
    Vec y = y0;
    std::vector<Vec> incr(static_cast<std::size_t>(m), Vec::Zero(y0.size()));
    for (int it = 0; it < 500; ++it) {
      for (Eigen::Index i = 0; i < m; ++i) {
        Vec z = y + incr[static_cast<std::size_t>(i)];
        const Eigen::RowVectorXd ai = a.row(i);
        const double s = ai.dot(z);
        Vec p = z;
        if (s < 0.0) p -= (s / ai.squaredNorm()) * ai.transpose();
        incr[static_cast<std::size_t>(i)] = z - p;
        y = p;
      }
    }
    return y;
  }
  const std::uint32_t subsets = 1u << static_cast<unsigned>(m);
  for (std::uint32_t mask = 1; mask < subsets; ++mask) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < m; ++i)
      if (mask & (1u << static_cast<unsigned>(i))) rows.push_back(i);
    Mat as(static_cast<Eigen::Index>(rows.size()), a.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) as.row(static_cast<Eigen::Index>(r)) = a.row(rows[r]);
    const Vec corr = as.completeOrthogonalDecomposition().solve(as * y0);
    const Vec y = y0 - as.transpose() * corr;
    if ((a * y).minCoeff() < -1e-12 * (1.0 + y0.norm())) continue;
    const double d = (y - y0).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = y;
    }
  }
  return best;
}

struct ConeFrame {
  Mat eq_null;   // g-orthonormal basis of {E v = 0}
  Mat reduced;   // normals in eq_null coordinates
};

ConeFrame cone_frame(const EuclideanSpace& space, const HalfSpaceCone& c) {
  ConeFrame f;
  f.eq_null = c.equalities.rows() ? space.annihilated_subspace(c.equalities) : space.orthonormal_basis(identity(space));
  f.reduced = c.normals.rows() ? Mat(c.normals * f.eq_null) : Mat(0, f.eq_null.cols());
  return f;
}

void push_unit(const EuclideanSpace& space, std::vector<Vector>& out, const Vec& v) {
  const Vector w(v);
  const double n = space.norm(w);
  if (n > 1e-12) out.push_back((1.0 / n) * w);
}

void push_pm_columns(const EuclideanSpace& space, std::vector<Vector>& out, const Mat& b) {
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    push_unit(space, out, b.col(j));
    push_unit(space, out, -b.col(j));
  }
}

// Friction cone geometry: axis k and half-angle measured from it.
struct FrictionFrame {
  Vec k;
  double half_angle;
};

FrictionFrame friction_frame(const EuclideanSpace& space, const FrictionCone& c) {
  const Vec k = space.normalized(c.normal).coords();
  return {k, std::atan2(1.0, c.coefficient)};
}

}  // namespace

Mat intersect_subspaces(const EuclideanSpace& space, const Mat& a, const Mat& b) {
  const auto n = static_cast<Eigen::Index>(space.dim());
  if (a.cols() == 0 || b.cols() == 0) return Mat(n, 0);
  Mat stacked(n, a.cols() + b.cols());
  stacked << a, -b;
  Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > 1e-10 * smax) ++rank;
  const Mat null = svd.matrixV().rightCols(stacked.cols() - rank);
  return space.orthonormal_basis(a * null.topRows(a.cols()));
}

std::string VirtualSet::kind() const {
  return std::visit(Overloaded{[](const FullSpace&) { return std::string("full-space"); },
                               [](const LinearSubspace&) { return std::string("linear-subspace"); },
                               [](const HalfSpaceCone&) { return std::string("half-space-cone"); },
                               [](const FrictionCone&) { return std::string("friction-cone"); },
                               [](const SkateDistribution&) { return std::string("skate-distribution"); },
                               [](const CustomSet&) { return std::string("custom"); },
                               [](const Intersection&) { return std::string("intersection"); }},
                    v_);
}

bool VirtualSet::contains(const EuclideanSpace& space, const Vector& v, double tol) const {
  space.check_dim(v.dim(), "VirtualSet::contains");
  const double vn = space.norm(v);
  if (vn == 0.0) return true;
  return std::visit(
      Overloaded{
          [](const FullSpace&) { return true; },
          [&](const LinearSubspace& s) {
            const Vec p = project_onto(space, space.orthonormal_basis(s.basis), v.coords());
            return space.norm(Vector(Vec(v.coords() - p))) <= tol * vn;
          },
          [&](const SkateDistribution& s) {
            const Vec p = project_onto(space, space.orthonormal_basis(s.basis), v.coords());
            return space.norm(Vector(Vec(v.coords() - p))) <= tol * vn;
          },
          [&](const HalfSpaceCone& c) {
            for (Eigen::Index i = 0; i < c.normals.rows(); ++i)
              if (c.normals.row(i).dot(v.coords()) < -tol * vn * row_norm(c.normals.row(i))) return false;
            for (Eigen::Index i = 0; i < c.equalities.rows(); ++i)
              if (std::abs(c.equalities.row(i).dot(v.coords())) > tol * vn * row_norm(c.equalities.row(i)))
                return false;
            return true;
          },
          [&](const FrictionCone& c) {
            const Vec k = space.normalized(c.normal).coords();
            const double n = (space.metric() * k).dot(v.coords());
            const double tang2 = std::max(0.0, vn * vn - n * n);
            return n >= c.coefficient * std::sqrt(tang2) - tol * vn;
          },
          [&](const CustomSet& c) { return c.contains(v); },
          [&](const Intersection& c) {
            return std::all_of(c.parts.begin(), c.parts.end(),
                               [&](const VirtualSet& p) { return p.contains(space, v, tol); });
          }},
      v_);
}

bool VirtualSet::is_reversible() const {
  return std::visit(Overloaded{[](const FullSpace&) { return true; }, [](const LinearSubspace&) { return true; },
                               [](const SkateDistribution&) { return true; },
                               [](const HalfSpaceCone& c) { return c.normals.rows() == 0; },
                               [](const FrictionCone&) { return false; },
                               [](const CustomSet& c) { return c.reversible; },
                               [](const Intersection& c) {
                                 return std::all_of(c.parts.begin(), c.parts.end(),
                                                    [](const VirtualSet& p) { return p.is_reversible(); });
                               }},
                    v_);
}

bool VirtualSet::is_linear() const {
  return std::visit(Overloaded{[](const FullSpace&) { return true; }, [](const LinearSubspace&) { return true; },
                               [](const SkateDistribution&) { return true; },
                               [](const HalfSpaceCone& c) { return c.normals.rows() == 0; },
                               [](const FrictionCone&) { return false; }, [](const CustomSet&) { return false; },
                               [](const Intersection& c) {
                                 return std::all_of(c.parts.begin(), c.parts.end(),
                                                    [](const VirtualSet& p) { return p.is_linear(); });
                               }},
                    v_);
}

Mat VirtualSet::lineality(const EuclideanSpace& space) const {
  const auto n = static_cast<Eigen::Index>(space.dim());
  return std::visit(
      Overloaded{[&](const FullSpace&) { return space.orthonormal_basis(identity(space)); },
                 [&](const LinearSubspace& s) { return space.orthonormal_basis(s.basis); },
                 [&](const SkateDistribution& s) { return space.orthonormal_basis(s.basis); },
                 [&](const HalfSpaceCone& c) {
                   Mat rows(c.normals.rows() + c.equalities.rows(), n);
                   rows << c.normals, c.equalities;
                   return space.annihilated_subspace(rows);
                 },
                 [&](const FrictionCone& c) {
                   if (c.coefficient > 0.0) return Mat(n, 0);
                   return space.annihilated_subspace(space.metric_apply(c.normal).coords().transpose());
                 },
                 [&](const CustomSet&) { return Mat(n, 0); },
                 [&](const Intersection& c) {
                   Mat acc = space.orthonormal_basis(identity(space));
                   for (const auto& p : c.parts) acc = intersect_subspaces(space, acc, p.lineality(space));
                   return acc;
                 }},
      v_);
}

Vector VirtualSet::project(const EuclideanSpace& space, const Vector& v) const {
  space.check_dim(v.dim(), "VirtualSet::project");
  return std::visit(
      Overloaded{
          [&](const FullSpace&) { return v; },
          [&](const LinearSubspace& s) {
            return Vector(project_onto(space, space.orthonormal_basis(s.basis), v.coords()));
          },
          [&](const SkateDistribution& s) {
            return Vector(project_onto(space, space.orthonormal_basis(s.basis), v.coords()));
          },
          [&](const HalfSpaceCone& c) {
            const ConeFrame f = cone_frame(space, c);
            const Vec y0 = f.eq_null.transpose() * (space.metric() * v.coords());
            return Vector(Vec(f.eq_null * project_polyhedral(f.reduced, y0)));
          },
          [&](const FrictionCone& c) {
            const FrictionFrame f = friction_frame(space, c);
            const double n = (space.metric() * f.k).dot(v.coords());
            const Vec t = v.coords() - n * f.k;
            const double tau = space.norm(Vector(t));
            const double theta = std::atan2(tau, n);
            if (theta <= f.half_angle) return v;
            if (theta >= f.half_angle + std::numbers::pi / 2) return Vector::zero(space.dim());
            const double r = std::hypot(n, tau) * std::cos(theta - f.half_angle);
            Vec dir = std::cos(f.half_angle) * f.k;
            if (tau > 0.0) dir += std::sin(f.half_angle) * t / tau;
            return Vector(Vec(r * dir));
          },
          [&](const CustomSet& c) { return c.contains(v) ? v : Vector::zero(space.dim()); },
          [&](const Intersection& c) {
            // Dykstra's alternating projections.
            Vec y = v.coords();
            std::vector<Vec> incr(c.parts.size(), Vec::Zero(y.size()));
            for (int it = 0; it < 300; ++it) {
              for (std::size_t i = 0; i < c.parts.size(); ++i) {
                const Vec z = y + incr[i];
                const Vec p = c.parts[i].project(space, Vector(z)).coords();
                incr[i] = z - p;
                y = p;
              }
            }
            return Vector(y);
          }},
      v_);
}

std::vector<Vector> VirtualSet::sample_unit(const EuclideanSpace& space, Rng& rng, std::size_t n_random) const {
  std::vector<Vector> out;
  const std::size_t dim = space.dim();
  std::visit(
      Overloaded{
          [&](const FullSpace&) {
            const Mat b = space.orthonormal_basis(identity(space));
            push_pm_columns(space, out, b);
            for (std::size_t i = 0; i < n_random; ++i) push_unit(space, out, b * rng.gaussian(dim));
          },
          [&](const LinearSubspace& s) {
            const Mat b = space.orthonormal_basis(s.basis);
            push_pm_columns(space, out, b);
            if (b.cols() > 0)
              for (std::size_t i = 0; i < n_random; ++i)
                push_unit(space, out, b * rng.gaussian(static_cast<std::size_t>(b.cols())));
          },
          [&](const SkateDistribution& s) {
            const Mat b = space.orthonormal_basis(s.basis);
            push_pm_columns(space, out, b);
            for (std::size_t i = 0; i < n_random; ++i)
              push_unit(space, out, b * rng.gaussian(static_cast<std::size_t>(b.cols())));
          },
          [&](const HalfSpaceCone& c) {
            const Mat lin = lineality(space);
            push_pm_columns(space, out, lin);
            const ConeFrame f = cone_frame(space, c);
            // Pointed part lives in eq_null ∩ lin^perp.
            const Mat lin_y = f.eq_null.transpose() * (space.metric() * lin);
            Mat pointed_y;
            {
              const auto d = f.eq_null.cols();
              if (lin_y.cols() == 0) {
                pointed_y = Mat::Identity(d, d);
              } else {
                Eigen::JacobiSVD<Mat> svd(lin_y.transpose(), Eigen::ComputeFullV);
                Eigen::Index rank = 0;
                for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
                  if (svd.singularValues()[i] > 1e-10) ++rank;
                pointed_y = svd.matrixV().rightCols(d - rank);
              }
            }
            std::vector<Vec> rays;
            if (pointed_y.cols() > 0) {
              const Mat a = f.reduced * pointed_y;  // m x p
              Eigen::FullPivLU<Mat> lu(a);
              if (a.rows() == a.cols() && lu.isInvertible()) {
                const Mat inv = lu.inverse();
                for (Eigen::Index j = 0; j < inv.cols(); ++j) rays.push_back(f.eq_null * (pointed_y * inv.col(j)));
              } else {
                // Non-simplicial cone: rays found by projecting random directions.
                for (int i = 0; i < 64; ++i) {
                  const Vec y = project_polyhedral(f.reduced, pointed_y * rng.gaussian(static_cast<std::size_t>(pointed_y.cols())));
                  if (y.norm() > 1e-12) rays.push_back(f.eq_null * y);
                }
              }
            }
            for (const auto& r : rays) push_unit(space, out, r);
            for (std::size_t i = 0; i < rays.size(); ++i)
              for (std::size_t j = i + 1; j < rays.size(); ++j)
                push_unit(space, out, space.normalized(Vector(rays[i])).coords() + space.normalized(Vector(rays[j])).coords());
            for (std::size_t i = 0; i < n_random; ++i) {
              Vec v = Vec::Zero(static_cast<Eigen::Index>(dim));
              for (const auto& r : rays) v += std::abs(rng.normal()) * space.normalized(Vector(r)).coords();
              if (lin.cols() > 0) v += lin * rng.gaussian(static_cast<std::size_t>(lin.cols()));
              push_unit(space, out, v);
            }
          },
          [&](const FrictionCone& c) {
            const FrictionFrame f = friction_frame(space, c);
            const Mat tang = space.annihilated_subspace((space.metric() * f.k).transpose());
            push_unit(space, out, f.k);
            const double ca = std::cos(f.half_angle), sa = std::sin(f.half_angle);
            for (Eigen::Index j = 0; j < tang.cols(); ++j) {
              push_unit(space, out, ca * f.k + sa * tang.col(j));
              push_unit(space, out, ca * f.k - sa * tang.col(j));
            }
            for (std::size_t i = 0; i < n_random; ++i) {
              Vec t = tang * rng.gaussian(static_cast<std::size_t>(tang.cols()));
              const double tn = space.norm(Vector(t));
              if (tn == 0.0) continue;
              t /= tn;
              // Half of the random draws sit on the boundary.
              const double ang = (i % 2 == 0) ? f.half_angle : rng.uniform(0.0, f.half_angle);
              push_unit(space, out, std::cos(ang) * f.k + std::sin(ang) * t);
            }
          },
          [&](const CustomSet& c) {
            for (std::size_t i = 0; i < n_random; ++i) push_unit(space, out, c.sample_unit(rng).coords());
          },
          [&](const Intersection& c) {
            const Mat lin = lineality(space);
            push_pm_columns(space, out, lin);
            for (const auto& p : c.parts) {
              Rng sub(rng.engine()());
              for (const auto& v : p.sample_unit(space, sub, n_random / c.parts.size() + 1))
                if (contains(space, v, 1e-9)) out.push_back(v);
            }
            for (std::size_t i = 0; i < n_random; ++i) {
              const Vector p = project(space, Vector(rng.gaussian(dim)));
              if (contains(space, p, 1e-7)) push_unit(space, out, p.coords());
            }
          }},
      v_);
  return out;
}

bool VirtualSet::is_trivial(const EuclideanSpace& space) const {
  if (lineality(space).cols() > 0) return false;
  Rng rng(0x5eed);
  for (int i = 0; i < 32; ++i) {
    const Vector p = project(space, Vector(rng.gaussian(space.dim())));
    if (space.norm(p) > 1e-9 && contains(space, p, 1e-7)) return false;
  }
  return true;
}

}  // namespace vwork
