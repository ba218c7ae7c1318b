#include "vwork/examples.hpp"

#include <Eigen/LU>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "vwork/compose.hpp"
#include "vwork/equilibrium.hpp"
#include "vwork/legendre.hpp"
#include "vwork/processes.hpp"
#include "vwork/random.hpp"

namespace vwork {

bool ExampleReport::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return !checks.empty();
}

namespace {

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

class Suite {
 public:
  Suite(int n, std::string title) {
    r_.number = n;
    r_.title = std::move(title);
  }
  void check(std::string name, bool pass, std::string detail = {}) {
    r_.checks.push_back({std::move(name), pass, std::move(detail)});
  }
  /// Runs f and records a failed check if it throws.
  template <class F>
  void guarded(const std::string& name, F f) {
    try {
      f();
    } catch (const std::exception& e) {
      check(name, false, std::string("threw: ") + e.what());
    }
  }
  void value(std::string name, double v) { r_.values.emplace_back(std::move(name), v); }
  void label(std::string name, std::string v) { r_.labels.emplace_back(std::move(name), std::move(v)); }
  ExampleReport take() { return std::move(r_); }

 private:
  ExampleReport r_;
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

/// Membership under the exact closed form and the generic optimizer.
std::pair<Membership, Membership> both_paths(const StaticSystem& sys, const Point& q, const Covector& f) {
  const ConstitutiveSet exact(sys);
  const ConstitutiveSet generic(sys, ConstitutiveMode::Generic);
  return {exact.contains(q, f), generic.contains(q, f)};
}

void membership_check(Suite& s, const std::string& name, const StaticSystem& sys, const Point& q, const Covector& f,
                      Membership want) {
  s.guarded(name, [&] {
    const auto [e, g] = both_paths(sys, q, f);
    s.check(name, e == want && g == want, "exact " + to_string(e) + ", generic " + to_string(g) + ", expected " + to_string(want));
  });
}

double fd_directional(const ScalarField& u, const Point& q, const Vector& v) {
  const double h = 1e-6;
  return (u(q + h * v) - u(q - h * v)) / (2 * h);
}

template <class T>
T sq(const T& x) {
  return x * x;
}

// ---------------------------------------------------------------------------

ExampleReport example_spring(std::uint64_t seed) {
  Suite s(1, "linear spring");
  const EuclideanSpace sp(3);
  const Point q0{0, 0, 0};
  const StaticSystem spring = make_spring(q0, 2.0, sp);
  const ScalarField& u = *spring.potential;
  s.check("U vanishes at the center", u(q0) == 0.0);
  s.check("U = 1 at unit distance for k = 2", close(u(Point{1, 0, 0}), 1.0, 1e-12));
  {
    Rng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Point q(rng.gaussian(3));
      const Vector v(rng.gaussian(3));
      worst = std::max(worst, std::abs(spring.theta(q, v) - fd_directional(u, q, v)));
    }
    s.check("theta matches finite differences of U", worst <= 1e-8, "max deviation " + num(worst));
  }
  s.guarded("work along a straight line equals U(end) - U(start)", [&] {
    const double w = work_along(spring, straight_line(sp, q0, Point{1, 0, 0})).total;
    s.check("work along a straight line equals U(end) - U(start)", close(w, 1.0, 1e-9), "W = " + num(w));
  });
  s.guarded("work jet at the center", [&] {
    const Vector v{0.6, -0.3, 0.2};
    const Jet j = work_jet(spring, straight_line(sp, q0, q0 + v), 2);
    const double want = 0.5 * 2.0 * sp.inner(v, v);
    s.check("work jet at the center is (0, 0, k/2 |v|^2)",
            close(j[0], 0, 1e-12) && close(j[1], 0, 1e-12) && close(j[2], want, 1e-10) &&
                classify(j, kJetZeroBand) == JetSign::Positive,
            "e2 = " + num(j[2]));
  });
  s.guarded("work jet toward the center", [&] {
    const Point q{1, 1, 0};
    const Jet j = work_jet(spring, straight_line(sp, q, q0), 2);
    s.check("work jet toward the center starts with -k |q - q0|^2",
            close(j[1], -4.0, 1e-10) && classify(j, kJetZeroBand) == JetSign::Negative, "e1 = " + num(j[1]));
  });
  membership_check(s, "f = k g(q - q0) is in S_q", spring, Point{1, 0, 0}, Covector{2, 0, 0}, Membership::In);
  membership_check(s, "f != k g(q - q0) is not in S_q", spring, Point{1, 0, 0}, Covector{2, 0.5, 0}, Membership::Out);
  s.guarded("S_q is a singleton", [&] {
    Rng rng(seed);
    const auto pts = ConstitutiveSet(spring).sample_boundary(Point{1, 0, 0}, 3, rng);
    bool ok = !pts.empty();
    for (const auto& f : pts) ok = ok && (f.coords() - Vec::Unit(3, 0) * 2.0).norm() < 1e-12;
    s.check("S_q is the singleton {k g(q - q0)}", ok);
  });
  s.guarded("equilibrium verdicts", [&] {
    JetCheckOptions opt;
    opt.seed = seed;
    const auto at_center = jet_equilibrium_check(spring, q0, opt);
    s.check("center is a sampled equilibrium", at_center.status == EquilibriumStatus::EquilibriumSampled,
            to_string(at_center.status));
    const auto off = jet_equilibrium_check(spring, Point{0.5, 0, 0}, opt);
    s.check("off-center point is not an equilibrium with a witness",
            off.status == EquilibriumStatus::NotEquilibrium && off.witness_direction.has_value(), to_string(off.status));
    const auto first = virtual_work_check(spring, q0, 64, seed);
    s.check("virtual work vanishes at the center", first.status != EquilibriumStatus::NotEquilibrium,
            to_string(first.status));
  });
  s.guarded("saddle and quartic", [&] {
    JetCheckOptions opt;
    opt.seed = seed;
    const auto saddle = make_potential_poly(EuclideanSpace(2), {{1.0, {2, 0}}, {-1.0, {0, 2}}});
    const auto vs = jet_equilibrium_check(saddle, Point{0, 0}, opt);
    s.check("saddle x^2 - y^2 is not an equilibrium", vs.status == EquilibriumStatus::NotEquilibrium, to_string(vs.status));
    const auto quartic = make_potential_poly(EuclideanSpace(1), {{1.0, {4}}});
    const auto v2 = jet_equilibrium_check(quartic, Point{0.0}, opt);
    opt.order = 4;
    const auto v4 = jet_equilibrium_check(quartic, Point{0.0}, opt);
    s.check("x^4 is indeterminate at order 2", v2.status == EquilibriumStatus::Indeterminate, to_string(v2.status));
    s.check("x^4 is a sampled equilibrium at order 4", v4.status == EquilibriumStatus::EquilibriumSampled,
            to_string(v4.status));
  });
  return s.take();
}

ExampleReport example_bilinear(std::uint64_t seed) {
  Suite s(2, "bilinear work form");
  const EuclideanSpace sp(2);
  const Point q0{0, 0};
  const StaticSystem id = make_bilinear(q0, Mat::Identity(2, 2), sp);
  s.check("omega = identity, q - q0 = (1, 0), w = (0, 1) gives zero work", id.theta(Point{1, 0}, Vector{0, 1}) == 0.0);
  Mat anti(2, 2);
  anti << 0, 1, -1, 0;
  const StaticSystem rot = make_bilinear(q0, anti, sp);
  s.check("antisymmetric omega carries no potential", !rot.potential.has_value());
  s.guarded("round trip", [&] {
    const Point a{0, 0}, b{1, 0}, c{1, 1};
    const double w = work_along(rot, straight_line(sp, a, b)).total + work_along(rot, straight_line(sp, b, c)).total +
                     work_along(rot, straight_line(sp, c, a)).total;
    // Segment p -> p + d contributes omega(p, d) + omega(d, d) / 2.
    auto seg = [&](const Point& p, const Point& e) {
      const Vec d = (e - p).coords();
      return p.coords().dot(anti * d) + 0.5 * d.dot(anti * d);
    };
    const double oracle = seg(a, b) + seg(b, c) + seg(c, a);
    s.check("work around a closed triangle is nonzero and matches the line integral",
            std::abs(w) > 0.5 && close(w, oracle, 1e-9), "W = " + num(w) + ", oracle " + num(oracle));
  });
  Mat sym(2, 2);
  sym << 2, 0.5, 0.5, 1;
  const StaticSystem pot = make_bilinear(q0, sym, sp);
  s.check("symmetric omega carries a potential", pot.potential.has_value());
  if (pot.potential) {
    Rng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Point q(rng.gaussian(2));
      const Vector v(rng.gaussian(2));
      worst = std::max(worst, std::abs(pot.theta(q, v) - fd_directional(*pot.potential, q, v)));
    }
    s.check("symmetric omega: theta matches dU", worst <= 1e-8, "max deviation " + num(worst));
  }
  const Point q{0.4, -0.7};
  membership_check(s, "f = omega(q - q0, .) is in S_q", rot, q, Covector(Vec(anti.transpose() * q.coords())),
                   Membership::In);
  membership_check(s, "a perturbed f is not in S_q", rot, q, Covector(Vec(anti.transpose() * q.coords() + Vec::Ones(2) * 0.1)),
                   Membership::Out);
  return s.take();
}

ExampleReport example_friction(std::uint64_t seed) {
  Suite s(3, "isotropic and anisotropic friction");
  const EuclideanSpace sp(2);
  const StaticSystem iso = make_friction(Mat::Identity(2, 2), sp);
  const Point q{0.3, 0.1};
  const Vector v{0.6, 0.8};
  s.check("rho = identity, unit v gives theta = 1", close(iso.theta(q, v), 1.0, 1e-15));
  s.check("theta is positively homogeneous", close(iso.theta(q, 2.0 * v), 2.0 * iso.theta(q, v), 1e-15));
  Mat rho(2, 2);
  rho << 4, 0, 0, 1;
  const StaticSystem aniso = make_friction(rho, sp);
  s.check("rho = diag(4, 1), v = (1, 0) gives theta = 2", close(aniso.theta(q, Vector{1, 0}), 2.0, 1e-15));
  s.guarded("work equals path length", [&] {
    const double l = 2.5;
    const Point end = q + l * v;
    const double w = work_along(iso, straight_line(sp, q, end)).total;
    s.check("work along a segment equals its length", close(w, l, 1e-9), "W = " + num(w));
  });
  s.guarded("friction work jet", [&] {
    const Jet j = work_jet(iso, straight_line(sp, q, q + Vector{3, 4}), 2);
    s.check("friction work jet starts with |v| > 0", close(j[1], 5.0, 1e-10) && classify(j, kJetZeroBand) == JetSign::Positive,
            "e1 = " + num(j[1]));
  });
  membership_check(s, "|f| = 0.5 is in S_q", iso, q, Covector{0.3, 0.4}, Membership::In);
  membership_check(s, "|f| = 2 is not in S_q", iso, q, Covector{1.2, 1.6}, Membership::Out);
  s.guarded("boundary samples", [&] {
    Rng rng(seed);
    const auto pts = ConstitutiveSet(iso).sample_boundary(q, 4, rng);
    bool ok = pts.size() == 4;
    for (const auto& f : pts) ok = ok && close(sp.dual_norm(f), 1.0, 1e-12);
    s.check("four boundary samples are unit covectors", ok);
  });
  {
    Rng rng(seed + 1);
    const Mat rho_inv = rho.inverse();
    std::size_t bad = 0;
    for (int i = 0; i < 10000; ++i) {
      Vec f = rng.gaussian(2);
      f /= std::sqrt(f.dot(rho_inv * f)) / rng.uniform();
      const Vec w = rng.gaussian(2);
      if (f.dot(w) > std::sqrt(w.dot(rho * w)) + 1e-12) ++bad;
    }
    s.check("<f, v> <= sqrt(<rho v, v>) whenever <f, rho^-1 f> <= 1", bad == 0, num(static_cast<double>(bad)) + " violations");
  }
  return s.take();
}

ExampleReport example_rod(std::uint64_t) {
  Suite s(4, "rigid rod");
  const EuclideanSpace sp(3);
  const Point q0{0, 0, 0};
  const double a = 1.5;
  const StaticSystem rod = make_rod(q0, a, sp);
  const Point q = q0 + (a / 3.0) * Vector{1, 2, 2};
  s.guarded("virtual displacements", [&] {
    const Mat b = rod.V(q).lineality(sp);
    const Vec radial = sp.metric() * (q - q0).coords();
    s.check("V is the plane normal to q - q0", b.cols() == 2 && (radial.transpose() * b).norm() < 1e-12);
  });
  const Covector radial(Vec(3.0 * sp.metric() * (q - q0).coords() / (a * a)));
  membership_check(s, "radial f is in S_q", rod, q, radial, Membership::In);
  membership_check(s, "f with a tangential part is not in S_q", rod, q, radial + Covector{0.2, -0.1, 0}, Membership::Out);
  s.check("configurations off the sphere are rejected", !rod.admissible(Point{0.1, 0, 0}));
  return s.take();
}

ExampleReport example_corner(std::uint64_t seed) {
  Suite s(5, "corner with one-sided constraints");
  const EuclideanSpace sp(3);
  const Point q0{0, 0, 0};
  const Vector u1{1, 0, 0}, u2{0, 1, 0};
  const StaticSystem corner = make_corner(q0, u1, u2, sp);
  s.check("V is the whole space at an interior point",
          std::holds_alternative<FullSpace>(corner.V(Point{1, 1, 0}).variant()));
  s.guarded("first-order test", [&] {
    const StaticSystem loaded = compose(corner, make_potential_poly(sp, {{1.0, {1, 0, 0}}, {1.0, {0, 1, 0}}}));
    const auto v = virtual_work_check(loaded, q0, 64, seed);
    s.check("<g(u1) + g(u2), v> >= 0 on the cone passes the first-order test",
            v.status != EquilibriumStatus::NotEquilibrium, to_string(v.status));
    const StaticSystem pushed = compose(corner, make_potential_poly(sp, {{-1.0, {1, 0, 0}}}));
    const auto w = virtual_work_check(pushed, q0, 64, seed);
    s.check("a load pointing out of the corner fails the first-order test",
            w.status == EquilibriumStatus::NotEquilibrium, to_string(w.status));
  });
  membership_check(s, "pressing force -(g(u1) + g(u2)) is in S_q", corner, q0, Covector{-1, -1, 0}, Membership::In);
  membership_check(s, "pulling force g(u1) is not in S_q", corner, q0, Covector{1, 0, 0}, Membership::Out);
  membership_check(s, "a force along the edge is not in S_q", corner, q0, Covector{0, 0, 1}, Membership::Out);
  membership_check(s, "only zero force at an interior point", corner, Point{1, 1, 0}, Covector{0, 0, 0}, Membership::In);
  return s.take();
}

ExampleReport example_skate(std::uint64_t) {
  Suite s(6, "skate");
  const double angle = 0.3;
  const Point q{0.5, -1.0, angle};
  const Vec phi{{std::cos(angle), std::sin(angle)}};
  const Covector across{-phi[1], phi[0]};
  s.check("f normal to the blade with tau = 0 is in S_q", skate_constitutive(q, across, 0.0) == Membership::In);
  s.check("f along the blade is not in S_q", skate_constitutive(q, Covector{phi[0], phi[1]}, 0.0) == Membership::Out);
  s.check("tau != 0 is not in S_q", skate_constitutive(q, Covector{0, 0}, 1.0) == Membership::Out);
  const StaticSystem skate = make_skate();
  membership_check(s, "skate set agrees with the generic path (normal force)", skate, q,
                   Covector{across[0], across[1], 0.0}, Membership::In);
  membership_check(s, "skate set agrees with the generic path (torque)", skate, q, Covector{0, 0, 0.5}, Membership::Out);
  return s.take();
}

ExampleReport example_coulomb(std::uint64_t seed) {
  Suite s(7, "Coulomb static friction");
  const EuclideanSpace sp(3);
  const Point q0{0, 0, 0};
  const Vector k{0, 0, 1};
  const StaticSystem cone = make_coulomb(q0, k, 0.5, sp);
  const Point q{0.3, -0.2, 0};
  membership_check(s, "pure pressing force -g(k) is in S_q", cone, q, Covector{0, 0, -1}, Membership::In);
  membership_check(s, "purely tangential force is not in S_q", cone, q, Covector{1, 0, 0}, Membership::Out);
  membership_check(s, "force inside the cone is in S_q", cone, q, Covector{0.3, 0, -1}, Membership::In);
  const StaticSystem slick = make_coulomb(q0, k, 0.0, sp);
  const VirtualSet vs = slick.V(q);
  s.check("nu = 0 reduces V to the half-space <g(k), v> >= 0",
          vs.contains(sp, Vector{1, 0, 0}) && vs.contains(sp, Vector{1, 2, 0.1}) && !vs.contains(sp, Vector{0, 0, -1}));
  {
    Rng rng(seed);
    std::size_t bad = 0;
    const VirtualSet v = cone.V(q);
    for (int i = 0; i < 10000; ++i) {
      const Vec d = rng.gaussian(3);
      const bool member = d[2] >= 0.5 * std::hypot(d[0], d[1]);
      if (std::abs(d[2] - 0.5 * std::hypot(d[0], d[1])) < 1e-9) continue;
      if (v.contains(sp, Vector(d)) != member) ++bad;
    }
    s.check("cone membership matches n >= nu |t| on random vectors", bad == 0, num(static_cast<double>(bad)) + " mismatches");
  }
  s.guarded("boundary of the cone", [&] {
    Rng rng(seed);
    const StaticSystem unit = make_coulomb(q0, k, 1.0, sp);
    const auto pts = ConstitutiveSet(unit).sample_boundary(q, 6, rng);
    bool ok = pts.size() == 6;
    for (const auto& f : pts) ok = ok && close(std::hypot(f[0], f[1]), -f[2], 1e-12);
    s.check("nu = 1 boundary covectors have tangential norm -<f, k>", ok);
  });
  return s.take();
}

ExampleReport example_three_springs(std::uint64_t seed) {
  Suite s(8, "three springs, one point not controlled");
  const Point q0{0, 0, 0};
  const ControlledSystem cs = three_springs(q0, 1, 1, 1);
  const Point q1{0.8, -0.4, 0.3};
  const Point on_section{0.8, -0.4, 0.3, 0.4, -0.2, 0.15};
  s.guarded("residuals", [&] {
    s.check("critical residual vanishes on the section",
            critical_residual(cs.system, cs.fibration, on_section) < 1e-12);
    const Vec delta = Vec(Vec::Unit(6, 4)) * 1e-3;
    const double r = critical_residual(cs.system, cs.fibration, Point(Vec(on_section.coords() + delta)));
    s.check("critical residual off the section is (k20 + k21) |delta|", close(r, 2e-3, 1e-12), "residual " + num(r));
  });
  s.guarded("critical set", [&] {
    Rng rng(seed);
    std::vector<Point> seeds;
    for (int i = 0; i < 6; ++i) seeds.emplace_back(rng.gaussian(6));
    const CriticalSet set = solve_critical(cs.system, cs.fibration, q1, seeds);
    const bool one = set.points.size() == 1 && set.warning.empty();
    s.check("critical set over q1 is a single point", one, num(static_cast<double>(set.points.size())) + " points");
    if (!one) return;
    const CriticalPoint& cp = set.points.front();
    s.check("critical point lies on the section q2 = q0 + (q1 - q0)/2",
            (cp.qbar.coords().tail(3) - 0.5 * q1.coords()).norm() < 1e-8);
    const ReducedForce f = reduced_force(cs.system, cs.fibration, cp);
    const double stiffness = f.force.coords().dot(q1.coords()) / q1.coords().squaredNorm();
    s.check("reduced force is (3/2) g(q1 - q0)", f.unique() && (f.force.coords() - 1.5 * q1.coords()).norm() < 1e-8,
            "stiffness " + num(stiffness));
    s.value("effective stiffness", stiffness);
  });
  return s.take();
}

ExampleReport example_buckling(std::uint64_t) {
  Suite s(9, "buckling of a rod");
  const BucklingParams p;
  const ControlledSystem cs = buckling_rod(p);
  const double crit = p.k * p.a / (p.k + p.k_prime);
  s.guarded("branches below the threshold", [&] {
    const CriticalSet set = buckling_critical_set(cs, 0.4);
    std::size_t straight = 0, buckled = 0;
    double worst = 0.0;
    for (const auto& cp : set.points) {
      if (cp.branch == "straight") ++straight;
      if (cp.branch == "buckled") {
        ++buckled;
        worst = std::max(worst, std::abs((cp.qbar.coords().tail(3) - cp.qbar.coords().head(3)).norm() - crit));
      }
    }
    s.check("at |q1 - q0| = 0.4 the straight branch and a circle of buckled points exist",
            straight == 1 && buckled >= 4 && worst < 1e-8,
            num(static_cast<double>(straight)) + " straight, " + num(static_cast<double>(buckled)) + " buckled");
    for (const auto& cp : set.points) {
      const ReducedForce f = reduced_force(cs.system, cs.fibration, cp);
      const double along = f.force[2];
      const double want = cp.branch == "straight" ? p.k * (1 - p.a / 0.4) * 0.4 : -p.k_prime * 0.4;
      if (!close(along, want, 1e-8)) {
        s.check("reduced force law on branch " + cp.branch, false, "<f1, u> = " + num(along) + ", expected " + num(want));
        return;
      }
    }
    s.check("reduced force <f1, u> follows the straight and buckled laws", true);
  });
  s.guarded("branches above the threshold", [&] {
    const CriticalSet set = buckling_critical_set(cs, 0.8);
    bool only_straight = !set.points.empty();
    for (const auto& cp : set.points) only_straight = only_straight && cp.branch == "straight";
    s.check("at |q1 - q0| = 0.8 only the straight branch exists", only_straight && set.points.size() == 1);
  });
  s.guarded("threshold", [&] {
    const double t = buckling_threshold(p, 0.1, 0.9, 1e-7);
    s.check("bisection on the branch count locates ka/(k + k')", close(t, crit, 1e-6), "threshold " + num(t));
    s.value("bifurcation threshold", t);
    s.value("ka/(k+k')", crit);
  });
  return s.take();
}

ExampleReport example_tethered(std::uint64_t seed) {
  Suite s(10, "rod tethered to a fixed point, spring to a controlled point");
  const double a = 1.0, k = 1.0;
  const ControlledSystem cs = tethered_rod(a, k);
  s.guarded("two critical points", [&] {
    const Point q1{0.6, 0.9, -0.3};
    const CriticalSet set = tethered_critical_set(cs, a, q1);
    const Vec dir = q1.coords().normalized();
    bool ok = set.points.size() == 2 && set.warning == "critical set is not a section";
    for (const auto& cp : set.points) {
      const double sign = cp.branch == "aligned" ? 1.0 : -1.0;
      ok = ok && (cp.qbar.coords().tail(3) - sign * a * dir).norm() < 1e-8;
      const ReducedForce f = reduced_force(cs.system, cs.fibration, cp);
      const Vec want = k * (1 - sign * a / q1.coords().norm()) * q1.coords();
      ok = ok && (f.force.coords() - want).norm() < 1e-8;
    }
    s.check("q1 != q0 gives q2 = q0 +- a (q1 - q0)/|q1 - q0| with the matching forces", ok,
            num(static_cast<double>(set.points.size())) + " points");
  });
  s.guarded("family at the fixed point", [&] {
    const CriticalSet set = tethered_critical_set(cs, a, Point{0, 0, 0});
    bool ok = set.points.size() > 2 && !set.warning.empty();
    for (const auto& cp : set.points) {
      ok = ok && cp.family_dim == 2;
      const ReducedForce f = reduced_force(cs.system, cs.fibration, cp);
      ok = ok && close(f.force.coords().norm(), k * a, 1e-8);
    }
    s.check("q1 = q0: a two-dimensional family with |f1| = ka", ok);
  });
  s.check("rank 3 away from r = 0", singularity_rank(Vector{0, 0.6, 0.8}, 1.0) == 3);
  s.check("rank 1 at r = 0", singularity_rank(Vector{0, 0.6, 0.8}, 0.0) == 1);
  s.check("rank 1 at r = 1e-12 under the numerical threshold", singularity_rank(Vector{0, 0.6, 0.8}, 1e-12) == 1);
  {
    Rng rng(seed);
    const EuclideanSpace sp(3);
    double worst = 0.0, agree = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vector w = sp.normalized(Vector(rng.gaussian(3)));
      const double r = rng.uniform(-2, 2);
      auto tangent = [&] {
        const Vec d = rng.gaussian(3);
        return Vector(Vec(d - d.dot(w.coords()) * w.coords()));
      };
      const Vector d1 = tangent(), d2 = tangent();
      const double dr1 = rng.normal(), dr2 = rng.normal();
      const double e = pullback_form(sp, k, a, w, r, d1, dr1, d2, dr2);
      const double t = pullback_form_via_tangent_map(sp, k, a, w, r, d1, dr1, d2, dr2);
      worst = std::max({worst, std::abs(e), std::abs(t)});
      agree = std::max(agree, std::abs(e - t));
    }
    s.check("pull-back of the symplectic form vanishes", worst < 1e-9, "max |omega| " + num(worst));
    s.check("explicit and tangent-map pull-backs agree", agree < 1e-12);
  }
  return s.take();
}

ExampleReport example_spheres(std::uint64_t seed) {
  Suite s(11, "two rigid spheres");
  const double a = 1.0;
  const EuclideanSpace sp(3);
  s.guarded("clean contact", [&] {
    const Point c1{0, 0, 0}, c2{a, 0, 0};
    const StaticSystem s1 = sphere_system(c1, a), s2 = sphere_system(c2, a);
    const Point q{a / 2, std::sqrt(a * a - a * a / 4), 0};
    const CleanReport r = clean_check(s1, s2, q);
    s.check("centers a apart: Clean", r.status == Cleanliness::Clean,
            to_string(r.status) + ", dim V = " + num(static_cast<double>(r.virtual_dim)));
    s.label("distance a", to_string(r.status));
    Rng rng(seed);
    const SumReport sum = sum_check(s1, s2, q, 500, rng);
    s.check("S_q = S_1q + S_2q on 500 covectors", sum.equivalence_failures == 0 && sum.max_violation < 1e-8,
            "violation " + num(sum.max_violation) + ", failures " + num(static_cast<double>(sum.equivalence_failures)));
    const ComposedConstitutive cc = composed_constitutive(s1, s2, q);
    const Covector radial = Covector(Vec((q - c1).coords() - 2.0 * (q - c2).coords()));
    s.check("composed S_q contains combinations of both radial directions",
            cc.residual(sp, radial) < 1e-12 && cc.residual(sp, Covector{0, 0, 1}) > 0.5 && cc.warning.empty());
  });
  s.guarded("tangent contact", [&] {
    const Point c1{0, 0, 0}, c2{2 * a, 0, 0};
    const StaticSystem s1 = sphere_system(c1, a), s2 = sphere_system(c2, a);
    const Point q{a, 0, 0};
    const CleanReport r = clean_check(s1, s2, q);
    s.check("centers 2a apart: NotClean", r.status == Cleanliness::NotClean && r.virtual_dim == 2,
            to_string(r.status) + ", dim V = " + num(static_cast<double>(r.virtual_dim)));
    s.label("distance 2a", to_string(r.status));
    const ComposedConstitutive cc = composed_constitutive(s1, s2, q);
    s.check("NotClean constitutive set is generated by V1 and V2 with a warning",
            !cc.warning.empty() && cc.virtual_basis.cols() == 2);
  });
  s.guarded("near-tangent contact", [&] {
    const double eps = 1e-3;
    const Point c1{0, 0, 0}, c2{2 * a - eps, 0, 0};
    const StaticSystem both = compose(sphere_system(c1, a), sphere_system(c2, a));
    const double x = (2 * a - eps) / 2;
    const Point q{x, std::sqrt(a * a - x * x), 0};
    s.check("centers 2a - eps apart: C0 is a circle and V has dimension 1",
            both.admissible(q) && both.V(q).lineality(sp).cols() == 1);
  });
  s.guarded("composition of springs", [&] {
    const Point q0{0, 0, 0}, q{0.3, -0.2, 0.5};
    const StaticSystem sum = compose(make_spring(q0, 1.0, sp), make_spring(q0, 2.0, sp));
    const ConstitutiveSet cs(sum, ConstitutiveMode::Generic);
    s.check("spring k = 1 composed with spring k = 2 behaves as k = 3",
            cs.contains(q, Covector(Vec(3.0 * q.coords()))) == Membership::In &&
                cs.contains(q, Covector(Vec(2.9 * q.coords()))) == Membership::Out);
    const StaticSystem same = compose(make_spring(q0, 1.0, sp), make_free(sp));
    s.check("composing with the free system is the identity",
            same.kind == "spring" && close(same.theta(q, Vector{1, 0, 0}), 0.3, 1e-15));
  });
  return s.take();
}

}  // namespace

// ---------------------------------------------------------------------------

ControlledSystem three_springs(const Point& q0, double k10, double k20, double k21) {
  if (q0.dim() != 3) throw DimensionError("three_springs: q0 must be in R^3");
  const Vec c = q0.coords();
  auto energy = [=](auto x) {
    auto acc = constant_like(x[0], 0.0);
    for (int i = 0; i < 3; ++i) {
      acc = acc + 0.5 * k10 * sq(x[i] - c[i]) + 0.5 * k20 * sq(x[i + 3] - c[i]) + 0.5 * k21 * sq(x[i + 3] - x[i]);
    }
    return acc;
  };
  auto grad = [=](auto x) {
    using T = std::decay_t<decltype(x[0])>;
    std::vector<T> g;
    for (int i = 0; i < 3; ++i) g.push_back(k10 * (x[i] - c[i]) - k21 * (x[i + 3] - x[i]));
    for (int i = 0; i < 3; ++i) g.push_back(k20 * (x[i + 3] - c[i]) + k21 * (x[i + 3] - x[i]));
    return g;
  };
  const EuclideanSpace q(3);
  const EuclideanSpace total = q.product(q);
  StaticSystem sys = make_holonomic(total, {}, make_scalar_field(energy, grad), "three-springs");
  return {std::move(sys), Fibration::first_factor(q)};
}

ControlledSystem buckling_rod(const BucklingParams& p) {
  const double a = p.a, k = p.k, kp = p.k_prime;
  auto length = [](auto x) {
    using std::sqrt;
    return sqrt(sq(x[0] - x[3]) + sq(x[1] - x[4]) + sq(x[2] - x[5]));
  };
  auto energy = [=](auto x) {
    const auto n = length(x);
    return 0.5 * k * sq(n - a) + 0.5 * kp * (sq(x[3]) + sq(x[4]) + sq(x[5]));
  };
  auto grad = [=](auto x) {
    using T = std::decay_t<decltype(x[0])>;
    const T n = length(x);
    const T t = k * (n - a) / n;
    std::vector<T> g;
    for (int i = 0; i < 3; ++i) g.push_back(t * (x[i] - x[i + 3]));
    for (int i = 0; i < 3; ++i) g.push_back(t * (x[i + 3] - x[i]) + kp * x[i + 3]);
    return g;
  };
  const EuclideanSpace q(3);
  const EuclideanSpace total = q.product(q);
  const Point origin = Point::zero(6);
  std::vector<Constraint> cons;
  cons.push_back(affine_constraint(Covector{1, 0, 0, 0, 0, 0}, origin, Constraint::Kind::Equality, "q1 on the axis"));
  cons.push_back(affine_constraint(Covector{0, 1, 0, 0, 0, 0}, origin, Constraint::Kind::Equality, "q1 on the axis"));
  cons.push_back(affine_constraint(Covector{0, 0, 0, 0, 0, 1}, origin, Constraint::Kind::Equality, "q2 in the plane"));
  StaticSystem sys = make_holonomic(total, std::move(cons), make_scalar_field(energy, grad), "buckling-rod");
  return {std::move(sys), Fibration::first_factor(q)};
}

CriticalSet buckling_critical_set(const ControlledSystem& cs, double d) {
  std::vector<Point> seeds{Point{0, 0, d, 0, 0, 0}};
  for (double r : {1e-4, 1e-3, 1e-2, 0.1, 0.3, 0.6, 1.0})
    for (int j = 0; j < 8; ++j) {
      const double t = 2 * std::numbers::pi * j / 8;
      seeds.push_back(Point{0, 0, d, r * std::cos(t), r * std::sin(t), 0});
    }
  return solve_critical(cs.system, cs.fibration, Point{0, 0, d}, seeds, [](const CriticalPoint& cp) {
    return cp.qbar.coords().tail(3).norm() < 1e-7 ? std::string("straight") : std::string("buckled");
  });
}

double buckling_threshold(const BucklingParams& p, double lo, double hi, double tol) {
  const ControlledSystem cs = buckling_rod(p);
  auto buckled = [&](double d) {
    for (const auto& cp : buckling_critical_set(cs, d).points)
      if (cp.branch == "buckled") return true;
    return false;
  };
  const bool at_lo = buckled(lo);
  if (at_lo == buckled(hi)) throw NumericalError("buckling_threshold: branch count does not change on the bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (buckled(mid) == at_lo ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ControlledSystem tethered_rod(double a, double k) {
  auto energy = [=](auto x) { return 0.5 * k * (sq(x[0] - x[3]) + sq(x[1] - x[4]) + sq(x[2] - x[5])); };
  auto grad = [=](auto x) {
    using T = std::decay_t<decltype(x[0])>;
    std::vector<T> g;
    for (int i = 0; i < 3; ++i) g.push_back(k * (x[i] - x[i + 3]));
    for (int i = 0; i < 3; ++i) g.push_back(k * (x[i + 3] - x[i]));
    return g;
  };
  const EuclideanSpace q(3);
  const EuclideanSpace total = q.product(q);
  std::vector<Constraint> cons{sphere_constraint(q, 3, 6, Point::zero(3), a, "rod")};
  StaticSystem sys = make_holonomic(total, std::move(cons), make_scalar_field(energy, grad), "tethered-rod");
  return {std::move(sys), Fibration::first_factor(q)};
}

CriticalSet tethered_critical_set(const ControlledSystem& cs, double a, const Point& q1) {
  // Fibonacci lattice on the sphere.
  std::vector<Point> seeds;
  const int n = 32;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(1.0 - z * z);
    const double t = golden * i;
    seeds.push_back(Point{q1[0], q1[1], q1[2], a * r * std::cos(t), a * r * std::sin(t), a * z});
  }
  const bool at_center = q1.coords().norm() < 1e-12;
  return solve_critical(cs.system, cs.fibration, q1, seeds, [at_center](const CriticalPoint& cp) {
    if (at_center) return std::string("family");
    return cp.qbar.coords().tail(3).dot(cp.q.coords()) > 0 ? std::string("aligned") : std::string("opposed");
  });
}

StaticSystem sphere_system(const Point& center, double a) {
  const EuclideanSpace sp(3);
  return make_holonomic(sp, {sphere_constraint(sp, 0, 3, center, a, "sphere")}, std::nullopt, "sphere");
}

ExampleReport run_example(int n, std::uint64_t seed) {
  switch (n) {
    case 1: return example_spring(seed);
    case 2: return example_bilinear(seed);
    case 3: return example_friction(seed);
    case 4: return example_rod(seed);
    case 5: return example_corner(seed);
    case 6: return example_skate(seed);
    case 7: return example_coulomb(seed);
    case 8: return example_three_springs(seed);
    case 9: return example_buckling(seed);
    case 10: return example_tethered(seed);
    case 11: return example_spheres(seed);
    default: throw DomainError("example number must be in 1.." + std::to_string(kExampleCount));
  }
}

}  // namespace vwork
