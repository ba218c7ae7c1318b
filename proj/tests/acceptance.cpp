// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "vwork/compose.hpp"
#include "vwork/control.hpp"
#include "vwork/dynamics.hpp"
#include "vwork/equilibrium.hpp"
#include "vwork/examples.hpp"
#include "vwork/jets.hpp"
#include "vwork/legendre.hpp"
#include "vwork/processes.hpp"
#include "vwork/random.hpp"
#include "vwork/systems.hpp"

using namespace vwork;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

// 1 -------------------------------------------------------------------------

struct Poly {
  std::array<double, 7> c{};  // c[0] = 0
  double operator()(double s) const {
    double acc = 0.0;
    for (int i = 6; i >= 1; --i) acc = (acc + c[static_cast<std::size_t>(i)]) * s;
    return acc;
  }
};

/// Largest delta = 2^-m <= 1/2 on which g is strictly monotone in the given
/// direction at 2000 grid points; 0 if none down to 2^-40.
double monotone_delta(const Poly& g, int dir) {
  for (double delta = 0.5; delta > 1e-12; delta *= 0.5) {
    bool ok = true;
    double prev = 0.0;
    for (int j = 1; j <= 2000 && ok; ++j) {
      const double v = g(delta * j / 2000.0);
      ok = dir * (v - prev) > 0.0;
      prev = v;
    }
    if (ok) return delta;
  }
  return 0.0;
}

Outcome criterion1() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(1);
  std::size_t pos = 0, neg = 0, failures = 0;
  for (int t = 0; t < 1000; ++t) {
    Poly g;
    const std::size_t degree = 1 + rng.index(6);
    for (std::size_t i = 1; i <= degree; ++i)
      if (rng.uniform() < 0.55) g.c[i] = rng.uniform() < 0.5 ? static_cast<double>(static_cast<int>(rng.index(7)) - 3) : rng.uniform(-2, 2);
    const std::size_t k = 1 + rng.index(4);
    const JetSign sign = classify(jet_of_function(g, k), kJetZeroBand);
    if (sign == JetSign::Positive || sign == JetSign::Negative) {
      const int dir = sign == JetSign::Positive ? 1 : -1;
      (dir > 0 ? pos : neg)++;
      if (monotone_delta(g, dir) == 0.0) ++failures;
    }
  }
  const double dt = seconds_since(t0);
  if (failures) o.fail(std::to_string(failures) + " classification failures");
  if (dt >= 5.0) o.fail("runtime " + fmt(dt) + " s");
  o.detail = (o.detail.empty() ? "" : o.detail + "; ") + std::to_string(pos) + " positive, " + std::to_string(neg) +
             " negative, 0 failures allowed, " + fmt(dt) + " s";
  return o;
}

// 2 -------------------------------------------------------------------------

Process random_arc(const EuclideanSpace& sp, Rng& rng, const Point& q0) {
  std::vector<Vector> c{Vector(Vec(rng.gaussian(sp.dim()) + Vec::Constant(static_cast<Eigen::Index>(sp.dim()), 0.3)))};
  c.emplace_back(Vec(0.5 * rng.gaussian(sp.dim())));
  c.emplace_back(Vec(0.2 * rng.gaussian(sp.dim())));
  return polynomial_arc(sp, q0, c, rng.uniform(0.5, 1.5));
}

StaticSystem random_system(const EuclideanSpace& sp, Rng& rng, int which) {
  const auto n = static_cast<Eigen::Index>(sp.dim());
  switch (which % 3) {
    case 0: return make_spring(Point(rng.gaussian(sp.dim())), rng.uniform(0.5, 3), sp);
    case 1: {
      const Mat a = Mat(n, n).setRandom();
      return make_friction(a * a.transpose() + Mat::Identity(n, n), sp);
    }
    default: return make_bilinear(Point(rng.gaussian(sp.dim())), Mat(Mat(n, n).setRandom()), sp);
  }
}

Outcome criterion2() {
  Outcome o;
  const auto t0 = Clock::now();
  const EuclideanSpace sp(3);
  Rng rng(2);
  double add = 0.0, repar = 0.0, path = 0.0;
  for (int t = 0; t < 100; ++t) {
    const StaticSystem sys = random_system(sp, rng, t);
    const Process p = random_arc(sp, rng, Point(rng.gaussian(3)));
    const double whole = work_along(sys, p).total;
    const double split = rng.uniform(0.1, 0.9) * p.a;
    add = std::max(add, std::abs(whole - work_along(sys, restrict(p, split)).total - work_along(sys, tail(p, split)).total));

    // sigma(s) = a (s/b + c (s/b)^2) / (1 + c), increasing for c >= 0.
    const double b = rng.uniform(0.5, 2.0), c = rng.uniform(0.0, 1.0), a = p.a;
    auto sigma = [=](double s) { return a * (s / b + c * (s / b) * (s / b)) / (1 + c); };
    auto dsigma = [=](double s) { return a * (1.0 / b + 2 * c * s / (b * b)) / (1 + c); };
    Jet sj(8);
    sj[1] = a / (b * (1 + c));
    sj[2] = a * c / (b * b * (1 + c));
    const Process r = reparameterize(p, sigma, dsigma, sj, b);
    repar = std::max(repar, std::abs(whole - work_along(sys, r).total));

    const StaticSystem spring = make_spring(Point(rng.gaussian(3)), rng.uniform(0.5, 3), sp);
    const Process p1 = random_arc(sp, rng, Point(rng.gaussian(3)));
    const Process p2 = straight_line(sp, p1.start(), p1.end());
    path = std::max(path, std::abs(work_along(spring, p1).total - work_along(spring, p2).total));
  }
  const double dt = seconds_since(t0);
  if (add > 1e-9) o.fail("additivity " + fmt(add));
  if (repar > 1e-9) o.fail("reparameterization " + fmt(repar));
  if (path > 1e-9) o.fail("path independence " + fmt(path));
  if (dt >= 30.0) o.fail("runtime " + fmt(dt) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max deviations ") + fmt(add) + " / " + fmt(repar) + " / " +
              fmt(path) + ", " + fmt(dt) + " s";
  return o;
}

// 3 -------------------------------------------------------------------------

struct Case {
  StaticSystem sys;
  std::function<Point(Rng&)> point;
  std::function<Covector(Rng&, const Point&)> force;
};

Vec unit(Rng& rng, std::size_t n) { return rng.gaussian(n).normalized(); }

std::vector<std::pair<std::string, Case>> constitutive_cases() {
  const EuclideanSpace s3(3);
  const Point o3{0, 0, 0};
  std::vector<std::pair<std::string, Case>> cases;
  {
    const StaticSystem sys = make_spring(Point{0.2, -0.1, 0.4}, 2.0, s3);
    cases.push_back({"spring", {sys, [](Rng& r) { return Point(r.gaussian(3)); },
                                [sys](Rng& r, const Point& q) {
                                  const Vec f = 2.0 * (q.coords() - Vec(Point{0.2, -0.1, 0.4}.coords()));
                                  return Covector(Vec(r.uniform() < 0.5 ? f : Vec(f + 0.1 * r.gaussian(3))));
                                }}});
  }
  {
    Mat omega(3, 3);
    omega << 1, 2, 0, -1, 0.5, 1, 0, 0.3, 2;
    const StaticSystem sys = make_bilinear(o3, omega, s3);
    cases.push_back({"bilinear", {sys, [](Rng& r) { return Point(r.gaussian(3)); },
                                  [omega](Rng& r, const Point& q) {
                                    const Vec f = omega.transpose() * q.coords();
                                    return Covector(Vec(r.uniform() < 0.5 ? f : Vec(f + 0.1 * r.gaussian(3))));
                                  }}});
  }
  {
    Mat rho(3, 3);
    rho << 1.5, 0.2, 0, 0.2, 0.8, 0.1, 0, 0.1, 1.2;
    const StaticSystem sys = make_friction(rho, s3);
    cases.push_back({"friction", {sys, [](Rng& r) { return Point(r.gaussian(3)); },
                                  [](Rng& r, const Point&) { return Covector(Vec(r.uniform(0, 2.5) * unit(r, 3))); }}});
  }
  {
    const double a = 1.3;
    const StaticSystem sys = make_rod(o3, a, s3);
    cases.push_back({"rod", {sys, [a](Rng& r) { return Point(Vec(a * unit(r, 3))); },
                             [](Rng& r, const Point& q) {
                               const Vec radial = r.normal() * q.coords();
                               return Covector(Vec(r.uniform() < 0.5 ? radial : Vec(radial + 0.2 * r.gaussian(3))));
                             }}});
  }
  {
    const StaticSystem sys = make_corner(o3, Vector{1, 0, 0}, Vector{0, 1, 0}, s3);
    cases.push_back({"corner", {sys,
                                [](Rng& r) {
                                  const double u = r.uniform();
                                  if (u < 0.5) return Point{0, 0, r.normal()};
                                  if (u < 0.75) return Point{0, std::abs(r.normal()), r.normal()};
                                  return Point{std::abs(r.normal()), std::abs(r.normal()), r.normal()};
                                },
                                [](Rng& r, const Point& q) {
                                  // Members are -a g(u1) - b g(u2) over the active constraints.
                                  Vec f = Vec::Zero(3);
                                  if (q[0] == 0.0) f[0] = -std::abs(r.normal());
                                  if (q[1] == 0.0) f[1] = -std::abs(r.normal());
                                  return Covector(Vec(r.uniform() < 0.5 ? f : Vec(f + 0.3 * r.gaussian(3))));
                                }}});
  }
  {
    const StaticSystem sys = make_skate();
    cases.push_back({"skate", {sys, [](Rng& r) { return Point{r.normal(), r.normal(), r.uniform(-3, 3)}; },
                               [](Rng& r, const Point& q) {
                                 const Vec across{{-std::sin(q[2]), std::cos(q[2]), 0.0}};
                                 const Vec f = r.normal() * across;
                                 return Covector(Vec(r.uniform() < 0.5 ? f : Vec(f + 0.2 * r.gaussian(3))));
                               }}});
  }
  {
    const StaticSystem sys = make_coulomb(o3, Vector{0, 0, 1}, 0.6, s3);
    cases.push_back({"coulomb", {sys,
                                 [](Rng& r) {
                                   return r.uniform() < 0.7 ? Point{r.normal(), r.normal(), 0.0}
                                                            : Point{r.normal(), r.normal(), std::abs(r.normal()) + 0.1};
                                 },
                                 [](Rng& r, const Point& q) {
                                   if (r.uniform() < 0.5) return Covector(r.gaussian(3));
                                   if (q[2] > 0.0) return Covector{0, 0, 0};
                                   const double n = std::abs(r.normal());
                                   const Vec t = r.uniform(0, 0.6 * n) * unit(r, 2);
                                   return Covector{t[0], t[1], -n};
                                 }}});
  }
  return cases;
}

Outcome criterion3() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(3);
  std::size_t disagreements = 0, total = 0;
  std::string per;
  for (const auto& [name, c] : constitutive_cases()) {
    const ConstitutiveSet exact(c.sys);
    const ConstitutiveSet generic(c.sys, ConstitutiveMode::Generic);
    std::size_t in = 0, bad = 0, n = 0;
    while (n < 1000) {
      const Point q = c.point(rng);
      const Covector f = c.force(rng, q);
      const Margin m = exact.margin(q, f);
      const double scale = 1.0 + c.sys.space.dual_norm(f);
      const double v = m.value(exact.tol());
      if (std::isfinite(v) && std::abs(v) / scale <= 1e-6) continue;
      ++n;
      const Membership e = exact.contains(q, f), g = generic.contains(q, f);
      if (e == Membership::In) ++in;
      if (e != g) ++bad;
    }
    total += n;
    disagreements += bad;
    per += name + " " + std::to_string(bad) + "/" + std::to_string(n) + " (" + std::to_string(in) + " in) ";
  }
  const double dt = seconds_since(t0);
  if (disagreements) o.fail(std::to_string(disagreements) + " disagreements");
  if (dt >= 120.0) o.fail("runtime " + fmt(dt) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + per + fmt(dt) + " s";
  return o;
}

// 4 -------------------------------------------------------------------------

Outcome criterion4() {
  Outcome o;
  Rng rng(4);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const double k10 = rng.uniform(0.1, 5), k20 = rng.uniform(0.1, 5), k21 = rng.uniform(0.1, 5);
    const Point q0(rng.gaussian(3));
    const ControlledSystem cs = three_springs(q0, k10, k20, k21);
    const Point q1(Vec(q0.coords() + rng.gaussian(3)));
    std::vector<Point> seeds{Point(rng.gaussian(6)), Point(rng.gaussian(6))};
    const CriticalSet set = solve_critical(cs.system, cs.fibration, q1, seeds);
    if (set.points.size() != 1) {
      o.fail("three springs: " + std::to_string(set.points.size()) + " critical points");
      continue;
    }
    const ReducedForce f = reduced_force(cs.system, cs.fibration, set.points.front());
    const Vec want = (k10 + k20 * k21 / (k20 + k21)) * (q1.coords() - q0.coords());
    worst = std::max(worst, (f.force.coords() - want).norm());
  }
  if (worst > 1e-8) o.fail("effective stiffness deviation " + fmt(worst));

  const BucklingParams bp{1.0, 1.0, 1.0};
  const double threshold = buckling_threshold(bp, 0.1, 0.9, 1e-8);
  const double want = bp.k * bp.a / (bp.k + bp.k_prime);
  if (std::abs(threshold - want) > 1e-6) o.fail("threshold " + fmt(threshold));
  const BucklingParams bp2{1.5, 2.0, 1.0};
  const double threshold2 = buckling_threshold(bp2, 0.1, 1.4, 1e-8);
  const double want2 = bp2.k * bp2.a / (bp2.k + bp2.k_prime);
  if (std::abs(threshold2 - want2) > 1e-6) o.fail("threshold " + fmt(threshold2) + " vs " + fmt(want2));

  const ControlledSystem tr = tethered_rod(1.0, 1.0);
  std::size_t two = 0;
  for (int t = 0; t < 5; ++t) {
    const Point q1(rng.gaussian(3));
    if (tethered_critical_set(tr, 1.0, q1).points.size() == 2) ++two;
  }
  if (two != 5) o.fail("tethered rod: " + std::to_string(two) + "/5 controls with exactly 2 critical points");
  const Vector w{0.48, 0.6, 0.64};
  if (singularity_rank(w, 0.7) != 3 || singularity_rank(w, 0.0) != 1) o.fail("singularity ranks");
  const EuclideanSpace sp(3);
  double form = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Vector u = sp.normalized(Vector(rng.gaussian(3)));
    auto tangent = [&] {
      const Vec d = rng.gaussian(3);
      return Vector(Vec(d - d.dot(u.coords()) * u.coords()));
    };
    const Vector d1 = tangent(), d2 = tangent();
    form = std::max(form, std::abs(pullback_form_via_tangent_map(sp, 1.3, 0.7, u, rng.uniform(-2, 2), d1, rng.normal(), d2,
                                                                 rng.normal())));
  }
  if (form >= 1e-9) o.fail("pull-back form " + fmt(form));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("stiffness dev ") + fmt(worst) + ", threshold " +
              fmt(threshold) + " (want " + fmt(want) + "), " + fmt(threshold2) + " (want " + fmt(want2) +
              "), pull-back " + fmt(form);
  return o;
}

// 5 -------------------------------------------------------------------------

Outcome criterion5() {
  Outcome o;
  const double a = 1.0;
  const StaticSystem s0 = sphere_system(Point{0, 0, 0}, a);
  const StaticSystem s1 = sphere_system(Point{a, 0, 0}, a);
  const StaticSystem s2 = sphere_system(Point{2 * a, 0, 0}, a);
  const Point q_clean{a / 2, std::sqrt(0.75) * a, 0};
  const Point q_touch{a, 0, 0};
  const CleanReport clean = clean_check(s0, s1, q_clean);
  const CleanReport touch = clean_check(s0, s2, q_touch);
  if (clean.status != Cleanliness::Clean) o.fail("distance a reported " + to_string(clean.status));
  if (touch.status != Cleanliness::NotClean) o.fail("distance 2a reported " + to_string(touch.status));
  Rng rng(5);
  const SumReport sum = sum_check(s0, s1, q_clean, 500, rng);
  if (sum.equivalence_failures) o.fail(std::to_string(sum.equivalence_failures) + " decomposability mismatches");
  if (sum.max_violation >= 1e-8) o.fail("constraint violation " + fmt(sum.max_violation));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("a: ") + to_string(clean.status) + ", 2a: " +
              to_string(touch.status) + ", 500 trials, max violation " + fmt(sum.max_violation);
  return o;
}

// 6 -------------------------------------------------------------------------

Outcome criterion6() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(6);
  std::size_t decided = 0, agree = 0, eq = 0, neq = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<Monomial> terms;
    auto coeff = [&] { return static_cast<double>(static_cast<int>(rng.index(7)) - 3) + rng.uniform(-0.5, 0.5); };
    auto add_degree = [&](int d, double p) {
      for (int i = 0; i <= d; ++i)
        if (rng.uniform() < p) terms.push_back({coeff(), {i, d - i}});
    };
    switch (t % 3) {
      case 0:  // anything, occasionally with a linear part
        add_degree(1, 0.3);
        add_degree(2, 0.6);
        add_degree(3, 0.5);
        add_degree(4, 0.5);
        break;
      case 1: {  // positive definite quadratic part
        const double a = rng.uniform(0.2, 3), c = rng.uniform(0.2, 3);
        const double b = rng.uniform(-1.9, 1.9) * std::sqrt(a * c);
        terms.push_back({a, {2, 0}});
        terms.push_back({b, {1, 1}});
        terms.push_back({c, {0, 2}});
        add_degree(3, 0.5);
        add_degree(4, 0.5);
        break;
      }
      default: {  // pure quartic, often definite
        terms.push_back({rng.uniform(0.2, 3) * (rng.uniform() < 0.8 ? 1 : -1), {4, 0}});
        terms.push_back({rng.uniform(0.2, 3), {0, 4}});
        add_degree(4, 0.4);
        break;
      }
    }
    if (terms.empty()) terms.push_back({1.0, {2, 0}});
    const StaticSystem sys = make_potential_poly(EuclideanSpace(2), terms);
    JetCheckOptions opt;
    opt.order = 4;
    opt.seed = static_cast<std::uint64_t>(t);
    const EquilibriumVerdict v = jet_equilibrium_check(sys, Point{0, 0}, opt);
    if (v.status == EquilibriumStatus::Indeterminate) continue;
    // Ball scan: 100 radii x 100 angles.
    const ScalarField& u = *sys.potential;
    bool below = false;
    for (int i = 1; i <= 100 && !below; ++i)
      for (int j = 0; j < 100 && !below; ++j) {
        const double r = 1e-2 * i / 100.0, th = 2 * std::numbers::pi * j / 100.0;
        below = u(Point{r * std::cos(th), r * std::sin(th)}) < 0.0;
      }
    ++decided;
    const bool min_at_center = !below;
    const bool verdict_min = v.status == EquilibriumStatus::EquilibriumSampled;
    (verdict_min ? eq : neq)++;
    if (verdict_min == min_at_center) ++agree;
  }
  const double dt = seconds_since(t0);
  if (agree != decided) o.fail(std::to_string(decided - agree) + " disagreements");
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(agree) + "/" + std::to_string(decided) +
              " decided verdicts agree (" + std::to_string(eq) + " equilibria, " + std::to_string(neq) + " not), " +
              std::to_string(200 - decided) + " indeterminate, " + fmt(dt) + " s";
  return o;
}

// 7 -------------------------------------------------------------------------

Outcome criterion7() {
  Outcome o;
  const auto t0 = Clock::now();
  const LagrangianSpec l = LagrangianSpec::quadratic(Mat::Identity(1, 1), Mat::Identity(1, 1), Vec::Zero(1));
  const double t1 = std::numbers::pi / 2;
  std::vector<double> err;
  double p0 = 0.0, p1 = 0.0;
  for (std::size_t n : {16u, 32u, 64u, 128u}) {
    const DiscretePath p = solve_bvp(l, Vec::Ones(1), Vec::Zero(1), 0.0, t1, n);
    double e = 0.0;
    for (std::size_t i = 0; i <= n; ++i) e = std::max(e, std::abs(p.q[i][0] - std::cos(p.time(i))));
    err.push_back(e);
    const auto [a, b] = boundary_momenta(l, p);
    p0 = a[0];
    p1 = b[0];
  }
  std::string orders;
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double ord = std::log2(err[i] / err[i + 1]);
    orders += fmt(ord) + " ";
    if (ord < 1.8) o.fail("observed order " + fmt(ord));
  }
  if (std::abs(p0) > 5e-3 || std::abs(p1 + 1.0) > 5e-3) o.fail("momenta (" + fmt(p0) + ", " + fmt(p1) + ")");
  const double dt = seconds_since(t0);
  if (dt >= 10.0) o.fail("runtime " + fmt(dt) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("orders ") + orders + "momenta (" + fmt(p0) + ", " + fmt(p1) +
              "), " + fmt(dt) + " s";
  return o;
}

// 8 -------------------------------------------------------------------------

std::pair<int, std::string> run(const std::string& cmd) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Outcome criterion8() {
  Outcome o;
  const std::string cli = VWORK_CLI;
  for (int n = 1; n <= kExampleCount; ++n) {
    const std::string cmd = cli + " --seed 7 example " + std::to_string(n);
    const auto [code, out] = run(cmd);
    const auto [code2, out2] = run(cmd);
    if (code != 0) o.fail("example " + std::to_string(n) + " exit " + std::to_string(code));
    if (out != out2 || code != code2) o.fail("example " + std::to_string(n) + " not reproducible");
    const auto [jcode, jout] = run(cli + " --seed 7 --format json example " + std::to_string(n));
    if (jcode != code) o.fail("example " + std::to_string(n) + " json exit differs");
  }
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("examples 1..11 run twice with --seed 7");
  return o;
}

}  // namespace

int main() {
  const std::array<std::pair<const char*, Outcome (*)()>, 8> criteria{{
      {"jet soundness", criterion1},
      {"work integral properties", criterion2},
      {"constitutive closed forms vs generic path", criterion3},
      {"partial control", criterion4},
      {"composition", criterion5},
      {"equilibrium verdicts vs ball scan", criterion6},
      {"discrete dynamics", criterion7},
      {"CLI reproduction", criterion8},
  }};
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << o.detail
              << std::endl;
  }
  return all ? 0 : 1;
}
