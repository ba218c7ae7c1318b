#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "vwork/compose.hpp"
#include "vwork/control.hpp"
#include "vwork/dynamics.hpp"
#include "vwork/equilibrium.hpp"
#include "vwork/examples.hpp"
#include "vwork/legendre.hpp"
#include "vwork/model_file.hpp"
#include "vwork/random.hpp"

using json = nlohmann::ordered_json;
using namespace vwork;

namespace {

enum Exit { kOk = 0, kNegative = 1, kError = 2, kUndecided = 3 };

struct Options {
  std::size_t order = 2;
  std::size_t samples = 128;
  std::uint64_t seed = 0;
  double tol = 1e-7;
  std::string format = "text";
};

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

void print_text(const json& j, int indent, std::ostream& os) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  for (auto it = j.begin(); it != j.end(); ++it) {
    const json& v = it.value();
    const bool nested_array = v.is_array() && !v.empty() && v.front().is_object();
    if (v.is_object()) {
      os << pad << it.key() << ":\n";
      print_text(v, indent + 2, os);
    } else if (nested_array) {
      os << pad << it.key() << ":\n";
      for (const auto& e : v) {
        os << pad << "  -\n";
        print_text(e, indent + 4, os);
      }
    } else if (v.is_string()) {
      os << pad << it.key() << ": " << v.get<std::string>() << "\n";
    } else {
      os << pad << it.key() << ": " << v.dump() << "\n";
    }
  }
}

void emit(const json& report, const Options& opt) {
  if (opt.format == "json") {
    std::cout << report.dump(2) << "\n";
  } else {
    print_text(report, 0, std::cout);
  }
}

Point read_point(const std::string& text, std::size_t dim, const char* what) {
  const Vec v = parse_vector(text);
  if (static_cast<std::size_t>(v.size()) != dim)
    throw DimensionError(std::string(what) + ": expected " + std::to_string(dim) + " coordinates");
  return Point(v);
}

int exit_for(EquilibriumStatus s) {
  switch (s) {
    case EquilibriumStatus::EquilibriumSampled: return kOk;
    case EquilibriumStatus::NotEquilibrium: return kNegative;
    default: return kUndecided;
  }
}

int exit_for(Membership m) {
  switch (m) {
    case Membership::In: return kOk;
    case Membership::Out: return kNegative;
    default: return kUndecided;
  }
}

int cmd_check_equilibrium(const std::string& path, const std::string& point, const Options& opt) {
  const Model m = parse_model_file(path);
  const Point q = read_point(point, m.space.dim(), "--point");
  JetCheckOptions jo;
  jo.order = opt.order;
  jo.n_samples = opt.samples;
  jo.seed = opt.seed;
  const EquilibriumVerdict v = jet_equilibrium_check(m.system, q, jo);
  json r;
  r["command"] = "check-equilibrium";
  r["system"] = m.system.kind;
  r["point"] = to_json(q.coords());
  r["order"] = v.order_used;
  r["samples"] = v.n_samples;
  r["positive"] = v.n_positive;
  r["zero"] = v.n_zero;
  r["status"] = to_string(v.status);
  if (v.witness_direction) r["witness_direction"] = to_json(v.witness_direction->coords());
  if (v.witness_jet) {
    json c = json::array();
    for (double x : v.witness_jet->coeffs()) c.push_back(x);
    r["witness_jet"] = c;
  }
  emit(r, opt);
  return exit_for(v.status);
}

int cmd_contains(const std::string& path, const std::string& point, const std::string& force, double tau,
                 const Options& opt) {
  const Model m = parse_model_file(path);
  const Point q = read_point(point, m.space.dim(), "--point");
  json r;
  r["command"] = "constitutive contains";
  r["system"] = m.system.kind;
  r["point"] = to_json(q.coords());
  Membership mem;
  if (m.system.kind == "skate" && parse_vector(force).size() == 2) {
    const Vec f = parse_vector(force);
    mem = skate_constitutive(q, Covector(f), tau, opt.tol);
    r["force"] = to_json(f);
    r["torque"] = tau;
    r["mode"] = "ExactSkate";
  } else {
    const Covector f(read_point(force, m.space.dim(), "--force").coords());
    const ConstitutiveSet cs(m.system, opt.tol);
    const Margin mg = cs.margin(q, f);
    mem = cs.contains(q, f);
    r["force"] = to_json(f.coords());
    r["mode"] = to_string(cs.mode());
    r["residual"] = mg.residual;
    r["support"] = std::isinf(mg.support) ? json("inf") : json(mg.support);
  }
  r["membership"] = to_string(mem);
  emit(r, opt);
  return exit_for(mem);
}

int cmd_sample(const std::string& path, const std::string& point, std::size_t count, const Options& opt) {
  const Model m = parse_model_file(path);
  const Point q = read_point(point, m.space.dim(), "--point");
  const ConstitutiveSet cs(m.system, opt.tol);
  Rng rng(opt.seed);
  const auto pts = cs.sample_boundary(q, count, rng);
  json r;
  r["command"] = "constitutive sample";
  r["system"] = m.system.kind;
  r["mode"] = to_string(cs.mode());
  r["point"] = to_json(q.coords());
  json a = json::array();
  for (const auto& f : pts) a.push_back(to_json(f.coords()));
  r["boundary"] = a;
  emit(r, opt);
  return kOk;
}

const Fibration& require_fibration(const Model& m) {
  if (!m.fibration) throw ParseError("model has no [fibration] section");
  return *m.fibration;
}

/// The lift of q plus seeded vertical offsets at several scales.
std::vector<Point> vertical_seeds(const Fibration& fib, const Point& q, std::size_t n, std::uint64_t seed) {
  const Point base = fib.lift(q);
  const Mat& vert = fib.vertical();
  std::vector<Point> out{base};
  Rng rng(seed);
  const double scales[] = {0.1, 0.5, 1.0, 2.0};
  for (std::size_t i = 1; i < n && vert.cols() > 0; ++i) {
    const Vec c = rng.gaussian(static_cast<std::size_t>(vert.cols()));
    out.emplace_back(Vec(base.coords() + scales[i % 4] * (vert * c)));
  }
  return out;
}

json critical_json(const CriticalPoint& cp) {
  json p;
  p["branch"] = cp.branch;
  p["qbar"] = to_json(cp.qbar.coords());
  p["q"] = to_json(cp.q.coords());
  p["residual"] = cp.residual;
  p["family_dim"] = cp.family_dim;
  return p;
}

int cmd_critical(const std::string& path, const std::string& point, bool reduce, const Options& opt) {
  const Model m = parse_model_file(path);
  const Fibration& fib = require_fibration(m);
  const Point q = read_point(point, fib.base().dim(), "--point");
  const CriticalSet set = solve_critical(m.system, fib, q, vertical_seeds(fib, q, std::min<std::size_t>(opt.samples, 64), opt.seed));
  json r;
  r["command"] = reduce ? "reduce" : "critical-set";
  r["system"] = m.system.kind;
  r["control"] = to_json(q.coords());
  r["failed_seeds"] = set.failed_seeds;
  if (!set.warning.empty()) r["warning"] = set.warning;
  json pts = json::array();
  for (const auto& cp : set.points) {
    json p = critical_json(cp);
    if (reduce) {
      const ReducedForce f = reduced_force(m.system, fib, cp, opt.tol);
      p["force"] = to_json(f.force.coords());
      p["force_unique"] = f.unique();
      if (!f.unique()) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < f.free_directions.rows(); ++i) rows.push_back(to_json(f.free_directions.row(i).transpose()));
        p["free_directions"] = rows;
      }
    }
    pts.push_back(p);
  }
  r["points"] = pts;
  emit(r, opt);
  return set.points.empty() ? kNegative : kOk;
}

int cmd_compose(const std::string& path, const std::string& point, const Options& opt) {
  const Model m = parse_model_file(path);
  if (m.parts.size() < 2) throw ParseError("compose needs at least two [part] sections");
  const auto& [na, a] = m.parts[0];
  const auto& [nb, b] = m.parts[1];
  const Point q = read_point(point, m.space.dim(), "--point");
  const CleanReport cr = clean_check(a, b, q);
  const ComposedConstitutive cc = composed_constitutive(a, b, q);
  json r;
  r["command"] = "compose";
  r["parts"] = json::array({na, nb});
  r["point"] = to_json(q.coords());
  r["status"] = to_string(cr.status);
  r["virtual_dim"] = cr.virtual_dim;
  r["tangent_dim"] = cr.tangent_dim;
  r["jacobian_rank"] = cr.jacobian_rank;
  r["particular"] = to_json(cc.particular.coords());
  if (!cc.warning.empty()) r["warning"] = cc.warning;
  if (cr.status == Cleanliness::Clean) {
    Rng rng(opt.seed);
    const SumReport s = sum_check(a, b, q, opt.samples, rng);
    json sj;
    sj["trials"] = s.trials;
    sj["max_violation"] = s.max_violation;
    sj["equivalence_failures"] = s.equivalence_failures;
    r["sum_check"] = sj;
  }
  emit(r, opt);
  return cr.status == Cleanliness::Clean ? kOk : kUndecided;
}

int cmd_dynamics(const std::string& path, std::size_t steps, const Options& opt) {
  const Model m = parse_model_file(path);
  if (!m.dynamics) throw ParseError("model has no [dynamics] section");
  const DynamicsSection& d = *m.dynamics;
  const std::size_t n = steps ? steps : d.steps;
  const Vec force = d.force;
  const DiscretePath p = solve_bvp(d.lagrangian, d.q_start, d.q_end, d.t0, d.t1, n, [force](double) { return force; });
  const auto [p0, p1] = boundary_momenta(d.lagrangian, p);
  double el = 0.0;
  for (const auto& r : euler_lagrange_residual(d.lagrangian, p, [force](double) { return force; })) el = std::max(el, r.norm());
  json r;
  r["command"] = "dynamics solve";
  r["steps"] = n;
  r["h"] = p.h();
  r["action"] = discrete_action(d.lagrangian, p);
  r["euler_lagrange_residual"] = el;
  r["p0"] = to_json(p0.coords());
  r["p1"] = to_json(p1.coords());
  json nodes = json::array();
  for (std::size_t i = 0; i <= p.steps(); ++i) {
    json node;
    node["t"] = p.time(i);
    node["q"] = to_json(p.q[i]);
    nodes.push_back(node);
  }
  r["path"] = nodes;
  emit(r, opt);
  return kOk;
}

int cmd_example(int n, const Options& opt) {
  const ExampleReport rep = run_example(n, opt.seed);
  if (opt.format == "json") {
    json r;
    r["command"] = "example";
    r["example"] = rep.number;
    r["title"] = rep.title;
    json checks = json::array();
    for (const auto& c : rep.checks) {
      json j;
      j["name"] = c.name;
      j["result"] = c.pass ? "PASS" : "FAIL";
      if (!c.detail.empty()) j["detail"] = c.detail;
      checks.push_back(j);
    }
    r["checks"] = checks;
    for (const auto& [k, v] : rep.values) r["values"][k] = v;
    for (const auto& [k, v] : rep.labels) r["labels"][k] = v;
    r["result"] = rep.passed() ? "PASS" : "FAIL";
    std::cout << r.dump(2) << "\n";
  } else {
    std::cout << "Example " << rep.number << ": " << rep.title << "\n";
    for (const auto& c : rep.checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name;
      if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
      std::cout << "\n";
    }
    for (const auto& [k, v] : rep.values) std::cout << k << " = " << json(v).dump() << "\n";
    for (const auto& [k, v] : rep.labels) std::cout << k << ": " << v << "\n";
    std::cout << (rep.passed() ? "RESULT PASS" : "RESULT FAIL") << "\n";
  }
  return rep.passed() ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vwork: variational statics of finite-dimensional mechanical systems"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--order", opt.order, "jet order for equilibrium checks")->check(CLI::Range(1, 8));
  app.add_option("--samples", opt.samples, "number of sampled directions / trials / seeds");
  app.add_option("--seed", opt.seed, "random seed");
  app.add_option("--tol", opt.tol, "membership tolerance");
  app.add_option("--format", opt.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  std::string model, point, force;
  double tau = 0.0;
  std::size_t count = 8, steps = 0;
  int example = 0;

  auto* eq = app.add_subcommand("check-equilibrium", "jet test of stable equilibrium at a point");
  eq->add_option("model", model)->required();
  eq->add_option("--point", point)->required();

  auto* cons = app.add_subcommand("constitutive", "constitutive set queries");
  cons->require_subcommand(1);
  auto* contains = cons->add_subcommand("contains", "membership of (q, f)");
  contains->add_option("model", model)->required();
  contains->add_option("--point", point)->required();
  contains->add_option("--force", force)->required();
  contains->add_option("--tau", tau, "skate torque");
  auto* sample = cons->add_subcommand("sample", "boundary samples of S_q");
  sample->add_option("model", model)->required();
  sample->add_option("--point", point)->required();
  sample->add_option("--count", count);

  auto* crit = app.add_subcommand("critical-set", "critical set over a control point");
  crit->add_option("model", model)->required();
  crit->add_option("--point", point)->required();
  auto* red = app.add_subcommand("reduce", "reduced forces at the critical points over a control point");
  red->add_option("model", model)->required();
  red->add_option("--point", point)->required();

  auto* comp = app.add_subcommand("compose", "clean-intersection and sum checks for the first two parts");
  comp->add_option("model", model)->required();
  comp->add_option("--point", point)->required();

  auto* dyn = app.add_subcommand("dynamics", "discrete variational dynamics");
  dyn->require_subcommand(1);
  auto* solve = dyn->add_subcommand("solve", "boundary value problem from the [dynamics] section");
  solve->add_option("model", model)->required();
  solve->add_option("--steps", steps, "overrides N");

  auto* ex = app.add_subcommand("example", "run a worked example suite");
  ex->add_option("n", example)->required()->check(CLI::Range(1, kExampleCount));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }

  try {
    if (*eq) return cmd_check_equilibrium(model, point, opt);
    if (*contains) return cmd_contains(model, point, force, tau, opt);
    if (*sample) return cmd_sample(model, point, count, opt);
    if (*crit) return cmd_critical(model, point, false, opt);
    if (*red) return cmd_critical(model, point, true, opt);
    if (*comp) return cmd_compose(model, point, opt);
    if (*solve) return cmd_dynamics(model, steps, opt);
    if (*ex) return cmd_example(example, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
