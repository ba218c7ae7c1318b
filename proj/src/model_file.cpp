#include "vwork/model_file.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "vwork/compose.hpp"

namespace vwork {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& tok) {
  double x = 0.0;
  const char* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, x);
  if (ec != std::errc() || p != end) throw ParseError("not a decimal real: '" + tok + "'");
  return x;
}

struct Section {
  std::string name;
  std::string label;
  int line = 0;
  std::map<std::string, std::pair<std::string, int>> keys;
};

class Reader {
 public:
  explicit Reader(const Section& s) : s_(s) {}

  bool has(const std::string& k) const { return s_.keys.count(k) != 0; }
  std::string text(const std::string& k) {
    used_.insert(k);
    auto it = s_.keys.find(k);
    if (it == s_.keys.end()) throw ParseError(where() + ": missing key '" + k + "'");
    return it->second.first;
  }
  double real(const std::string& k) {
    return wrap(k, [&] {
      const Vec v = parse_vector(text(k));
      if (v.size() != 1) throw ParseError("expected one number");
      return v[0];
    });
  }
  std::size_t count(const std::string& k) {
    const double x = real(k);
    if (x < 0 || x != static_cast<double>(static_cast<std::size_t>(x)))
      throw ParseError(where() + ": '" + k + "' must be a non-negative integer");
    return static_cast<std::size_t>(x);
  }
  Vec vector(const std::string& k, std::size_t dim) {
    return wrap(k, [&] {
      Vec v = parse_vector(text(k));
      if (static_cast<std::size_t>(v.size()) != dim)
        throw ParseError("expected " + std::to_string(dim) + " numbers, got " + std::to_string(v.size()));
      return v;
    });
  }
  Mat matrix(const std::string& k) {
    return wrap(k, [&] { return parse_matrix(text(k)); });
  }
  /// Every key present must have been read.
  void finish() const {
    for (const auto& [k, v] : s_.keys)
      if (!used_.count(k)) throw ParseError("line " + std::to_string(v.second) + ": unknown key '" + k + "' in [" + s_.name + "]");
  }
  std::string where() const { return "line " + std::to_string(s_.line) + " [" + s_.name + "]"; }

 private:
  template <class F>
  auto wrap(const std::string& k, F f) -> decltype(f()) {
    try {
      return f();
    } catch (const ParseError& e) {
      const int line = s_.keys.count(k) ? s_.keys.at(k).second : s_.line;
      throw ParseError("line " + std::to_string(line) + ": key '" + k + "': " + e.what());
    }
  }
  const Section& s_;
  std::set<std::string> used_;
};

std::vector<Section> read_sections(std::istream& in) {
  std::vector<Section> out;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError("line " + std::to_string(line) + ": unterminated section header");
      std::istringstream hs(s.substr(1, s.size() - 2));
      Section sec;
      sec.line = line;
      hs >> sec.name >> sec.label;
      std::string extra;
      if (sec.name.empty() || (hs >> extra)) throw ParseError("line " + std::to_string(line) + ": bad section header");
      out.push_back(sec);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(line) + ": expected 'key = value'");
    if (out.empty()) throw ParseError("line " + std::to_string(line) + ": key outside any section");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ParseError("line " + std::to_string(line) + ": empty key");
    if (!out.back().keys.emplace(key, std::pair{trim(s.substr(eq + 1)), line}).second)
      throw ParseError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
  }
  return out;
}

std::vector<Monomial> parse_terms(const std::string& text, std::size_t dim) {
  std::vector<Monomial> terms;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) {
    const Vec v = parse_vector(row);
    if (static_cast<std::size_t>(v.size()) != dim + 1)
      throw ParseError("each term needs a coefficient and " + std::to_string(dim) + " exponents");
    Monomial m{v[0], {}};
    for (Eigen::Index i = 1; i < v.size(); ++i) {
      if (v[i] < 0 || v[i] != static_cast<double>(static_cast<int>(v[i]))) throw ParseError("exponents must be non-negative integers");
      m.exponents.push_back(static_cast<int>(v[i]));
    }
    terms.push_back(std::move(m));
  }
  if (terms.empty()) throw ParseError("no terms");
  return terms;
}

StaticSystem build_system(Reader& r, const EuclideanSpace& sp, const std::vector<std::pair<std::string, StaticSystem>>& parts,
                          bool allow_parts) {
  const std::string type = r.text("type");
  const std::size_t n = sp.dim();
  auto pick_parts = [&] {
    if (!allow_parts) throw ParseError(r.where() + ": '" + type + "' is not allowed inside a part");
    std::vector<StaticSystem> out;
    std::istringstream names(r.text("parts"));
    std::string name;
    while (names >> name) {
      bool found = false;
      for (const auto& [k, s] : parts)
        if (k == name) {
          out.push_back(s);
          found = true;
        }
      if (!found) throw ParseError(r.where() + ": unknown part '" + name + "'");
    }
    if (out.empty()) throw ParseError(r.where() + ": 'parts' is empty");
    StaticSystem s = out.front();
    for (std::size_t i = 1; i < out.size(); ++i) s = compose(s, out[i]);
    return s;
  };
  StaticSystem s;
  if (type == "spring") {
    s = make_spring(Point(r.vector("center", n)), r.real("stiffness"), sp);
  } else if (type == "bilinear") {
    s = make_bilinear(Point(r.vector("center", n)), r.matrix("omega"), sp);
  } else if (type == "friction") {
    s = make_friction(r.matrix("rho"), sp);
  } else if (type == "rod") {
    s = make_rod(Point(r.vector("center", n)), r.real("length"), sp);
  } else if (type == "corner") {
    s = make_corner(Point(r.vector("vertex", n)), Vector(r.vector("u1", n)), Vector(r.vector("u2", n)), sp);
  } else if (type == "skate") {
    if (n != 3 || !sp.is_standard()) throw ParseError(r.where() + ": skate needs the standard 3-dimensional space");
    s = make_skate();
  } else if (type == "coulomb") {
    s = make_coulomb(Point(r.vector("origin", n)), Vector(r.vector("normal", n)), r.real("coefficient"), sp);
  } else if (type == "potential-poly") {
    const std::string t = r.text("terms");
    try {
      s = make_potential_poly(sp, parse_terms(t, n));
    } catch (const ParseError& e) {
      throw ParseError(r.where() + ": terms: " + e.what());
    }
  } else if (type == "sphere") {
    const std::size_t offset = r.count("offset");
    const Vec c = parse_vector(r.text("center"));
    if (offset + static_cast<std::size_t>(c.size()) > n) throw ParseError(r.where() + ": sphere block exceeds the space");
    const EuclideanSpace block(Mat(sp.metric().block(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(offset), c.size(), c.size())));
    s = make_holonomic(sp, {sphere_constraint(block, offset, n, Point(c), r.real("radius"), "sphere")}, std::nullopt, "sphere");
  } else if (type == "composed" || type == "controlled") {
    s = pick_parts();
  } else {
    throw ParseError(r.where() + ": unknown system type '" + type + "'");
  }
  r.finish();
  return s;
}

}  // namespace

Vec parse_vector(const std::string& text) {
  std::istringstream ss(text);
  std::vector<double> xs;
  std::string tok;
  while (ss >> tok) xs.push_back(parse_real(tok));
  return Eigen::Map<Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

Mat parse_matrix(const std::string& text) {
  std::vector<Vec> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(parse_vector(row));
  if (rows.empty() || rows.front().size() == 0) throw ParseError("empty matrix");
  Mat m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw ParseError("ragged matrix rows");
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return m;
}

Model parse_model(std::istream& in) {
  const auto sections = read_sections(in);
  const Section* space = nullptr;
  const Section* system = nullptr;
  const Section* fibration = nullptr;
  const Section* dynamics = nullptr;
  std::vector<const Section*> parts;
  for (const auto& s : sections) {
    const Section** slot = nullptr;
    if (s.name == "part") {
      if (s.label.empty()) throw ParseError("line " + std::to_string(s.line) + ": [part] needs a name");
      parts.push_back(&s);
      continue;
    }
    if (!s.label.empty()) throw ParseError("line " + std::to_string(s.line) + ": only [part] sections take a name");
    if (s.name == "space") slot = &space;
    else if (s.name == "system") slot = &system;
    else if (s.name == "fibration") slot = &fibration;
    else if (s.name == "dynamics") slot = &dynamics;
    else throw ParseError("line " + std::to_string(s.line) + ": unknown section [" + s.name + "]");
    if (*slot) throw ParseError("line " + std::to_string(s.line) + ": duplicate section [" + s.name + "]");
    *slot = &s;
  }
  if (!space) throw ParseError("missing [space] section");

  Model m;
  try {
    Reader r(*space);
    const std::size_t dim = r.count("dim");
    if (dim == 0) throw ParseError(r.where() + ": dim must be positive");
    if (r.has("metric")) {
      const Mat g = r.matrix("metric");
      if (static_cast<std::size_t>(g.rows()) != dim || g.cols() != g.rows()) throw ParseError(r.where() + ": metric must be dim x dim");
      m.space = EuclideanSpace(g);
    } else {
      m.space = EuclideanSpace(dim);
    }
    r.finish();

    for (const Section* p : parts) {
      for (const auto& [name, sys] : m.parts)
        if (name == p->label) throw ParseError("line " + std::to_string(p->line) + ": duplicate part '" + name + "'");
      Reader pr(*p);
      m.parts.emplace_back(p->label, build_system(pr, m.space, {}, false));
    }

    if (system) {
      Reader sr(*system);
      m.system = build_system(sr, m.space, m.parts, true);
    } else if (!dynamics) {
      throw ParseError("missing [system] section");
    } else {
      m.system = make_free(m.space);
    }

    if (fibration) {
      Reader fr(*fibration);
      const Mat p = fr.matrix("projection");
      if (static_cast<std::size_t>(p.cols()) != m.space.dim()) throw ParseError(fr.where() + ": projection needs dim columns");
      const auto base = static_cast<std::size_t>(p.rows());
      const Vec b = fr.has("offset") ? fr.vector("offset", base) : Vec::Zero(static_cast<Eigen::Index>(base));
      fr.finish();
      m.fibration = Fibration(m.space, EuclideanSpace(base), p, b);
    }
    if (system && Reader(*system).text("type") == "controlled" && !m.fibration)
      throw ParseError("a controlled system needs a [fibration] section");

    if (dynamics) {
      Reader dr(*dynamics);
      const std::size_t n = m.space.dim();
      const Mat mass = dr.matrix("M");
      const Mat k = dr.has("K") ? dr.matrix("K") : Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      const Vec c = dr.has("c") ? dr.vector("c", n) : Vec::Zero(static_cast<Eigen::Index>(n));
      if (static_cast<std::size_t>(mass.rows()) != n || static_cast<std::size_t>(k.rows()) != n)
        throw ParseError(dr.where() + ": M and K must be dim x dim");
      DynamicsSection d{LagrangianSpec::quadratic(mass, k, c), 0.0, 1.0, {}, {}, 64, {}};
      d.t0 = dr.has("t0") ? dr.real("t0") : 0.0;
      d.t1 = dr.has("t1") ? dr.real("t1") : 1.0;
      d.q_start = dr.vector("start", n);
      d.q_end = dr.vector("end", n);
      if (dr.has("N")) d.steps = dr.count("N");
      d.force = dr.has("force") ? dr.vector("force", n) : Vec::Zero(static_cast<Eigen::Index>(n));
      dr.finish();
      m.dynamics = std::move(d);
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  return m;
}

Model parse_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path + "'");
  return parse_model(in);
}

}  // namespace vwork
