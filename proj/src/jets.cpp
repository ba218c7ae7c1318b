#include "vwork/jets.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace vwork {

namespace {

void check_order(std::size_t k) {
  if (k > kMaxJetOrder)
    throw DimensionError("jet order " + std::to_string(k) + " exceeds the maximum " + std::to_string(kMaxJetOrder));
}

void check_same(const Jet& a, const Jet& b, const char* op) {
  if (a.order() != b.order())
    throw DimensionError(std::string(op) + ": jet order mismatch (" + std::to_string(a.order()) + " vs " +
                         std::to_string(b.order()) + ")");
}

}  // namespace

Jet::Jet(std::size_t order) : order_(order) { check_order(order); }

Jet::Jet(std::size_t order, std::initializer_list<double> coeffs) : Jet(order) {
  if (coeffs.size() != order + 1) throw DimensionError("Jet: expected order+1 coefficients");
  std::copy(coeffs.begin(), coeffs.end(), c_.begin());
}

Jet Jet::constant(std::size_t order, double c) {
  Jet j(order);
  j.c_[0] = c;
  return j;
}

Jet Jet::variable(std::size_t order) {
  Jet j(order);
  if (order >= 1) j.c_[1] = 1.0;
  return j;
}

double Jet::operator[](std::size_t i) const {
  if (i > order_) throw DimensionError("Jet: coefficient index beyond order");
  return c_[i];
}

double& Jet::operator[](std::size_t i) {
  if (i > order_) throw DimensionError("Jet: coefficient index beyond order");
  return c_[i];
}

Jet Jet::truncated(std::size_t order) const {
  if (order > order_) throw DimensionError("Jet::truncated: cannot raise the order");
  Jet j(order);
  std::copy_n(c_.begin(), order + 1, j.c_.begin());
  return j;
}

Jet Jet::derivative() const {
  if (order_ == 0) return Jet(0);
  Jet j(order_ - 1);
  for (std::size_t i = 1; i <= order_; ++i) j.c_[i - 1] = static_cast<double>(i) * c_[i];
  return j;
}

double Jet::evaluate(double s) const {
  double acc = 0.0;
  for (std::size_t i = order_ + 1; i-- > 0;) acc = acc * s + c_[i];
  return acc;
}

Jet& Jet::operator+=(const Jet& o) {
  check_same(*this, o, "jet_add");
  for (std::size_t i = 0; i <= order_; ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_same(*this, o, "jet_sub");
  for (std::size_t i = 0; i <= order_; ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = jet_mul(*this, o);
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (std::size_t i = 0; i <= order_; ++i) c_[i] *= s;
  return *this;
}

Jet jet_add(const Jet& a, const Jet& b) {
  Jet r = a;
  r += b;
  return r;
}

Jet jet_scale(double c, const Jet& a) {
  Jet r = a;
  r *= c;
  return r;
}

Jet jet_mul(const Jet& a, const Jet& b) {
  check_same(a, b, "jet_mul");
  Jet r(a.order());
  for (std::size_t n = 0; n <= a.order(); ++n) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= n; ++j) acc += a[j] * b[n - j];
    r[n] = acc;
  }
  return r;
}

Jet jet_compose_elementary(Elementary fn, const Jet& a) {
  const std::size_t k = a.order();
  const double a0 = a[0];
  Jet b(k);
  switch (fn) {
    case Elementary::Exp: {
      b[0] = std::exp(a0);
      for (std::size_t n = 1; n <= k; ++n) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= n; ++j) acc += static_cast<double>(j) * a[j] * b[n - j];
        b[n] = acc / static_cast<double>(n);
      }
      break;
    }
    case Elementary::Log: {
      if (!(a0 > 0.0)) throw DomainError("jet log: constant term must be positive");
      b[0] = std::log(a0);
      for (std::size_t n = 1; n <= k; ++n) {
        double acc = 0.0;
        for (std::size_t j = 1; j < n; ++j) acc += static_cast<double>(j) * b[j] * a[n - j];
        b[n] = (a[n] - acc / static_cast<double>(n)) / a0;
      }
      break;
    }
    case Elementary::Sqrt: {
      if (!(a0 > 0.0)) throw DomainError("jet sqrt: constant term must be positive (singular point of the work form)");
      b[0] = std::sqrt(a0);
      for (std::size_t n = 1; n <= k; ++n) {
        double acc = 0.0;
        for (std::size_t j = 1; j < n; ++j) acc += b[j] * b[n - j];
        b[n] = (a[n] - acc) / (2.0 * b[0]);
      }
      break;
    }
    case Elementary::Reciprocal: {
      if (a0 == 0.0) throw DomainError("jet reciprocal: constant term is zero");
      b[0] = 1.0 / a0;
      for (std::size_t n = 1; n <= k; ++n) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= n; ++j) acc += a[j] * b[n - j];
        b[n] = -acc / a0;
      }
      break;
    }
    case Elementary::Sin:
    case Elementary::Cos: {
      Jet s(k), c(k);
      s[0] = std::sin(a0);
      c[0] = std::cos(a0);
      for (std::size_t n = 1; n <= k; ++n) {
        double as = 0.0, ac = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
          as += static_cast<double>(j) * a[j] * c[n - j];
          ac += static_cast<double>(j) * a[j] * s[n - j];
        }
        s[n] = as / static_cast<double>(n);
        c[n] = -ac / static_cast<double>(n);
      }
      return fn == Elementary::Sin ? s : c;
    }
  }
  return b;
}

Jet jet_antiderivative(const Jet& a) {
  Jet r(a.order() + 1);
  for (std::size_t i = 0; i <= a.order(); ++i) r[i + 1] = a[i] / static_cast<double>(i + 1);
  return r;
}

Jet operator+(const Jet& a, const Jet& b) { return jet_add(a, b); }
Jet operator-(const Jet& a, const Jet& b) {
  Jet r = a;
  r -= b;
  return r;
}
Jet operator*(const Jet& a, const Jet& b) { return jet_mul(a, b); }
Jet operator/(const Jet& a, const Jet& b) { return jet_mul(a, jet_compose_elementary(Elementary::Reciprocal, b)); }
Jet operator-(const Jet& a) { return jet_scale(-1.0, a); }
Jet operator+(const Jet& a, double c) {
  Jet r = a;
  r[0] += c;
  return r;
}
Jet operator+(double c, const Jet& a) { return a + c; }
Jet operator-(const Jet& a, double c) { return a + (-c); }
Jet operator-(double c, const Jet& a) { return (-a) + c; }
Jet operator*(double c, const Jet& a) { return jet_scale(c, a); }
Jet operator*(const Jet& a, double c) { return jet_scale(c, a); }
Jet operator/(const Jet& a, double c) { return jet_scale(1.0 / c, a); }

Jet sqrt(const Jet& a) { return jet_compose_elementary(Elementary::Sqrt, a); }
Jet exp(const Jet& a) { return jet_compose_elementary(Elementary::Exp, a); }
Jet log(const Jet& a) { return jet_compose_elementary(Elementary::Log, a); }
Jet sin(const Jet& a) { return jet_compose_elementary(Elementary::Sin, a); }
Jet cos(const Jet& a) { return jet_compose_elementary(Elementary::Cos, a); }

std::string to_string(JetSign s) {
  switch (s) {
    case JetSign::Positive: return "positive";
    case JetSign::Negative: return "negative";
    case JetSign::Zero: return "zero";
    case JetSign::Indeterminate: return "indeterminate";
  }
  return "?";
}

std::ostream& operator<<(std::ostream& os, const Jet& j) {
  os << '(';
  for (std::size_t i = 0; i <= j.order(); ++i) os << (i ? ", " : "") << j[i];
  return os << ')';
}

JetSign classify(const Jet& a, double zero_band, bool source_is_zero) {
  double scale = 1.0;
  for (std::size_t i = 1; i <= a.order(); ++i) scale += std::abs(a[i]);
  const double band = zero_band * scale;
  if (std::abs(a[0]) > std::max(band, 1e-12 * scale)) {
    std::ostringstream msg;
    msg << "classify: jet " << a << " does not vanish at s = 0 (work must be zero at the initial configuration)";
    throw DomainError(msg.str());
  }
  for (std::size_t i = 1; i <= a.order(); ++i) {
    if (std::abs(a[i]) > band) return a[i] > 0.0 ? JetSign::Positive : JetSign::Negative;
  }
  return source_is_zero ? JetSign::Zero : JetSign::Indeterminate;
}

namespace {

// Coefficients of the interpolating polynomial through (j h, f(j h)), j = 0..m,
// expressed in powers of s.
Eigen::VectorXd interpolation_coeffs(const std::function<double(double)>& f, std::size_t m, double h) {
  const auto n = static_cast<Eigen::Index>(m + 1);
  Eigen::MatrixXd vand(n, n);
  Eigen::VectorXd vals(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double v = f(static_cast<double>(j) * h);
    if (!std::isfinite(v)) throw DomainError("jet_of_function: function evaluation is not finite");
    vals[j] = v;
    double p = 1.0;
    for (Eigen::Index l = 0; l < n; ++l) {
      vand(j, l) = p;
      p *= static_cast<double>(j);
    }
  }
  Eigen::VectorXd d = vand.fullPivLu().solve(vals);
  double hp = 1.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    d[l] /= hp;
    hp *= h;
  }
  return d;
}

}  // namespace

Jet jet_of_function(const std::function<double(double)>& f, std::size_t k, double domain) {
  check_order(k);
  if (!(domain > 0.0)) throw DomainError("jet_of_function: domain length must be positive");
  const std::size_t m = k + 4;
  const double h = std::min(0.1, domain / static_cast<double>(m));
  const Eigen::VectorXd e1 = interpolation_coeffs(f, m, h);
  const Eigen::VectorXd e2 = interpolation_coeffs(f, m, h / 2);
  const Eigen::VectorXd e4 = interpolation_coeffs(f, m, h / 4);
  Jet out(k);
  for (std::size_t i = 0; i <= k; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    // Leading truncation errors of coefficient i are O(h^p) and O(h^{p+1}).
    const double p = static_cast<double>(m + 1 - i);
    const double r1 = std::pow(2.0, p);
    const double a = (r1 * e2[ii] - e1[ii]) / (r1 - 1.0);
    const double b = (r1 * e4[ii] - e2[ii]) / (r1 - 1.0);
    const double r2 = 2.0 * r1;
    out[i] = (r2 * b - a) / (r2 - 1.0);
  }
  return out;
}

}  // namespace vwork
