#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>

#include "vwork/error.hpp"

namespace vwork {

/// Largest supported truncation order.
inline constexpr std::size_t kMaxJetOrder = 8;

/// Truncated Taylor sequence (e_0, ..., e_k) of a function of the arc
/// parameter at s = 0, i.e. the polynomial e_0 + e_1 s + ... + e_k s^k with
/// e_i = D^i g(0) / i!.
///
/// Arithmetic between jets requires equal orders and never reads past index k.
/// Mixed arithmetic with a double treats the double as a constant jet.
class Jet {
 public:
  Jet() = default;
  explicit Jet(std::size_t order);
  Jet(std::size_t order, std::initializer_list<double> coeffs);
  static Jet constant(std::size_t order, double c);
  /// The identity s truncated at `order` (requires order >= 1 to be non-zero).
  static Jet variable(std::size_t order);

  std::size_t order() const { return order_; }
  double operator[](std::size_t i) const;
  double& operator[](std::size_t i);
  std::span<const double> coeffs() const { return {c_.data(), order_ + 1}; }

  /// Drops coefficients above `order`.
  Jet truncated(std::size_t order) const;
  /// Formal derivative; the result has order k-1 (order 0 stays order 0).
  Jet derivative() const;
  /// Value of the represented polynomial.
  double evaluate(double s) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator*=(double s);

 private:
  std::size_t order_ = 0;
  std::array<double, kMaxJetOrder + 1> c_{};
};

Jet jet_add(const Jet& a, const Jet& b);
Jet jet_scale(double c, const Jet& a);
/// Cauchy product truncated at the common order.
Jet jet_mul(const Jet& a, const Jet& b);

enum class Elementary { Sqrt, Exp, Log, Sin, Cos, Reciprocal };

/// Taylor coefficients of fn(a(s)) by the standard recurrences. Throws
/// DomainError when fn is undefined (or not smooth) at a[0].
Jet jet_compose_elementary(Elementary fn, const Jet& a);

/// Jet of the antiderivative vanishing at 0: (0, a_0/1, ..., a_{k-1}/k);
/// the result has order a.order() + 1.
Jet jet_antiderivative(const Jet& a);

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator+(const Jet& a, double c);
Jet operator+(double c, const Jet& a);
Jet operator-(const Jet& a, double c);
Jet operator-(double c, const Jet& a);
Jet operator*(double c, const Jet& a);
Jet operator*(const Jet& a, double c);
Jet operator/(const Jet& a, double c);

Jet sqrt(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);

enum class JetSign { Positive, Negative, Zero, Indeterminate };

std::string to_string(JetSign s);
std::ostream& operator<<(std::ostream& os, const Jet& j);

/// Sign of a jet lying in the ideal (e_0 = 0): the sign of its first non-zero
/// coefficient. A coefficient is treated as zero when
/// |e_i| <= zero_band * (1 + |e_1| + ... + |e_k|). An all-zero jet is
/// Indeterminate unless the caller asserts the source function is zero.
/// Throws DomainError when e_0 is outside the zero band.
JetSign classify(const Jet& a, double zero_band = 0.0, bool source_is_zero = false);

/// Jet of a scalar function on [0, domain] at s = 0 by one-sided finite
/// differences with three-level Richardson extrapolation. Intended for k <= 4.
Jet jet_of_function(const std::function<double(double)>& f, std::size_t k, double domain = 1.0);

/// Constant with the same shape as `proto` (a double or a Jet). Used by code
/// templated over the scalar type.
inline double constant_like(double, double c) { return c; }
inline Jet constant_like(const Jet& proto, double c) { return Jet::constant(proto.order(), c); }

}  // namespace vwork
