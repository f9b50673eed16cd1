#pragma once

#include <compare>
#include <string>
#include <vector>

#include "tollcast/lex_rational.hpp"
#include "tollcast/rational.hpp"

namespace tollcast {

/// Exact arithmetic in the ordered field of univariate rational functions of
/// a formal infinitesimal eps > 0. Unlike LexRational this field is closed
/// under all four operations, so it can drive pivoting and elimination on
/// perturbed problems; the price is polynomial coefficients instead of a
/// single first-order term.
///
/// Values are kept normalized: numerator and denominator share no polynomial
/// factor, no common power of eps, and the lowest nonzero denominator
/// coefficient is 1. The ordering is the one induced by eps -> 0+.
class EpsRational {
 public:
  using Poly = std::vector<Rational>;  // coefficients, ascending powers

  EpsRational() : num_{}, den_{Rational(1)} {}
  EpsRational(Rational r)  // NOLINT(google-explicit-constructor)
      : num_{std::move(r)}, den_{Rational(1)} {
    trim(num_);
  }
  EpsRational(long n) : EpsRational(Rational(n)) {}  // NOLINT
  EpsRational(const LexRational& l);                 // NOLINT
  EpsRational(Poly num, Poly den);

  static EpsRational epsilon();

  bool is_zero() const { return num_.empty(); }
  bool is_rational() const { return num_.size() <= 1 && den_.size() == 1; }
  int sign() const;

  /// Value at eps = 0. Throws InternalError on a pole (eps still divides the
  /// denominator after reduction).
  Rational standard_part() const;
  bool has_pole() const { return !den_.empty() && den_.front().is_zero(); }

  /// First-order truncation r + s*eps. Throws on a pole.
  LexRational first_order() const;

  const Poly& numerator() const { return num_; }
  const Poly& denominator() const { return den_; }

  EpsRational operator-() const;
  EpsRational& operator+=(const EpsRational& o);
  EpsRational& operator-=(const EpsRational& o);
  EpsRational& operator*=(const EpsRational& o);
  EpsRational& operator/=(const EpsRational& o);

  friend EpsRational operator+(EpsRational a, const EpsRational& b) { return a += b; }
  friend EpsRational operator-(EpsRational a, const EpsRational& b) { return a -= b; }
  friend EpsRational operator*(EpsRational a, const EpsRational& b) { return a *= b; }
  friend EpsRational operator/(EpsRational a, const EpsRational& b) { return a /= b; }

  friend bool operator==(const EpsRational& a, const EpsRational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const EpsRational& a,
                                          const EpsRational& b) {
    int s = (a - b).sign();
    return s < 0 ? std::strong_ordering::less
                 : (s > 0 ? std::strong_ordering::greater
                          : std::strong_ordering::equal);
  }

  std::string str() const;

 private:
  static void trim(Poly& p);
  void normalize();

  Poly num_;
  Poly den_;
};

}  // namespace tollcast
