#pragma once

#include <compare>

#include "tollcast/rational.hpp"

namespace tollcast {

/// First-order symbolic perturbation: the value r + s*eps for a formal
/// infinitesimal eps > 0. Ordering is lexicographic, standard part first,
/// which is exactly the ordering induced by the limit eps -> 0+.
///
/// Arithmetic is deliberately restricted: sums and differences are
/// component-wise, and products/quotients require one operand to be a pure
/// rational. Any operation that would need an eps^2 term (or a 1/eps term)
/// throws InternalError.
class LexRational {
 public:
  LexRational() = default;
  LexRational(Rational std_part) : std_(std::move(std_part)) {}  // NOLINT
  LexRational(Rational std_part, Rational eps_part)
      : std_(std::move(std_part)), eps_(std::move(eps_part)) {}

  static LexRational epsilon() { return LexRational(0, 1); }

  const Rational& standard() const { return std_; }
  const Rational& epsilon_part() const { return eps_; }
  bool is_rational() const { return eps_.is_zero(); }
  bool is_zero() const { return std_.is_zero() && eps_.is_zero(); }

  int sign() const {
    if (int s = std_.sign()) return s;
    return eps_.sign();
  }

  LexRational operator-() const { return {-std_, -eps_}; }
  LexRational& operator+=(const LexRational& o);
  LexRational& operator-=(const LexRational& o);
  LexRational& operator*=(const LexRational& o);
  LexRational& operator/=(const LexRational& o);

  friend LexRational operator+(LexRational a, const LexRational& b) { return a += b; }
  friend LexRational operator-(LexRational a, const LexRational& b) { return a -= b; }
  friend LexRational operator*(LexRational a, const LexRational& b) { return a *= b; }
  friend LexRational operator/(LexRational a, const LexRational& b) { return a /= b; }

  friend bool operator==(const LexRational& a, const LexRational& b) {
    return a.std_ == b.std_ && a.eps_ == b.eps_;
  }
  friend std::strong_ordering operator<=>(const LexRational& a,
                                          const LexRational& b) {
    if (auto c = a.std_ <=> b.std_; c != std::strong_ordering::equal) return c;
    return a.eps_ <=> b.eps_;
  }

  std::string str() const;

 private:
  Rational std_;
  Rational eps_;
};

}  // namespace tollcast
