#include "tollcast/eps_rational.hpp"

#include <algorithm>

#include "tollcast/errors.hpp"

namespace tollcast {

namespace {

using Poly = EpsRational::Poly;

void trim_poly(Poly& p) {
  while (!p.empty() && p.back().is_zero()) p.pop_back();
}

Poly add(const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()));
  for (size_t i = 0; i < r.size(); ++i) {
    if (i < a.size()) r[i] += a[i];
    if (i < b.size()) r[i] += b[i];
  }
  trim_poly(r);
  return r;
}

Poly sub(const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()));
  for (size_t i = 0; i < r.size(); ++i) {
    if (i < a.size()) r[i] += a[i];
    if (i < b.size()) r[i] -= b[i];
  }
  trim_poly(r);
  return r;
}

Poly mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_zero()) continue;
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  trim_poly(r);
  return r;
}

// Remainder of a by b (b nonzero), standard polynomial division.
Poly rem(Poly a, const Poly& b) {
  Rational lead = b.back();
  while (a.size() >= b.size()) {
    Rational f = a.back() / lead;
    size_t shift = a.size() - b.size();
    for (size_t i = 0; i < b.size(); ++i) a[shift + i] -= f * b[i];
    a.pop_back();
    trim_poly(a);
    if (a.empty()) break;
  }
  return a;
}

// Exact quotient a / b, asserting zero remainder.
Poly divexact(Poly a, const Poly& b) {
  if (b.empty()) throw InternalError("polynomial division by zero");
  if (a.empty()) return {};
  Poly q(a.size() >= b.size() ? a.size() - b.size() + 1 : 0);
  Rational lead = b.back();
  while (a.size() >= b.size()) {
    Rational f = a.back() / lead;
    size_t shift = a.size() - b.size();
    q[shift] = f;
    for (size_t i = 0; i < b.size(); ++i) a[shift + i] -= f * b[i];
    a.pop_back();
    trim_poly(a);
    if (a.empty()) break;
  }
  if (!a.empty()) throw InternalError("inexact polynomial division");
  trim_poly(q);
  return q;
}

Poly make_monic(Poly p) {
  if (p.empty()) return p;
  Rational lead = p.back();
  for (auto& c : p) c /= lead;
  return p;
}

Poly poly_gcd(Poly a, Poly b) {
  trim_poly(a);
  trim_poly(b);
  while (!b.empty()) {
    Poly r = rem(a, b);
    a = std::move(b);
    b = make_monic(std::move(r));
  }
  return make_monic(std::move(a));
}

size_t trailing_zeros(const Poly& p) {
  size_t k = 0;
  while (k < p.size() && p[k].is_zero()) ++k;
  return k;
}

}  // namespace

EpsRational::EpsRational(const LexRational& l)
    : num_{l.standard(), l.epsilon_part()}, den_{Rational(1)} {
  trim(num_);
}

EpsRational::EpsRational(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
  normalize();
}

EpsRational EpsRational::epsilon() {
  EpsRational e;
  e.num_ = {Rational(0), Rational(1)};
  return e;
}

void EpsRational::trim(Poly& p) { trim_poly(p); }

void EpsRational::normalize() {
  trim_poly(num_);
  trim_poly(den_);
  if (den_.empty()) throw InternalError("infinitesimal fraction with zero denominator");
  if (num_.empty()) {
    den_ = {Rational(1)};
    return;
  }
  size_t k = std::min(trailing_zeros(num_), trailing_zeros(den_));
  if (k > 0) {
    num_.erase(num_.begin(), num_.begin() + k);
    den_.erase(den_.begin(), den_.begin() + k);
  }
  if (num_.size() > 1 || den_.size() > 1) {
    Poly g = poly_gcd(num_, den_);
    if (g.size() > 1) {
      num_ = divexact(std::move(num_), g);
      den_ = divexact(std::move(den_), g);
    }
  }
  Rational scale = den_[trailing_zeros(den_)];
  if (!(scale == Rational(1))) {
    for (auto& c : num_) c /= scale;
    for (auto& c : den_) c /= scale;
  }
}

int EpsRational::sign() const {
  if (num_.empty()) return 0;
  // Denominator's lowest nonzero coefficient is normalized to +1.
  return num_[trailing_zeros(num_)].sign();
}

Rational EpsRational::standard_part() const {
  if (num_.empty()) return Rational(0);
  if (has_pole()) throw InternalError("standard part of a value with a pole at eps=0");
  if (num_.front().is_zero()) return Rational(0);
  return num_.front() / den_.front();
}

LexRational EpsRational::first_order() const {
  if (num_.empty()) return LexRational(0);
  if (has_pole()) throw InternalError("first-order part of a value with a pole at eps=0");
  Rational p0 = num_.front();
  Rational p1 = num_.size() > 1 ? num_[1] : Rational(0);
  Rational q0 = den_.front();
  Rational q1 = den_.size() > 1 ? den_[1] : Rational(0);
  // p/q = p0/q0 + (p1*q0 - p0*q1)/q0^2 * eps + O(eps^2)
  return LexRational(p0 / q0, (p1 * q0 - p0 * q1) / (q0 * q0));
}

EpsRational EpsRational::operator-() const {
  EpsRational r = *this;
  for (auto& c : r.num_) c = -c;
  return r;
}

EpsRational& EpsRational::operator+=(const EpsRational& o) {
  num_ = add(mul(num_, o.den_), mul(o.num_, den_));
  den_ = mul(den_, o.den_);
  normalize();
  return *this;
}

EpsRational& EpsRational::operator-=(const EpsRational& o) {
  num_ = sub(mul(num_, o.den_), mul(o.num_, den_));
  den_ = mul(den_, o.den_);
  normalize();
  return *this;
}

EpsRational& EpsRational::operator*=(const EpsRational& o) {
  num_ = mul(num_, o.num_);
  den_ = mul(den_, o.den_);
  normalize();
  return *this;
}

EpsRational& EpsRational::operator/=(const EpsRational& o) {
  if (o.is_zero()) throw InternalError("division by zero infinitesimal fraction");
  num_ = mul(num_, o.den_);
  den_ = mul(den_, o.num_);
  normalize();
  return *this;
}

std::string EpsRational::str() const {
  auto poly_str = [](const Poly& p) {
    if (p.empty()) return std::string("0");
    std::string s;
    for (size_t i = 0; i < p.size(); ++i) {
      if (p[i].is_zero()) continue;
      if (!s.empty()) s += p[i].sign() < 0 ? " - " : " + ";
      else if (p[i].sign() < 0) s += "-";
      s += p[i].abs().str();
      if (i == 1) s += "*e";
      if (i > 1) s += "*e^" + std::to_string(i);
    }
    return s.empty() ? std::string("0") : s;
  };
  if (den_.size() == 1 && den_[0] == Rational(1)) return poly_str(num_);
  return "(" + poly_str(num_) + ")/(" + poly_str(den_) + ")";
}

}  // namespace tollcast
