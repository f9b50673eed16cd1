#include "tollcast/rational.hpp"

#include <cctype>
#include <ostream>

#include "tollcast/errors.hpp"

namespace tollcast {

Rational::Rational(long n, long d) {
  if (d == 0) throw InternalError("rational with zero denominator");
  v_ = mpq_class(n, d);
  v_.canonicalize();
}

Rational::Rational(const mpz_class& n, const mpz_class& d) {
  if (sgn(d) == 0) throw InternalError("rational with zero denominator");
  v_ = mpq_class(n) / mpq_class(d);
}

Rational Rational::abs() const { return sign() < 0 ? -*this : *this; }

Rational Rational::operator-() const {
  Rational r;
  r.v_ = -v_;
  return r;
}

Rational& Rational::operator+=(const Rational& o) {
  v_ += o.v_;
  return *this;
}

Rational& Rational::operator-=(const Rational& o) {
  v_ -= o.v_;
  return *this;
}

Rational& Rational::operator*=(const Rational& o) {
  v_ *= o.v_;
  return *this;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw InternalError("rational division by zero");
  v_ /= o.v_;
  return *this;
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

std::optional<Rational> Rational::parse(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) return std::nullopt;

  mpq_class value;
  auto slash = s.find('/');
  auto dot = s.find('.');
  if (slash != std::string_view::npos) {
    std::string_view num = s.substr(0, slash);
    std::string_view den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) return std::nullopt;
    mpz_class d(std::string(den), 10);
    if (sgn(d) == 0) return std::nullopt;
    value = mpq_class(mpz_class(std::string(num), 10)) / mpq_class(d);
  } else if (dot != std::string_view::npos) {
    std::string_view ip = s.substr(0, dot);
    std::string_view fp = s.substr(dot + 1);
    if (!all_digits(ip) || !all_digits(fp)) return std::nullopt;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, fp.size());
    mpz_class num = mpz_class(std::string(ip), 10) * scale +
                    mpz_class(std::string(fp), 10);
    value = mpq_class(num) / mpq_class(scale);
  } else {
    if (!all_digits(s)) return std::nullopt;
    value = mpq_class(mpz_class(std::string(s), 10));
  }
  if (negative) value = -value;
  Rational r;
  r.v_ = std::move(value);
  r.v_.canonicalize();
  return r;
}

std::string Rational::str() const {
  if (is_integer()) return v_.get_num().get_str();
  return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

std::string Rational::decimal(int digits) const {
  if (digits < 0) digits = 0;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
  mpz_class num = numerator() * scale;
  mpz_class q;
  mpz_tdiv_q(q.get_mpz_t(), num.get_mpz_t(), denominator().get_mpz_t());
  std::string sign_str = sgn(q) < 0 || (sgn(q) == 0 && sign() < 0) ? "-" : "";
  mpz_class a = ::abs(q);
  mpz_class ip = a / scale;
  mpz_class fp = a % scale;
  if (digits == 0) return sign_str + ip.get_str();
  std::string frac = fp.get_str();
  frac.insert(frac.begin(), digits - frac.size(), '0');
  return sign_str + ip.get_str() + "." + frac;
}

Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

std::ostream& operator<<(std::ostream& os, const Rational& r) {
  return os << r.str();
}

}  // namespace tollcast
