#pragma once

#include "tollcast/eps_rational.hpp"
#include "tollcast/rational.hpp"

namespace tollcast {

// Conversion shims so solver code can be written once over an exact ordered
// field T and instantiated with plain rationals or the perturbed field.

inline Rational standard_part(const Rational& r) { return r; }
inline Rational standard_part(const EpsRational& e) { return e.standard_part(); }

template <typename T>
T from_rational(const Rational& r) {
  return T(r);
}

inline int sign_of(const Rational& r) { return r.sign(); }
inline int sign_of(const EpsRational& e) { return e.sign(); }

template <typename T>
bool is_zero(const T& v) {
  return sign_of(v) == 0;
}

}  // namespace tollcast
