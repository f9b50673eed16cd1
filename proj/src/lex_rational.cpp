#include "tollcast/lex_rational.hpp"

#include "tollcast/errors.hpp"

namespace tollcast {

LexRational& LexRational::operator+=(const LexRational& o) {
  std_ += o.std_;
  eps_ += o.eps_;
  return *this;
}

LexRational& LexRational::operator-=(const LexRational& o) {
  std_ -= o.std_;
  eps_ -= o.eps_;
  return *this;
}

LexRational& LexRational::operator*=(const LexRational& o) {
  if (!eps_.is_zero() && !o.eps_.is_zero()) {
    throw InternalError(
        "perturbed product would create a second-order term: (" + str() +
        ") * (" + o.str() + ")");
  }
  if (o.eps_.is_zero()) {
    std_ *= o.std_;
    eps_ *= o.std_;
  } else {
    eps_ = std_ * o.eps_;
    std_ *= o.std_;
  }
  return *this;
}

LexRational& LexRational::operator/=(const LexRational& o) {
  if (!o.eps_.is_zero()) {
    throw InternalError("perturbed division is only defined by pure rationals: (" +
                        str() + ") / (" + o.str() + ")");
  }
  std_ /= o.std_;
  eps_ /= o.std_;
  return *this;
}

std::string LexRational::str() const {
  if (eps_.is_zero()) return std_.str();
  return std_.str() + (eps_.sign() < 0 ? "-" : "+") + eps_.abs().str() + "e";
}

}  // namespace tollcast
