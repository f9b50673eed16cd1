#pragma once

// Templated internals shared by the curve tracer and the price-search
// operations: the regime linear program over a fixed edge state and the
// interval/segment computations, usable over plain rationals or the
// perturbation field.

#include <optional>

#include "tollcast/equilibrium.hpp"
#include "tollcast/lp.hpp"
#include "tollcast/model.hpp"

namespace tollcast::detail {

template <typename T>
struct StateLp {
  LinearProgram<T> lp;
  int pi0 = 0;        // first potential variable (flows occupy [0, I*E))
  int lambda_var = 0;
};

template <typename T>
StateLp<T> build_state_lp(const Instance& inst, const EdgeState& state, bool perturb,
                          ObjSense sense);

/// Maximal price interval of one edge state, with the extremal equilibria
/// (or the per-unit-price ray when unbounded above). nullopt when no price
/// realizes the state.
template <typename T>
struct TInterval {
  EdgeState state;
  T lo{0};
  std::optional<T> hi;
  std::vector<std::vector<T>> flow_lo;
  std::vector<std::vector<T>> flow_hi;
  std::vector<std::vector<T>> ray;
};

template <typename T>
std::optional<TInterval<T>> state_interval_typed(const Instance& inst, const EdgeState& state,
                                                 bool perturb);

/// Solve at a price, extract the state, and return its interval. The warm
/// flow, when given, seeds the equilibrium solve.
template <typename T>
TInterval<T> segment_at(const Instance& inst, const T& lambda, bool perturb,
                        const std::vector<std::vector<Rational>>* warm = nullptr);

/// True when every route of the commodity induces the same externality, so
/// no price can shift it.
bool commodity_externality_is_fixed(const Instance& inst, int commodity);

/// Least common denominator of the externality coefficients: path
/// externality values are multiples of its reciprocal.
Rational externality_denominator_scale(const Instance& inst);

/// Sound bound past every breakpoint: scaled congested travel time plus
/// one; zero when no commodity can be shifted.
template <typename T>
T lambda_max_typed(const Instance& inst, bool perturb);

extern template StateLp<Rational> build_state_lp(const Instance&, const EdgeState&, bool, ObjSense);
extern template StateLp<EpsRational> build_state_lp(const Instance&, const EdgeState&, bool, ObjSense);
extern template std::optional<TInterval<Rational>> state_interval_typed(const Instance&, const EdgeState&, bool);
extern template std::optional<TInterval<EpsRational>> state_interval_typed(const Instance&, const EdgeState&, bool);
extern template TInterval<Rational> segment_at(const Instance&, const Rational&, bool, const std::vector<std::vector<Rational>>*);
extern template TInterval<EpsRational> segment_at(const Instance&, const EpsRational&, bool, const std::vector<std::vector<Rational>>*);
extern template Rational lambda_max_typed<Rational>(const Instance&, bool);
extern template EpsRational lambda_max_typed<EpsRational>(const Instance&, bool);

}  // namespace tollcast::detail
