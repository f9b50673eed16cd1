#pragma once

#include <map>
#include <optional>
#include <vector>

#include "tollcast/equilibrium.hpp"
#include "tollcast/lp.hpp"
#include "tollcast/model.hpp"

namespace tollcast {

/// Outcome of optimizing the price over one edge state's affine regime.
struct StateIntervalOutcome {
  enum class Kind { optimal, infeasible, unbounded } kind = Kind::infeasible;
  // Optimal: the extremal price and an equilibrium attaining it.
  std::optional<Rational> lambda;
  std::optional<Flow> flow;
  // Unbounded (max sense): a feasible anchor plus the per-unit-price flow
  // direction along which the regime extends forever.
  std::optional<Rational> base_lambda;
  std::optional<Flow> base_flow;
  std::vector<std::vector<Rational>> flow_ray;  // [commodity][edge]
};

/// Extremal price of an edge state: builds the regime's linear program --
/// cost equalities on support pairs, inequalities elsewhere, zero flow off
/// support, loads boxed into the active piece, conservation, price >= 0 --
/// and optimizes the price in the requested sense. Infeasible iff no price
/// realizes the state. Requires constant externality coefficients.
StateIntervalOutcome state_interval(const Instance& instance, const EdgeState& state,
                                    ObjSense sense);

/// One maximal price interval on which a single edge state stays active;
/// the equilibrium is affine in the price between the recorded endpoint
/// flows (or along the terminal ray when unbounded).
struct CurveSegment {
  EdgeState state;
  Rational lo;
  std::optional<Rational> hi;  // nullopt: extends to +infinity
  std::vector<std::vector<Rational>> flow_lo;
  std::vector<std::vector<Rational>> flow_hi;  // finite case
  std::vector<std::vector<Rational>> ray;      // unbounded case, per unit price
};

/// The complete piecewise-affine price-to-equilibrium map: sorted
/// breakpoints with chosen equilibria, the covering segments, and the
/// terminal ray. `perturbed` flags curves traced through the perturbation
/// field (instances with flat cost pieces); such a curve is one valid
/// equilibrium selection.
struct EquilibriumCurve {
  Instance instance;
  std::vector<std::pair<Rational, Flow>> breakpoints;
  struct Terminal {
    Rational start;
    Flow base;
    std::vector<std::vector<Rational>> ray;  // zero when the flow freezes
  };
  Terminal terminal;
  std::vector<CurveSegment> segments;
  bool perturbed = false;
  long states_discovered = 0;
};

/// Traces the full curve on [0, infinity): solves equilibria at the ends,
/// closes gaps by bisection (every step discovers a new state), and derives
/// the terminal ray from the unbounded max-sense regime program. Rejects
/// load-dependent externalities and instances with more than one class.
EquilibriumCurve trace_curve(const Instance& instance);

/// Equilibrium at any price: recorded flow at breakpoints, affine
/// interpolation inside segments, base + (lambda - start) * ray beyond.
Flow evaluate(const EquilibriumCurve& curve, const Rational& lambda);

/// Sound upper bound on the largest breakpoint of the curve: scaled total
/// travel time at full congestion, plus one. Zero when no price can shift
/// any commodity (every path of each commodity induces the same
/// externality).
Rational lambda_max(const Instance& instance);

}  // namespace tollcast
