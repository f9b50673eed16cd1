#pragma once

#include <optional>
#include <vector>

#include "tollcast/eps_rational.hpp"
#include "tollcast/linalg.hpp"
#include "tollcast/model.hpp"
#include "tollcast/scalar.hpp"

namespace tollcast {

/// Active support and active cost pieces of an equilibrium: the pair that
/// identifies one affine regime of the price-to-flow map.
struct EdgeState {
  std::vector<std::pair<int, int>> support;  // sorted (commodity, edge)
  std::vector<int> parts;                    // active piece per edge

  friend bool operator==(const EdgeState&, const EdgeState&) = default;
  friend auto operator<=>(const EdgeState&, const EdgeState&) = default;
  std::string str() const;
};

/// One parallel copy in the capacitated expansion of a piecewise-affine
/// edge: affine cost slope*x + offset on [0, capacity], where the offset is
/// the priced edge cost at the piece's lower breakpoint. The copy of the
/// last piece is uncapacitated.
template <typename T>
struct ExpandedCopy {
  int edge = -1;
  int piece = -1;
  T slope{0};
  T offset{0};
  std::optional<Rational> capacity;
};

template <typename T>
struct ExpandedNetwork {
  std::vector<ExpandedCopy<T>> copies;  // edge-major, pieces in order
  std::vector<int> first_copy;          // per edge index into copies
};

/// Expansion at a fixed price vector. With `perturb`, every slope gains one
/// formal infinitesimal, which makes all copy costs strictly increasing
/// without moving the limit equilibrium set.
template <typename T>
ExpandedNetwork<T> expand_network(const Instance& instance, const std::vector<T>& lambda,
                                  bool perturb);

/// Extra linear inequality sum_e w[e] * load_e <= rhs imposed on the flow
/// polytope (externality budget rows).
struct LoadRow {
  std::vector<Rational> edge_coeff;  // per original edge
  Rational rhs;
};

template <typename T>
struct QpResult {
  std::vector<std::vector<T>> copy_flow;  // [commodity][copy]
  std::vector<std::vector<T>> node_duals;  // [commodity][node]
  std::vector<T> capacity_duals;           // per copy (0 when slack)
  std::vector<T> row_duals;                // per LoadRow (0 when slack)
  long iterations = 0;
};

struct QpOptions {
  std::vector<LoadRow> rows;                    // extra load constraints
  std::optional<std::vector<std::vector<Rational>>> start;  // feasible edge flow
  bool reverse_tiebreak = false;                // flips index tie-breaking
};

/// Exact minimizer of the strictly convex expanded potential over the
/// multicommodity flow polytope with copy capacities (and optional load
/// rows), by a primal active-set method with least-index anti-cycling.
/// Returns KKT multipliers alongside the flow; throws InternalError if the
/// cycling guard trips.
template <typename T>
QpResult<T> solve_expanded_qp(const Instance& instance, const ExpandedNetwork<T>& net,
                              const QpOptions& options = {});

/// Per-commodity edge flows from a copy solution, checking the fill-order
/// invariant (a copy may carry flow only when all earlier copies of its
/// edge are saturated).
template <typename T>
std::vector<std::vector<T>> collapse_flow(const Instance& instance,
                                          const ExpandedNetwork<T>& net,
                                          const QpResult<T>& qp);

/// Typed equilibrium used by the parametric machinery: flows, loads, and
/// the edge state, all in the working field.
template <typename T>
struct TypedEquilibrium {
  std::vector<std::vector<T>> flow;           // [commodity][edge]
  std::vector<T> loads;                       // per edge
  std::vector<std::vector<std::optional<T>>> potentials;  // [commodity][node]
  EdgeState state;
  bool perturbed = false;
};

/// `warm_start` seeds the active-set solve with a feasible edge flow from a
/// nearby price; efficiency only, the optimum is unaffected.
template <typename T>
TypedEquilibrium<T> solve_equilibrium_typed(
    const Instance& instance, const std::vector<T>& lambda, bool perturb,
    bool reverse_tiebreak = false,
    const std::vector<std::vector<Rational>>* warm_start = nullptr);

/// Priced edge cost in the working field, with the optional slope
/// perturbation applied.
template <typename T>
T typed_edge_cost(const Instance& instance, int e, const T& load,
                  const std::vector<T>& lambda, bool perturb);

/// Shortest-path distances from each commodity source under the priced
/// costs at the given loads (exact Bellman-Ford; nullopt = unreachable).
template <typename T>
std::vector<std::vector<std::optional<T>>> shortest_potentials(
    const Instance& instance, const std::vector<T>& loads, const std::vector<T>& lambda,
    bool perturb);

struct EquilibriumResult {
  Flow flow;
  std::vector<std::vector<std::optional<Rational>>> potentials;  // [commodity][node]
  std::vector<Rational> lambda;
  EdgeState state;
  bool perturbed = false;  // solved through the perturbation field
};

/// Wardrop equilibrium at a fixed price vector. When every effective slope
/// is positive the edge loads are the unique equilibrium loads; otherwise
/// the solve runs in the perturbation field and reports the standard parts
/// of the limit solution, one valid equilibrium.
EquilibriumResult solve_equilibrium(const Instance& instance,
                                    const std::vector<Rational>& lambda);

/// State of a solved equilibrium: support by exact tightness of the
/// shortest-path potentials, active parts by half-open piece membership.
EdgeState extract_edge_state(const Instance& instance, const EquilibriumResult& result);

}  // namespace tollcast
