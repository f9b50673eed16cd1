#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tollcast/rational.hpp"

namespace tollcast {

/// One affine segment of an edge travel-time function, valid on
/// [breakpoint, next breakpoint): cost = slope * load + offset.
struct CostPiece {
  Rational breakpoint;
  Rational slope;
  Rational offset;
};

/// Per-externality-class coefficients of an edge. A unit of load induces
/// g + gamma * load units of the externality; gamma > 0 makes the induced
/// externality load-dependent, which only the fixed-price operations accept.
struct ExternalityCoef {
  Rational g;
  Rational gamma;
};

struct Edge {
  std::string id;
  int tail = -1;
  int head = -1;
  std::vector<CostPiece> pieces;
  std::vector<ExternalityCoef> externality;  // indexed by externality class
};

struct Commodity {
  int source = -1;
  int target = -1;
  Rational demand;
};

/// Immutable road network instance: directed graph, piecewise-affine edge
/// travel times, per-class externality coefficients, and demands. All edges
/// carry the same number of pieces; shorter inputs are padded by splitting
/// their last piece, which leaves the cost functions unchanged.
class Instance {
 public:
  /// Validates everything: endpoints, demands, breakpoints, continuity,
  /// sign constraints, and per-commodity reachability. Throws
  /// ValidationError with a field path on the first violation.
  static Instance create(std::vector<std::string> nodes,
                         std::vector<std::string> externalities,
                         std::vector<Edge> edges,
                         std::vector<Commodity> commodities);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int commodity_count() const { return static_cast<int>(commodities_.size()); }
  int externality_count() const { return static_cast<int>(externalities_.size()); }
  /// Number of pieces per edge after padding (K + 1 in the usual notation).
  int piece_count() const { return piece_count_; }

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<std::string>& externalities() const { return externalities_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Commodity>& commodities() const { return commodities_; }
  const Edge& edge(int e) const { return edges_[e]; }
  const Commodity& commodity(int i) const { return commodities_[i]; }

  std::optional<int> node_index(const std::string& id) const;
  std::optional<int> edge_index(const std::string& id) const;

  /// True when some class has a load-dependent coefficient (gamma > 0).
  bool has_affine_externality() const { return affine_externality_; }
  /// True when every travel-time piece has a strictly positive slope.
  bool strictly_increasing() const { return strictly_increasing_; }

  /// Piece index k with sigma_k <= load (< sigma_{k+1}; the last piece is
  /// unbounded). Throws on negative load.
  int piece_for_load(int e, const Rational& load) const;

  /// Travel time tau_e(load), externality price excluded.
  Rational travel_time(int e, const Rational& load) const;

  Rational total_demand() const;

 private:
  std::vector<std::string> nodes_;
  std::vector<std::string> externalities_;
  std::vector<Edge> edges_;
  std::vector<Commodity> commodities_;
  std::map<std::string, int> node_index_;
  std::map<std::string, int> edge_index_;
  int piece_count_ = 1;
  bool affine_externality_ = false;
  bool strictly_increasing_ = true;
};

/// Per-commodity edge flow. Construction validates nonnegativity and exact
/// flow conservation (net outflow d_i at the source, -d_i at the target,
/// zero elsewhere).
class Flow {
 public:
  static Flow create(const Instance& instance, std::vector<std::vector<Rational>> values);

  const std::vector<std::vector<Rational>>& values() const { return values_; }
  const Rational& value(int commodity, int e) const { return values_[commodity][e]; }
  const std::vector<Rational>& loads() const { return loads_; }
  const Rational& load(int e) const { return loads_[e]; }

 private:
  std::vector<std::vector<Rational>> values_;
  std::vector<Rational> loads_;
};

struct Budget {
  std::vector<Rational> bounds;  // indexed by externality class
};

/// Priced edge cost a_k*load + b_k + sum_j lambda_j*(g_j + gamma_j*load),
/// with k the piece containing the load.
Rational edge_cost(const Instance& instance, int e, const Rational& load,
                   const std::vector<Rational>& lambda);

/// Exact per-class totals sum_e (g_j + gamma_j x_e) * x_e.
std::vector<Rational> total_externality(const Instance& instance, const Flow& flow);

/// Travel-time potential: sum over edges of the exact integral of tau_e
/// from 0 to the edge load (piecewise quadratic).
Rational potential(const Instance& instance, const Flow& flow);

/// Priced potential: adds sum_j lambda_j * (g_j x_e + gamma_j x_e^2 / 2).
Rational potential(const Instance& instance, const Flow& flow,
                   const std::vector<Rational>& lambda);

}  // namespace tollcast
