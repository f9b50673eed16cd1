#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tollcast/model.hpp"

namespace tollcast {

inline constexpr std::size_t kDefaultPathCap = 100000;

/// All simple source->target paths of a commodity as edge-index sequences,
/// in lexicographic order of the edge id sequence. Intended for verification
/// on small graphs; throws PathLimitError beyond `cap` paths.
std::vector<std::vector<int>> enumerate_paths(const Instance& instance, int commodity,
                                              std::size_t cap = kDefaultPathCap);

struct WardropWitness {
  int commodity = -1;
  std::vector<int> used_path;  // flow-carrying path (or trapped cycle)
  Rational used_cost;
  std::vector<int> best_path;
  Rational best_cost;
  bool cycle = false;  // used_path is a circulation, not a source->target path
};

struct WardropCheck {
  bool equilibrium = false;
  std::optional<WardropWitness> witness;
  std::vector<Rational> min_costs;  // per commodity, from path enumeration
};

/// Independent equilibrium check by full path enumeration: decomposes each
/// commodity's flow into simple paths and accepts iff every decomposition
/// path meets the commodity's minimum path cost under the priced costs
/// evaluated at the flow's edge loads, with no circulation left over.
WardropCheck verify_wardrop(const Instance& instance, const Flow& flow,
                            const std::vector<Rational>& lambda,
                            std::size_t path_cap = kDefaultPathCap);

}  // namespace tollcast
