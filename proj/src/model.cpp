#include "tollcast/model.hpp"

#include <deque>
#include <set>

#include "tollcast/errors.hpp"

namespace tollcast {

namespace {

std::string edge_field(size_t e, const std::string& rest) {
  return "edges[" + std::to_string(e) + "]." + rest;
}

}  // namespace

Instance Instance::create(std::vector<std::string> nodes,
                          std::vector<std::string> externalities,
                          std::vector<Edge> edges,
                          std::vector<Commodity> commodities) {
  Instance inst;
  inst.nodes_ = std::move(nodes);
  inst.externalities_ = std::move(externalities);
  inst.edges_ = std::move(edges);
  inst.commodities_ = std::move(commodities);

  if (inst.nodes_.empty()) throw ValidationError("nodes", "at least one node required");
  for (size_t i = 0; i < inst.nodes_.size(); ++i) {
    if (inst.nodes_[i].empty()) {
      throw ValidationError("nodes[" + std::to_string(i) + "]", "empty node id");
    }
    if (!inst.node_index_.emplace(inst.nodes_[i], static_cast<int>(i)).second) {
      throw ValidationError("nodes[" + std::to_string(i) + "]", "duplicate node id");
    }
  }
  {
    std::set<std::string> seen;
    for (size_t j = 0; j < inst.externalities_.size(); ++j) {
      if (inst.externalities_[j].empty() || !seen.insert(inst.externalities_[j]).second) {
        throw ValidationError("externalities[" + std::to_string(j) + "]",
                              "empty or duplicate externality id");
      }
    }
  }

  int classes = inst.externality_count();
  for (size_t e = 0; e < inst.edges_.size(); ++e) {
    Edge& ed = inst.edges_[e];
    if (ed.id.empty()) throw ValidationError(edge_field(e, "id"), "empty edge id");
    if (!inst.edge_index_.emplace(ed.id, static_cast<int>(e)).second) {
      throw ValidationError(edge_field(e, "id"), "duplicate edge id");
    }
    if (ed.tail < 0 || ed.tail >= inst.node_count() || ed.head < 0 ||
        ed.head >= inst.node_count()) {
      throw ValidationError(edge_field(e, "tail"), "edge endpoint is not a known node");
    }
    if (ed.externality.size() != static_cast<size_t>(classes)) {
      throw ValidationError(edge_field(e, "externality"),
                            "one coefficient set per externality class required");
    }
    for (int j = 0; j < classes; ++j) {
      if (ed.externality[j].g.sign() < 0) {
        throw ValidationError(edge_field(e, "externality." + inst.externalities_[j] + ".g"),
                              "externality coefficient must be >= 0");
      }
      if (ed.externality[j].gamma.sign() < 0) {
        throw ValidationError(
            edge_field(e, "externality." + inst.externalities_[j] + ".gamma"),
            "externality slope must be >= 0");
      }
      if (ed.externality[j].gamma.sign() > 0) inst.affine_externality_ = true;
    }
    if (ed.pieces.empty()) {
      throw ValidationError(edge_field(e, "pieces"), "at least one piece required");
    }
    if (!ed.pieces[0].breakpoint.is_zero()) {
      throw ValidationError(edge_field(e, "pieces[0].breakpoint"), "first breakpoint must be 0");
    }
    if (ed.pieces[0].offset.sign() < 0) {
      throw ValidationError(edge_field(e, "pieces[0].offset"),
                            "travel time at zero load must be >= 0");
    }
    for (size_t k = 0; k < ed.pieces.size(); ++k) {
      const CostPiece& p = ed.pieces[k];
      if (p.slope.sign() < 0) {
        throw ValidationError(edge_field(e, "pieces[" + std::to_string(k) + "].slope"),
                              "slope must be >= 0");
      }
      if (p.slope.is_zero()) inst.strictly_increasing_ = false;
      if (k > 0) {
        const CostPiece& prev = ed.pieces[k - 1];
        if (!(prev.breakpoint < p.breakpoint)) {
          throw ValidationError(edge_field(e, "pieces[" + std::to_string(k) + "].breakpoint"),
                                "breakpoints must be strictly increasing");
        }
        Rational left = prev.slope * p.breakpoint + prev.offset;
        Rational right = p.slope * p.breakpoint + p.offset;
        if (!(left == right)) {
          throw ValidationError(edge_field(e, "pieces[" + std::to_string(k) + "].offset"),
                                "pieces must agree at the shared breakpoint (got " +
                                    left.str() + " vs " + right.str() + ")");
        }
      }
    }
  }

  if (inst.commodities_.empty()) {
    throw ValidationError("commodities", "at least one commodity required");
  }
  for (size_t i = 0; i < inst.commodities_.size(); ++i) {
    const Commodity& c = inst.commodities_[i];
    std::string field = "commodities[" + std::to_string(i) + "]";
    if (c.source < 0 || c.source >= inst.node_count() || c.target < 0 ||
        c.target >= inst.node_count()) {
      throw ValidationError(field, "commodity endpoint is not a known node");
    }
    if (c.source == c.target) throw ValidationError(field, "source and target must differ");
    if (!(Rational(0) < c.demand)) throw ValidationError(field + ".demand", "demand must be > 0");
    // Reachability via any edges.
    std::vector<char> seen(inst.node_count(), 0);
    std::deque<int> queue{c.source};
    seen[c.source] = 1;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (const Edge& ed : inst.edges_) {
        if (ed.tail == v && !seen[ed.head]) {
          seen[ed.head] = 1;
          queue.push_back(ed.head);
        }
      }
    }
    if (!seen[c.target]) throw ValidationError(field, "target is unreachable from source");
  }

  // Pad every edge to the common piece count by splitting its last piece.
  size_t max_pieces = 1;
  for (const Edge& ed : inst.edges_) max_pieces = std::max(max_pieces, ed.pieces.size());
  for (Edge& ed : inst.edges_) {
    while (ed.pieces.size() < max_pieces) {
      CostPiece last = ed.pieces.back();
      CostPiece extra = last;
      extra.breakpoint = last.breakpoint + Rational(1);
      ed.pieces.push_back(extra);
    }
  }
  inst.piece_count_ = static_cast<int>(max_pieces);
  return inst;
}

std::optional<int> Instance::node_index(const std::string& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Instance::edge_index(const std::string& id) const {
  auto it = edge_index_.find(id);
  if (it == edge_index_.end()) return std::nullopt;
  return it->second;
}

int Instance::piece_for_load(int e, const Rational& load) const {
  if (load.sign() < 0) throw ValidationError("", "negative load on edge " + edges_[e].id);
  const auto& pieces = edges_[e].pieces;
  int k = 0;
  for (size_t i = 1; i < pieces.size(); ++i) {
    if (pieces[i].breakpoint <= load) k = static_cast<int>(i);
  }
  return k;
}

Rational Instance::travel_time(int e, const Rational& load) const {
  const CostPiece& p = edges_[e].pieces[piece_for_load(e, load)];
  return p.slope * load + p.offset;
}

Rational Instance::total_demand() const {
  Rational d;
  for (const Commodity& c : commodities_) d += c.demand;
  return d;
}

Flow Flow::create(const Instance& instance, std::vector<std::vector<Rational>> values) {
  if (values.size() != static_cast<size_t>(instance.commodity_count())) {
    throw ValidationError("flow", "one edge vector per commodity required");
  }
  Flow f;
  f.values_ = std::move(values);
  f.loads_.assign(instance.edge_count(), Rational(0));
  for (int i = 0; i < instance.commodity_count(); ++i) {
    if (f.values_[i].size() != static_cast<size_t>(instance.edge_count())) {
      throw ValidationError("flow[" + std::to_string(i) + "]",
                            "one value per edge required");
    }
    std::vector<Rational> net(instance.node_count(), Rational(0));
    for (int e = 0; e < instance.edge_count(); ++e) {
      const Rational& v = f.values_[i][e];
      if (v.sign() < 0) {
        throw ValidationError("flow[" + std::to_string(i) + "][" + instance.edge(e).id + "]",
                              "flow values must be >= 0");
      }
      net[instance.edge(e).tail] += v;
      net[instance.edge(e).head] -= v;
      f.loads_[e] += v;
    }
    const Commodity& c = instance.commodity(i);
    for (int v = 0; v < instance.node_count(); ++v) {
      Rational expected;
      if (v == c.source) expected = c.demand;
      if (v == c.target) expected = -c.demand;
      if (!(net[v] == expected)) {
        throw ValidationError("flow[" + std::to_string(i) + "]",
                              "flow conservation violated at node " + instance.nodes()[v] +
                                  " (net " + net[v].str() + ", expected " + expected.str() + ")");
      }
    }
  }
  return f;
}

Rational edge_cost(const Instance& instance, int e, const Rational& load,
                   const std::vector<Rational>& lambda) {
  if (lambda.size() != static_cast<size_t>(instance.externality_count())) {
    throw ValidationError("lambda", "one price per externality class required");
  }
  Rational cost = instance.travel_time(e, load);
  const Edge& ed = instance.edge(e);
  for (size_t j = 0; j < lambda.size(); ++j) {
    cost += lambda[j] * (ed.externality[j].g + ed.externality[j].gamma * load);
  }
  return cost;
}

std::vector<Rational> total_externality(const Instance& instance, const Flow& flow) {
  std::vector<Rational> totals(instance.externality_count(), Rational(0));
  for (int e = 0; e < instance.edge_count(); ++e) {
    const Rational& x = flow.load(e);
    if (x.is_zero()) continue;
    const Edge& ed = instance.edge(e);
    for (int j = 0; j < instance.externality_count(); ++j) {
      totals[j] += (ed.externality[j].g + ed.externality[j].gamma * x) * x;
    }
  }
  return totals;
}

Rational potential(const Instance& instance, const Flow& flow) {
  Rational half(1, 2);
  Rational phi;
  for (int e = 0; e < instance.edge_count(); ++e) {
    const Rational& x = flow.load(e);
    if (x.is_zero()) continue;
    const auto& pieces = instance.edge(e).pieces;
    int k = instance.piece_for_load(e, x);
    for (int p = 0; p <= k; ++p) {
      Rational lo = pieces[p].breakpoint;
      Rational hi = p == k ? x : pieces[p + 1].breakpoint;
      // Integral of slope*y + offset over [lo, hi].
      phi += pieces[p].slope * half * (hi * hi - lo * lo) + pieces[p].offset * (hi - lo);
    }
  }
  return phi;
}

Rational potential(const Instance& instance, const Flow& flow,
                   const std::vector<Rational>& lambda) {
  if (lambda.size() != static_cast<size_t>(instance.externality_count())) {
    throw ValidationError("lambda", "one price per externality class required");
  }
  Rational half(1, 2);
  Rational phi = potential(instance, flow);
  for (int e = 0; e < instance.edge_count(); ++e) {
    const Rational& x = flow.load(e);
    if (x.is_zero()) continue;
    const Edge& ed = instance.edge(e);
    for (size_t j = 0; j < lambda.size(); ++j) {
      phi += lambda[j] * (ed.externality[j].g * x + ed.externality[j].gamma * half * x * x);
    }
  }
  return phi;
}

}  // namespace tollcast
