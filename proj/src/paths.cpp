#include "tollcast/paths.hpp"

#include <algorithm>

#include "tollcast/errors.hpp"

namespace tollcast {

namespace {

// Outgoing edge indices per node, sorted by edge id so that path order (and
// every decomposition below) is reproducible regardless of file order.
std::vector<std::vector<int>> adjacency_by_id(const Instance& instance) {
  std::vector<std::vector<int>> adj(instance.node_count());
  for (int e = 0; e < instance.edge_count(); ++e) adj[instance.edge(e).tail].push_back(e);
  for (auto& out : adj) {
    std::sort(out.begin(), out.end(), [&](int a, int b) {
      return instance.edge(a).id < instance.edge(b).id;
    });
  }
  return adj;
}

Rational path_cost(const std::vector<int>& path, const std::vector<Rational>& costs) {
  Rational total;
  for (int e : path) total += costs[e];
  return total;
}

}  // namespace

std::vector<std::vector<int>> enumerate_paths(const Instance& instance, int commodity,
                                              std::size_t cap) {
  const Commodity& c = instance.commodity(commodity);
  auto adj = adjacency_by_id(instance);
  std::vector<std::vector<int>> paths;
  std::vector<int> stack;
  std::vector<char> on_path(instance.node_count(), 0);

  // Iterative DFS with per-node cursor, emitting paths in lexicographic order.
  std::vector<size_t> cursor{0};
  std::vector<int> node_stack{c.source};
  on_path[c.source] = 1;
  while (!node_stack.empty()) {
    int v = node_stack.back();
    if (v == c.target) {
      if (paths.size() >= cap) {
        throw PathLimitError("path enumeration exceeded cap of " + std::to_string(cap));
      }
      paths.push_back(stack);
      on_path[v] = 0;
      node_stack.pop_back();
      cursor.pop_back();
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    bool advanced = false;
    while (cursor.back() < adj[v].size()) {
      int e = adj[v][cursor.back()++];
      int w = instance.edge(e).head;
      if (on_path[w]) continue;
      stack.push_back(e);
      node_stack.push_back(w);
      on_path[w] = 1;
      cursor.push_back(0);
      advanced = true;
      break;
    }
    if (!advanced) {
      on_path[v] = 0;
      node_stack.pop_back();
      cursor.pop_back();
      if (!stack.empty()) stack.pop_back();
    }
  }
  return paths;
}

WardropCheck verify_wardrop(const Instance& instance, const Flow& flow,
                            const std::vector<Rational>& lambda, std::size_t path_cap) {
  std::vector<Rational> costs(instance.edge_count());
  for (int e = 0; e < instance.edge_count(); ++e) {
    costs[e] = edge_cost(instance, e, flow.load(e), lambda);
  }
  auto adj = adjacency_by_id(instance);

  WardropCheck result;
  result.min_costs.resize(instance.commodity_count());
  for (int i = 0; i < instance.commodity_count(); ++i) {
    auto paths = enumerate_paths(instance, i, path_cap);
    if (paths.empty()) throw InternalError("validated commodity has no path");
    int best = 0;
    Rational best_cost = path_cost(paths[0], costs);
    for (size_t p = 1; p < paths.size(); ++p) {
      Rational cost = path_cost(paths[p], costs);
      if (cost < best_cost) {
        best = static_cast<int>(p);
        best_cost = cost;
      }
    }
    result.min_costs[i] = best_cost;

    const Commodity& c = instance.commodity(i);
    std::vector<Rational> residual = flow.values()[i];
    Rational remaining = c.demand;
    while (remaining.sign() > 0) {
      // Simple source->target path through positive residual edges. One
      // exists while demand remains, by flow decomposition.
      std::vector<int> parent_edge(instance.node_count(), -1);
      std::vector<char> visited(instance.node_count(), 0);
      std::vector<int> dfs{c.source};
      visited[c.source] = 1;
      while (!dfs.empty() && !visited[c.target]) {
        int v = dfs.back();
        dfs.pop_back();
        // Reverse order so the lexicographically first edge is explored first.
        for (auto it = adj[v].rbegin(); it != adj[v].rend(); ++it) {
          int e = *it;
          if (residual[e].sign() <= 0 || visited[instance.edge(e).head]) continue;
          visited[instance.edge(e).head] = 1;
          parent_edge[instance.edge(e).head] = e;
          dfs.push_back(instance.edge(e).head);
        }
      }
      if (!visited[c.target]) {
        throw InternalError("flow decomposition stalled before demand was routed");
      }
      std::vector<int> path;
      for (int v = c.target; v != c.source;) {
        int e = parent_edge[v];
        path.push_back(e);
        v = instance.edge(e).tail;
      }
      std::reverse(path.begin(), path.end());
      Rational amount = remaining;
      for (int e : path) amount = min(amount, residual[e]);
      for (int e : path) residual[e] -= amount;
      remaining -= amount;

      Rational cost = path_cost(path, costs);
      if (result.min_costs[i] < cost) {
        WardropWitness w;
        w.commodity = i;
        w.used_path = path;
        w.used_cost = cost;
        w.best_path = paths[best];
        w.best_cost = best_cost;
        result.equilibrium = false;
        result.witness = std::move(w);
        return result;
      }
    }
    // Leftover positive residual is a circulation the path flow cannot
    // represent; report the trapped cycle.
    for (int e0 = 0; e0 < instance.edge_count(); ++e0) {
      if (residual[e0].sign() <= 0) continue;
      std::vector<int> walk{e0};
      std::vector<int> seen_at(instance.node_count(), -1);
      seen_at[instance.edge(e0).tail] = 0;
      int v = instance.edge(e0).head;
      while (seen_at[v] < 0) {
        seen_at[v] = static_cast<int>(walk.size());
        int next = -1;
        for (int e : adj[v]) {
          if (residual[e].sign() > 0) {
            next = e;
            break;
          }
        }
        if (next < 0) throw InternalError("circulation walk stalled");
        walk.push_back(next);
        v = instance.edge(next).head;
      }
      WardropWitness w;
      w.commodity = i;
      w.used_path.assign(walk.begin() + seen_at[v], walk.end());
      w.used_cost = path_cost(w.used_path, costs);
      w.best_path = paths[best];
      w.best_cost = best_cost;
      w.cycle = true;
      result.equilibrium = false;
      result.witness = std::move(w);
      return result;
    }
  }
  result.equilibrium = true;
  return result;
}

}  // namespace tollcast
