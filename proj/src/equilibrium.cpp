#include "tollcast/equilibrium.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "tollcast/errors.hpp"

namespace tollcast {

std::string EdgeState::str() const {
  std::ostringstream os;
  os << "S={";
  for (size_t k = 0; k < support.size(); ++k) {
    if (k) os << ",";
    os << "(" << support[k].first << "," << support[k].second << ")";
  }
  os << "} l=(";
  for (size_t e = 0; e < parts.size(); ++e) {
    if (e) os << ",";
    os << parts[e];
  }
  os << ")";
  return os.str();
}

template <typename T>
ExpandedNetwork<T> expand_network(const Instance& instance, const std::vector<T>& lambda,
                                  bool perturb) {
  ExpandedNetwork<T> net;
  net.first_copy.resize(instance.edge_count());
  for (int e = 0; e < instance.edge_count(); ++e) {
    net.first_copy[e] = static_cast<int>(net.copies.size());
    const Edge& ed = instance.edge(e);
    for (size_t k = 0; k < ed.pieces.size(); ++k) {
      ExpandedCopy<T> copy;
      copy.edge = e;
      copy.piece = static_cast<int>(k);
      copy.slope = from_rational<T>(ed.pieces[k].slope);
      for (size_t j = 0; j < lambda.size(); ++j) {
        copy.slope += lambda[j] * from_rational<T>(ed.externality[j].gamma);
      }
      if (perturb) {
        if constexpr (std::is_same_v<T, EpsRational>) {
          copy.slope += EpsRational::epsilon();
        } else {
          throw InternalError("perturbed expansion requires the perturbation field");
        }
      }
      const Rational& sigma = ed.pieces[k].breakpoint;
      copy.offset = copy.slope * from_rational<T>(sigma) + from_rational<T>(ed.pieces[k].offset);
      for (size_t j = 0; j < lambda.size(); ++j) {
        copy.offset += lambda[j] * from_rational<T>(ed.externality[j].g);
      }
      if (k + 1 < ed.pieces.size()) {
        copy.capacity = ed.pieces[k + 1].breakpoint - sigma;
      }
      net.copies.push_back(std::move(copy));
    }
  }
  return net;
}

namespace {

constexpr long kQpIterationCap = 200000;

template <typename T>
class ActiveSetQp {
 public:
  ActiveSetQp(const Instance& inst, const ExpandedNetwork<T>& net, const QpOptions& opt)
      : inst_(inst), net_(net), opt_(opt) {
    nc_ = static_cast<int>(net_.copies.size());
    ni_ = inst_.commodity_count();
    nv_ = inst_.node_count();
    n_ = ni_ * nc_;
    build_rows();
  }

  QpResult<T> run() {
    initial_point();
    long iterations = 0;
    while (true) {
      if (++iterations > kQpIterationCap) {
        throw InternalError("active-set cycling guard exhausted");
      }
      auto direction = eqp_direction();
      if (!direction) {
        if (optimal_or_drop()) break;
        continue;
      }
      take_step(direction->first, direction->second);
    }
    QpResult<T> res;
    res.copy_flow.assign(ni_, std::vector<T>(nc_, T(0)));
    for (int i = 0; i < ni_; ++i) {
      for (int c = 0; c < nc_; ++c) res.copy_flow[i][c] = z_[var(i, c)];
    }
    res.node_duals = node_duals_;
    res.capacity_duals = capacity_duals_;
    res.row_duals = user_row_duals_;
    res.iterations = iterations;
    return res;
  }

 private:
  struct Row {
    std::vector<T> w;  // per copy
    T rhs{0};
    int capacity_copy = -1;  // >= 0 for capacity rows
    int user_index = -1;     // >= 0 for caller-supplied load rows
  };

  const Instance& inst_;
  const ExpandedNetwork<T>& net_;
  const QpOptions& opt_;
  int nc_ = 0, ni_ = 0, nv_ = 0, n_ = 0;
  std::vector<Row> rows_;
  std::vector<T> z_;
  std::vector<char> active_z_;
  std::vector<char> active_row_;
  std::vector<std::vector<T>> node_duals_;
  std::vector<T> capacity_duals_;
  std::vector<T> user_row_duals_;

  int var(int i, int c) const { return i * nc_ + c; }

  int copies_end(int e) const {
    return e + 1 < inst_.edge_count() ? net_.first_copy[e + 1] : nc_;
  }

  void build_rows() {
    for (int c = 0; c < nc_; ++c) {
      if (!net_.copies[c].capacity) continue;
      Row row;
      row.w.assign(nc_, T(0));
      row.w[c] = T(1);
      row.rhs = from_rational<T>(*net_.copies[c].capacity);
      row.capacity_copy = c;
      rows_.push_back(std::move(row));
    }
    for (size_t u = 0; u < opt_.rows.size(); ++u) {
      Row row;
      row.w.assign(nc_, T(0));
      for (int c = 0; c < nc_; ++c) {
        row.w[c] = from_rational<T>(opt_.rows[u].edge_coeff[net_.copies[c].edge]);
      }
      row.rhs = from_rational<T>(opt_.rows[u].rhs);
      row.user_index = static_cast<int>(u);
      rows_.push_back(std::move(row));
    }
  }

  T copy_load(int c) const {
    T load(0);
    for (int i = 0; i < ni_; ++i) load += z_[var(i, c)];
    return load;
  }

  T row_activity(const Row& row) const {
    T act(0);
    for (int c = 0; c < nc_; ++c) {
      if (is_zero(row.w[c])) continue;
      act += row.w[c] * copy_load(c);
    }
    return act;
  }

  void initial_point() {
    z_.assign(n_, T(0));
    if (opt_.start) {
      load_start(*opt_.start);
    } else {
      route_on_last_copies();
    }
    active_z_.assign(n_, 0);
    for (int j = 0; j < n_; ++j) active_z_[j] = is_zero(z_[j]) ? 1 : 0;
    active_row_.assign(rows_.size(), 0);
    for (size_t r = 0; r < rows_.size(); ++r) {
      active_row_[r] = row_activity(rows_[r]) == rows_[r].rhs ? 1 : 0;
    }
  }

  // Route each demand along one path, using the uncapacitated last copies.
  void route_on_last_copies() {
    for (int i = 0; i < ni_; ++i) {
      const Commodity& com = inst_.commodity(i);
      std::vector<int> parent(nv_, -1);
      std::vector<char> seen(nv_, 0);
      std::deque<int> queue{com.source};
      seen[com.source] = 1;
      while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int e = 0; e < inst_.edge_count(); ++e) {
          int ee = opt_.reverse_tiebreak ? inst_.edge_count() - 1 - e : e;
          const Edge& ed = inst_.edge(ee);
          if (ed.tail != v || seen[ed.head]) continue;
          seen[ed.head] = 1;
          parent[ed.head] = ee;
          queue.push_back(ed.head);
        }
      }
      if (!seen[com.target]) throw InternalError("validated commodity lost its path");
      for (int v = com.target; v != com.source;) {
        int e = parent[v];
        z_[var(i, copies_end(e) - 1)] += from_rational<T>(com.demand);
        v = inst_.edge(e).tail;
      }
    }
  }

  // Turn a feasible per-commodity edge flow into copy flows by filling the
  // pieces of each edge in order and splitting commodities proportionally.
  void load_start(const std::vector<std::vector<Rational>>& flow) {
    for (int e = 0; e < inst_.edge_count(); ++e) {
      Rational load;
      for (int i = 0; i < ni_; ++i) load += flow[i][e];
      if (load.is_zero()) continue;
      Rational remaining = load;
      for (int c = net_.first_copy[e]; c < copies_end(e) && remaining.sign() > 0; ++c) {
        Rational take = remaining;
        if (net_.copies[c].capacity && *net_.copies[c].capacity < take) {
          take = *net_.copies[c].capacity;
        }
        for (int i = 0; i < ni_; ++i) {
          z_[var(i, c)] = from_rational<T>(flow[i][e] * take / load);
        }
        remaining -= take;
      }
      if (remaining.sign() > 0) throw InternalError("start flow exceeds expansion capacity");
    }
  }

  // Direction toward the minimizer of the equality-constrained subproblem,
  // paired with a flag saying whether it reaches a minimizer (true) or is a
  // curvature-free descent ray (false). nullopt when the current point is
  // already stationary on the working set.
  std::optional<std::pair<std::vector<T>, bool>> eqp_direction() {
    std::vector<int> free_vars;
    for (int j = 0; j < n_; ++j) {
      if (!active_z_[j]) free_vars.push_back(j);
    }
    if (free_vars.empty()) return std::nullopt;
    int nf = static_cast<int>(free_vars.size());

    Mat<T> a;
    for (int i = 0; i < ni_; ++i) {
      for (int v = 0; v < nv_; ++v) {
        std::vector<T> row(nf, T(0));
        bool nonzero = false;
        for (int f = 0; f < nf; ++f) {
          int j = free_vars[f];
          if (j / nc_ != i) continue;
          const auto& copy = net_.copies[j % nc_];
          if (inst_.edge(copy.edge).tail == v) {
            row[f] += T(1);
            nonzero = true;
          }
          if (inst_.edge(copy.edge).head == v) {
            row[f] -= T(1);
            nonzero = true;
          }
        }
        if (nonzero) a.push_back(std::move(row));
      }
    }
    for (size_t r = 0; r < rows_.size(); ++r) {
      if (!active_row_[r]) continue;
      std::vector<T> row(nf, T(0));
      for (int f = 0; f < nf; ++f) row[f] = rows_[r].w[free_vars[f] % nc_];
      a.push_back(std::move(row));
    }

    Mat<T> basis = kernel_basis(a, nf);
    if (basis.empty()) return std::nullopt;
    int p = static_cast<int>(basis.size());

    // Load change of each copy along each basis direction.
    Mat<T> load_dir(p, std::vector<T>(nc_, T(0)));
    for (int b = 0; b < p; ++b) {
      for (int f = 0; f < nf; ++f) {
        if (!is_zero(basis[b][f])) load_dir[b][free_vars[f] % nc_] += basis[b][f];
      }
    }
    std::vector<T> grad(nc_, T(0));  // d(potential)/d(load) per copy
    for (int c = 0; c < nc_; ++c) {
      grad[c] = net_.copies[c].slope * copy_load(c) + net_.copies[c].offset;
    }

    Mat<T> h(p, std::vector<T>(p, T(0)));
    std::vector<T> g(p, T(0));
    for (int b = 0; b < p; ++b) {
      for (int c = 0; c < nc_; ++c) {
        if (is_zero(load_dir[b][c])) continue;
        g[b] += grad[c] * load_dir[b][c];
        for (int b2 = b; b2 < p; ++b2) {
          if (is_zero(load_dir[b2][c])) continue;
          h[b][b2] += net_.copies[c].slope * load_dir[b][c] * load_dir[b2][c];
        }
      }
    }
    for (int b = 0; b < p; ++b) {
      for (int b2 = 0; b2 < b; ++b2) h[b][b2] = h[b2][b];
    }

    std::vector<T> neg_g(p);
    for (int b = 0; b < p; ++b) neg_g[b] = -g[b];
    auto y = solve_affine(h, neg_g);
    std::vector<T> coef;
    bool to_minimizer = true;
    if (y) {
      coef = std::move(*y);
    } else {
      // Unbounded subproblem: descend along a curvature-free direction with
      // a nonzero linear term.
      Mat<T> hk = kernel_basis(h, p);
      coef.assign(p, T(0));
      bool found = false;
      for (const auto& k : hk) {
        T slope_term(0);
        for (int b = 0; b < p; ++b) slope_term += g[b] * k[b];
        int s = sign_of(slope_term);
        if (s == 0) continue;
        for (int b = 0; b < p; ++b) coef[b] = s > 0 ? -k[b] : k[b];
        found = true;
        break;
      }
      if (!found) throw InternalError("inconsistent stationarity system without descent");
      to_minimizer = false;
    }

    std::vector<T> dir(n_, T(0));
    bool moved = false;
    for (int f = 0; f < nf; ++f) {
      T d(0);
      for (int b = 0; b < p; ++b) {
        if (!is_zero(coef[b]) && !is_zero(basis[b][f])) d += coef[b] * basis[b][f];
      }
      if (!is_zero(d)) moved = true;
      dir[free_vars[f]] = std::move(d);
    }
    if (!moved) return std::nullopt;
    return std::make_pair(std::move(dir), to_minimizer);
  }

  void take_step(const std::vector<T>& dir, bool bounded) {
    std::optional<T> best;
    if (bounded) best = T(1);
    int blocker = -1;  // global index: z variables first, then n_ + row
    auto consider = [&](const T& cap, int gid) {
      if (!best || cap < *best) {
        best = cap;
        blocker = gid;
      } else if (cap == *best && blocker >= 0 && better_index(gid, blocker)) {
        blocker = gid;
      } else if (cap == *best && blocker < 0) {
        blocker = gid;
      }
    };
    for (int j = 0; j < n_; ++j) {
      if (active_z_[j] || sign_of(dir[j]) >= 0) continue;
      consider(z_[j] / -dir[j], j);
    }
    for (size_t r = 0; r < rows_.size(); ++r) {
      if (active_row_[r]) continue;
      T delta(0);
      for (int c = 0; c < nc_; ++c) {
        if (is_zero(rows_[r].w[c])) continue;
        for (int i = 0; i < ni_; ++i) {
          if (!is_zero(dir[var(i, c)])) delta += rows_[r].w[c] * dir[var(i, c)];
        }
      }
      if (sign_of(delta) <= 0) continue;
      T slack = rows_[r].rhs - row_activity(rows_[r]);
      consider(slack / delta, n_ + static_cast<int>(r));
    }
    if (!best) throw InternalError("unblocked descent ray in a bounded potential");

    const T& t = *best;
    if (sign_of(t) > 0) {
      for (int j = 0; j < n_; ++j) {
        if (!is_zero(dir[j])) z_[j] += t * dir[j];
      }
    }
    if (bounded && blocker < 0) return;  // reached the subproblem minimizer
    if (blocker < 0) throw InternalError("ray step without blocker");
    if (blocker < n_) {
      z_[blocker] = T(0);  // exact snap
      active_z_[blocker] = 1;
    } else {
      active_row_[blocker - n_] = 1;
    }
  }

  bool better_index(int candidate, int incumbent) const {
    if (incumbent < 0) return true;
    return opt_.reverse_tiebreak ? candidate > incumbent : candidate < incumbent;
  }

  // At a stationary point of the working set: recover multipliers, stop if
  // they certify optimality, otherwise drop one offending constraint.
  bool optimal_or_drop() {
    std::vector<int> free_vars;
    for (int j = 0; j < n_; ++j) {
      if (!active_z_[j]) free_vars.push_back(j);
    }
    std::vector<int> act_rows;
    for (size_t r = 0; r < rows_.size(); ++r) {
      if (active_row_[r]) act_rows.push_back(static_cast<int>(r));
    }
    int nf = static_cast<int>(free_vars.size());
    int nu = ni_ * nv_ + static_cast<int>(act_rows.size());

    Mat<T> a(nf, std::vector<T>(nu, T(0)));
    std::vector<T> b(nf, T(0));
    for (int f = 0; f < nf; ++f) {
      int j = free_vars[f];
      int i = j / nc_;
      const auto& copy = net_.copies[j % nc_];
      a[f][i * nv_ + inst_.edge(copy.edge).tail] += T(1);
      a[f][i * nv_ + inst_.edge(copy.edge).head] -= T(1);
      for (size_t rr = 0; rr < act_rows.size(); ++rr) {
        a[f][ni_ * nv_ + static_cast<int>(rr)] = -rows_[act_rows[rr]].w[j % nc_];
      }
      b[f] = net_.copies[j % nc_].slope * copy_load(j % nc_) + net_.copies[j % nc_].offset;
    }
    auto sol = solve_affine(a, b);
    if (!sol) throw InternalError("stationary point without multipliers");
    const std::vector<T>& nu_mu = *sol;

    capacity_duals_.assign(nc_, T(0));
    user_row_duals_.assign(opt_.rows.size(), T(0));
    node_duals_.assign(ni_, std::vector<T>(nv_, T(0)));
    for (int i = 0; i < ni_; ++i) {
      for (int v = 0; v < nv_; ++v) node_duals_[i][v] = -nu_mu[i * nv_ + v];
    }
    for (size_t rr = 0; rr < act_rows.size(); ++rr) {
      const Row& row = rows_[act_rows[rr]];
      if (row.capacity_copy >= 0) capacity_duals_[row.capacity_copy] = nu_mu[ni_ * nv_ + rr];
      if (row.user_index >= 0) user_row_duals_[row.user_index] = nu_mu[ni_ * nv_ + rr];
    }

    int drop = -1;
    for (int j = 0; j < n_; ++j) {
      if (!active_z_[j]) continue;
      int i = j / nc_;
      const auto& copy = net_.copies[j % nc_];
      T mu = copy.slope * copy_load(j % nc_) + copy.offset;
      mu -= nu_mu[i * nv_ + inst_.edge(copy.edge).tail];
      mu += nu_mu[i * nv_ + inst_.edge(copy.edge).head];
      for (size_t rr = 0; rr < act_rows.size(); ++rr) {
        if (!is_zero(rows_[act_rows[rr]].w[j % nc_])) {
          mu += nu_mu[ni_ * nv_ + rr] * rows_[act_rows[rr]].w[j % nc_];
        }
      }
      if (sign_of(mu) < 0 && (drop < 0 || better_index(j, drop))) drop = j;
    }
    for (size_t rr = 0; rr < act_rows.size(); ++rr) {
      if (sign_of(nu_mu[ni_ * nv_ + rr]) < 0) {
        int gid = n_ + act_rows[rr];
        if (drop < 0 || better_index(gid, drop)) drop = gid;
      }
    }
    if (drop < 0) return true;
    if (drop < n_) active_z_[drop] = 0;
    else active_row_[drop - n_] = 0;
    return false;
  }
};

}  // namespace

template <typename T>
QpResult<T> solve_expanded_qp(const Instance& instance, const ExpandedNetwork<T>& net,
                              const QpOptions& options) {
  for (const auto& copy : net.copies) {
    if (sign_of(copy.slope) <= 0) {
      throw InternalError("expanded copy without strictly increasing cost");
    }
  }
  ActiveSetQp<T> qp(instance, net, options);
  return qp.run();
}

template <typename T>
std::vector<std::vector<T>> collapse_flow(const Instance& instance,
                                          const ExpandedNetwork<T>& net,
                                          const QpResult<T>& qp) {
  int ni = instance.commodity_count();
  std::vector<std::vector<T>> flow(ni, std::vector<T>(instance.edge_count(), T(0)));
  for (size_t c = 0; c < net.copies.size(); ++c) {
    for (int i = 0; i < ni; ++i) flow[i][net.copies[c].edge] += qp.copy_flow[i][c];
  }
  // Fill order: a copy may carry flow only when every earlier copy of its
  // edge is saturated.
  for (int e = 0; e < instance.edge_count(); ++e) {
    int end = e + 1 < instance.edge_count() ? net.first_copy[e + 1]
                                            : static_cast<int>(net.copies.size());
    for (int c = end - 1; c > net.first_copy[e]; --c) {
      int prev = c - 1;
      T load(0);
      for (int i = 0; i < ni; ++i) load += qp.copy_flow[i][c];
      if (is_zero(load)) continue;
      T prev_load(0);
      for (int i = 0; i < ni; ++i) prev_load += qp.copy_flow[i][prev];
      if (!(prev_load == from_rational<T>(*net.copies[prev].capacity))) {
        throw InternalError("expansion fill order violated on edge " + instance.edge(e).id);
      }
    }
  }
  return flow;
}

template <typename T>
T typed_edge_cost(const Instance& instance, int e, const T& load,
                  const std::vector<T>& lambda, bool perturb) {
  const Edge& ed = instance.edge(e);
  int k = 0;
  for (size_t i = 1; i < ed.pieces.size(); ++i) {
    if (!(load < from_rational<T>(ed.pieces[i].breakpoint))) k = static_cast<int>(i);
  }
  T slope = from_rational<T>(ed.pieces[k].slope);
  for (size_t j = 0; j < lambda.size(); ++j) {
    slope += lambda[j] * from_rational<T>(ed.externality[j].gamma);
  }
  if (perturb) {
    if constexpr (std::is_same_v<T, EpsRational>) {
      slope += EpsRational::epsilon();
    } else {
      throw InternalError("perturbed cost requires the perturbation field");
    }
  }
  T cost = slope * load + from_rational<T>(ed.pieces[k].offset);
  for (size_t j = 0; j < lambda.size(); ++j) {
    cost += lambda[j] * from_rational<T>(ed.externality[j].g);
  }
  return cost;
}

template <typename T>
std::vector<std::vector<std::optional<T>>> shortest_potentials(
    const Instance& instance, const std::vector<T>& loads, const std::vector<T>& lambda,
    bool perturb) {
  std::vector<T> cost(instance.edge_count(), T(0));
  for (int e = 0; e < instance.edge_count(); ++e) {
    cost[e] = typed_edge_cost(instance, e, loads[e], lambda, perturb);
  }
  std::vector<std::vector<std::optional<T>>> dist(
      instance.commodity_count(),
      std::vector<std::optional<T>>(instance.node_count()));
  for (int i = 0; i < instance.commodity_count(); ++i) {
    auto& d = dist[i];
    d[instance.commodity(i).source] = T(0);
    for (int round = 0; round + 1 < instance.node_count(); ++round) {
      bool changed = false;
      for (int e = 0; e < instance.edge_count(); ++e) {
        const Edge& ed = instance.edge(e);
        if (!d[ed.tail]) continue;
        T candidate = *d[ed.tail] + cost[e];
        if (!d[ed.head] || candidate < *d[ed.head]) {
          d[ed.head] = std::move(candidate);
          changed = true;
        }
      }
      if (!changed) break;
    }
  }
  return dist;
}

namespace {

template <typename T>
EdgeState extract_state_typed(const Instance& instance, const std::vector<T>& loads,
                              const std::vector<std::vector<std::optional<T>>>& potentials,
                              const std::vector<T>& lambda, bool perturb) {
  EdgeState state;
  for (int i = 0; i < instance.commodity_count(); ++i) {
    for (int e = 0; e < instance.edge_count(); ++e) {
      const Edge& ed = instance.edge(e);
      const auto& dt = potentials[i][ed.tail];
      const auto& dh = potentials[i][ed.head];
      if (!dt || !dh) continue;
      if (*dt + typed_edge_cost(instance, e, loads[e], lambda, perturb) == *dh) {
        state.support.emplace_back(i, e);
      }
    }
  }
  state.parts.resize(instance.edge_count());
  for (int e = 0; e < instance.edge_count(); ++e) {
    const auto& pieces = instance.edge(e).pieces;
    int k = 0;
    for (size_t p = 1; p < pieces.size(); ++p) {
      if (!(loads[e] < from_rational<T>(pieces[p].breakpoint))) k = static_cast<int>(p);
    }
    state.parts[e] = k;
  }
  return state;
}

}  // namespace

template <typename T>
TypedEquilibrium<T> solve_equilibrium_typed(const Instance& instance,
                                            const std::vector<T>& lambda, bool perturb,
                                            bool reverse_tiebreak,
                                            const std::vector<std::vector<Rational>>* warm_start) {
  auto net = expand_network<T>(instance, lambda, perturb);
  QpOptions opt;
  opt.reverse_tiebreak = reverse_tiebreak;
  if (warm_start) opt.start = *warm_start;
  auto qp = solve_expanded_qp(instance, net, opt);
  TypedEquilibrium<T> res;
  res.flow = collapse_flow(instance, net, qp);
  res.loads.assign(instance.edge_count(), T(0));
  for (int e = 0; e < instance.edge_count(); ++e) {
    for (int i = 0; i < instance.commodity_count(); ++i) res.loads[e] += res.flow[i][e];
  }
  res.potentials = shortest_potentials(instance, res.loads, lambda, perturb);
  res.state = extract_state_typed(instance, res.loads, res.potentials, lambda, perturb);
  res.perturbed = perturb;
  return res;
}

namespace {

bool needs_perturbation(const Instance& instance, const std::vector<Rational>& lambda) {
  for (int e = 0; e < instance.edge_count(); ++e) {
    const Edge& ed = instance.edge(e);
    for (const auto& piece : ed.pieces) {
      Rational slope = piece.slope;
      for (size_t j = 0; j < lambda.size(); ++j) {
        slope += lambda[j] * ed.externality[j].gamma;
      }
      if (slope.is_zero()) return true;
    }
  }
  return false;
}

void validate_lambda(const Instance& instance, const std::vector<Rational>& lambda) {
  if (lambda.size() != static_cast<size_t>(instance.externality_count())) {
    throw ValidationError("lambda", "one price per externality class required");
  }
  for (const Rational& l : lambda) {
    if (l.sign() < 0) throw ValidationError("lambda", "prices must be >= 0");
  }
}

}  // namespace

EquilibriumResult solve_equilibrium(const Instance& instance,
                                    const std::vector<Rational>& lambda) {
  validate_lambda(instance, lambda);
  bool perturb = needs_perturbation(instance, lambda);

  std::vector<std::vector<Rational>> flow_values(
      instance.commodity_count(), std::vector<Rational>(instance.edge_count()));
  if (!perturb) {
    auto typed = solve_equilibrium_typed<Rational>(instance, lambda, false);
    flow_values = std::move(typed.flow);
  } else {
    std::vector<EpsRational> lam(lambda.begin(), lambda.end());
    auto typed = solve_equilibrium_typed<EpsRational>(instance, lam, true);
    for (int i = 0; i < instance.commodity_count(); ++i) {
      for (int e = 0; e < instance.edge_count(); ++e) {
        flow_values[i][e] = typed.flow[i][e].standard_part();
      }
    }
  }

  EquilibriumResult res{Flow::create(instance, std::move(flow_values)),
                        {},
                        lambda,
                        {},
                        perturb};
  res.potentials = shortest_potentials<Rational>(instance, res.flow.loads(), lambda, false);
  res.state = extract_state_typed<Rational>(instance, res.flow.loads(), res.potentials,
                                            lambda, false);

  // The returned pair (flow, potentials) must satisfy complementarity: every
  // flow-carrying edge lies tight under the shortest-path potentials.
  for (int i = 0; i < instance.commodity_count(); ++i) {
    for (int e = 0; e < instance.edge_count(); ++e) {
      if (res.flow.value(i, e).is_zero()) continue;
      const Edge& ed = instance.edge(e);
      const auto& dt = res.potentials[i][ed.tail];
      const auto& dh = res.potentials[i][ed.head];
      if (!dt || !dh ||
          !(*dt + edge_cost(instance, e, res.flow.load(e), lambda) == *dh)) {
        throw InternalError("equilibrium complementarity check failed on edge " + ed.id);
      }
    }
  }
  return res;
}

EdgeState extract_edge_state(const Instance& instance, const EquilibriumResult& result) {
  auto potentials =
      shortest_potentials<Rational>(instance, result.flow.loads(), result.lambda, false);
  return extract_state_typed<Rational>(instance, result.flow.loads(), potentials,
                                       result.lambda, false);
}

template ExpandedNetwork<Rational> expand_network(const Instance&, const std::vector<Rational>&, bool);
template ExpandedNetwork<EpsRational> expand_network(const Instance&, const std::vector<EpsRational>&, bool);
template QpResult<Rational> solve_expanded_qp(const Instance&, const ExpandedNetwork<Rational>&, const QpOptions&);
template QpResult<EpsRational> solve_expanded_qp(const Instance&, const ExpandedNetwork<EpsRational>&, const QpOptions&);
template std::vector<std::vector<Rational>> collapse_flow(const Instance&, const ExpandedNetwork<Rational>&, const QpResult<Rational>&);
template std::vector<std::vector<EpsRational>> collapse_flow(const Instance&, const ExpandedNetwork<EpsRational>&, const QpResult<EpsRational>&);
template Rational typed_edge_cost(const Instance&, int, const Rational&, const std::vector<Rational>&, bool);
template EpsRational typed_edge_cost(const Instance&, int, const EpsRational&, const std::vector<EpsRational>&, bool);
template std::vector<std::vector<std::optional<Rational>>> shortest_potentials(const Instance&, const std::vector<Rational>&, const std::vector<Rational>&, bool);
template std::vector<std::vector<std::optional<EpsRational>>> shortest_potentials(const Instance&, const std::vector<EpsRational>&, const std::vector<EpsRational>&, bool);
template TypedEquilibrium<Rational> solve_equilibrium_typed(const Instance&, const std::vector<Rational>&, bool, bool, const std::vector<std::vector<Rational>>*);
template TypedEquilibrium<EpsRational> solve_equilibrium_typed(const Instance&, const std::vector<EpsRational>&, bool, bool, const std::vector<std::vector<Rational>>*);

}  // namespace tollcast
