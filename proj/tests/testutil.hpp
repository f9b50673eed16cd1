#pragma once

// Shared helpers for the unit and acceptance suites: fixture instances,
// random generators, and independent (solver-free) verification of LP
// outcomes. Everything here is deliberately written against the public
// surface only, so the checks stay independent of solver internals.

#include <random>
#include <vector>

#include "tollcast/lp.hpp"
#include "tollcast/model.hpp"
#include "tollcast/rational.hpp"

namespace testutil {

using namespace tollcast;

inline Rational Q(const char* s) {
  auto r = Rational::parse(s);
  if (!r) throw std::runtime_error(std::string("bad rational literal: ") + s);
  return *r;
}

inline Edge make_edge(std::string id, int tail, int head,
                      std::vector<CostPiece> pieces, std::vector<ExternalityCoef> ext) {
  Edge e;
  e.id = std::move(id);
  e.tail = tail;
  e.head = head;
  e.pieces = std::move(pieces);
  e.externality = std::move(ext);
  return e;
}

// Two parallel edges s->t: e1 with tau = x and one externality unit per
// flow unit, e2 with tau = 1 + x and no externality. Demand 1.
inline Instance pigou() {
  return Instance::create(
      {"s", "t"}, {"co2"},
      {make_edge("e1", 0, 1, {{0, 1, 0}}, {{1, 0}}),
       make_edge("e2", 0, 1, {{0, 1, 1}}, {{0, 0}})},
      {Commodity{0, 1, 1}});
}

// Same shape with flat slopes 1/100; minimal externality budget is 0.
inline Instance f1() {
  return Instance::create(
      {"s", "t"}, {"co2"},
      {make_edge("e1", 0, 1, {{0, Q("1/100"), 0}}, {{1, 0}}),
       make_edge("e2", 0, 1, {{0, Q("1/100"), 1}}, {{0, 0}})},
      {Commodity{0, 1, 1}});
}

// Two parallel constant-time edges: free but dirty vs slow but clean.
inline Instance fig1() {
  return Instance::create(
      {"s", "t"}, {"co2"},
      {make_edge("e1", 0, 1, {{0, 0, 0}}, {{1, 0}}),
       make_edge("e2", 0, 1, {{0, 0, 1}}, {{0, 0}})},
      {Commodity{0, 1, 1}});
}

// fig1 with the externality zeroed out on e1 as well.
inline Instance fig1_zero_g() {
  return Instance::create(
      {"s", "t"}, {"co2"},
      {make_edge("e1", 0, 1, {{0, 0, 0}}, {{0, 0}}),
       make_edge("e2", 0, 1, {{0, 0, 1}}, {{0, 0}})},
      {Commodity{0, 1, 1}});
}

// Braess-style diamond with load-dependent externalities on the s->v and
// w->t edges; demand 2. Edge order: sv, sw, vw, vt, wt.
inline Instance braess() {
  return Instance::create(
      {"s", "v", "w", "t"}, {"co2"},
      {make_edge("sv", 0, 1, {{0, 0, 0}}, {{0, 1}}),
       make_edge("sw", 0, 2, {{0, 0, 0}}, {{Q("5/2"), 0}}),
       make_edge("vw", 1, 2, {{0, 0, Q("1/4")}}, {{0, 0}}),
       make_edge("vt", 1, 3, {{0, 0, 0}}, {{Q("5/2"), 0}}),
       make_edge("wt", 2, 3, {{0, 0, 0}}, {{0, 1}})},
      {Commodity{0, 3, 2}});
}

// Single edge s->t, tau = 2x, externality 2 per unit, demand 3.
inline Instance t1(Rational g = 2, Rational demand = 3) {
  return Instance::create(
      {"s", "t"}, {"co2"},
      {make_edge("e", 0, 1, {{0, 2, 0}}, {{g, 0}})},
      {Commodity{0, 1, demand}});
}

// Two disjoint parallel pairs; the second pair is shifted so its flow stays
// interior up to lambda = 4. Expected curve breakpoints: 0, 2, 4.
inline Instance two_commodity() {
  return Instance::create(
      {"s1", "t1", "s2", "t2"}, {"co2"},
      {make_edge("a1", 0, 1, {{0, 1, 0}}, {{1, 0}}),
       make_edge("a2", 0, 1, {{0, 1, 1}}, {{0, 0}}),
       make_edge("b1", 2, 3, {{0, 1, 0}}, {{1, 0}}),
       make_edge("b2", 2, 3, {{0, 1, 2}}, {{0, 0}})},
      {Commodity{0, 1, 1}, Commodity{2, 3, 2}});
}

// Two parallel edges with tau = x each and unit externalities in two
// distinct classes; demand 1.
inline Instance two_class() {
  return Instance::create(
      {"s", "t"}, {"nox", "pm"},
      {make_edge("e1", 0, 1, {{0, 1, 0}}, {{1, 0}, {0, 0}}),
       make_edge("e2", 0, 1, {{0, 1, 0}}, {{0, 0}, {1, 0}})},
      {Commodity{0, 1, 1}});
}

// ---------------------------------------------------------------------------
// Independent LP outcome verification (mirrors the definitions, not the
// solver).

template <typename T>
bool lp_point_feasible(const LinearProgram<T>& lp, const std::vector<T>& x) {
  for (int j = 0; j < lp.variable_count(); ++j) {
    if (lp.lower[j] && x[j] < *lp.lower[j]) return false;
    if (lp.upper[j] && *lp.upper[j] < x[j]) return false;
  }
  for (const auto& row : lp.rows) {
    T act(0);
    for (const auto& [j, c] : row.coeffs) act += c * x[j];
    if (row.sense == RowSense::eq && !(act == row.rhs)) return false;
    if (row.sense == RowSense::le && row.rhs < act) return false;
    if (row.sense == RowSense::ge && act < row.rhs) return false;
  }
  return true;
}

template <typename T>
bool lp_optimal_certified(const LinearProgram<T>& lp, const LpOptimal<T>& opt) {
  if (!lp_point_feasible(lp, opt.primal)) return false;
  bool maximize = lp.sense == ObjSense::maximize;
  // Recompute objective.
  T obj(0);
  for (int j = 0; j < lp.variable_count(); ++j) obj += lp.objective[j] * opt.primal[j];
  if (!(obj == opt.objective)) return false;
  // Dual feasibility, stationarity, and complementary slackness; together
  // with primal feasibility these certify optimality (and imply strong
  // duality).
  T dual_obj(0);
  for (size_t r = 0; r < lp.rows.size(); ++r) {
    const auto& row = lp.rows[r];
    const T& y = opt.row_duals[r];
    int ys = y < T(0) ? -1 : (T(0) < y ? 1 : 0);
    int want = maximize ? -1 : 1;
    if (row.sense == RowSense::ge && ys * want < 0) return false;
    if (row.sense == RowSense::le && ys * want > 0) return false;
    T act(0);
    for (const auto& [j, c] : row.coeffs) act += c * opt.primal[j];
    if (ys != 0 && !(act == row.rhs)) return false;
    dual_obj += y * row.rhs;
  }
  for (int j = 0; j < lp.variable_count(); ++j) {
    T resid = lp.objective[j];
    for (size_t r = 0; r < lp.rows.size(); ++r) {
      for (const auto& [jj, c] : lp.rows[r].coeffs) {
        if (jj == j) resid -= opt.row_duals[r] * c;
      }
    }
    if (!(resid == opt.reduced_costs[j])) return false;
    const T& d = opt.reduced_costs[j];
    int ds = d < T(0) ? -1 : (T(0) < d ? 1 : 0);
    int eff = maximize ? -ds : ds;
    bool at_lo = lp.lower[j] && opt.primal[j] == *lp.lower[j];
    bool at_hi = lp.upper[j] && opt.primal[j] == *lp.upper[j];
    if (ds != 0) {
      if (at_lo && at_hi) {
        // fixed variable, any multiplier
      } else if (at_lo) {
        if (eff < 0) return false;
      } else if (at_hi) {
        if (eff > 0) return false;
      } else {
        return false;
      }
    }
    // Bound contribution to the dual objective.
    if (at_lo && !at_hi) dual_obj += d * *lp.lower[j];
    else if (at_hi && !at_lo) dual_obj += d * *lp.upper[j];
    else if (at_lo && at_hi) dual_obj += d * *lp.lower[j];
  }
  // Exact strong duality.
  return dual_obj == opt.objective;
}

template <typename T>
bool lp_farkas_certified(const LinearProgram<T>& lp, const LpInfeasible<T>& inf) {
  const auto& y = inf.farkas;
  T rhs(0);
  for (size_t r = 0; r < lp.rows.size(); ++r) {
    int ys = y[r] < T(0) ? -1 : (T(0) < y[r] ? 1 : 0);
    if (lp.rows[r].sense == RowSense::le && ys > 0) return false;
    if (lp.rows[r].sense == RowSense::ge && ys < 0) return false;
    rhs += y[r] * lp.rows[r].rhs;
  }
  std::vector<T> coef(lp.variable_count(), T(0));
  for (size_t r = 0; r < lp.rows.size(); ++r) {
    for (const auto& [j, c] : lp.rows[r].coeffs) coef[j] += y[r] * c;
  }
  T sup(0);
  for (int j = 0; j < lp.variable_count(); ++j) {
    if (T(0) < coef[j]) {
      if (!lp.upper[j]) return false;
      sup += coef[j] * *lp.upper[j];
    } else if (coef[j] < T(0)) {
      if (!lp.lower[j]) return false;
      sup += coef[j] * *lp.lower[j];
    }
  }
  return sup < rhs;
}

template <typename T>
bool lp_ray_certified(const LinearProgram<T>& lp, const LpUnbounded<T>& unb) {
  if (!lp_point_feasible(lp, unb.point)) return false;
  bool any = false;
  for (const T& v : unb.ray) any = any || !(v == T(0));
  if (!any) return false;
  for (int j = 0; j < lp.variable_count(); ++j) {
    if (unb.ray[j] < T(0) && lp.lower[j]) return false;
    if (T(0) < unb.ray[j] && lp.upper[j]) return false;
  }
  for (const auto& row : lp.rows) {
    T delta(0);
    for (const auto& [j, c] : row.coeffs) delta += c * unb.ray[j];
    if (row.sense == RowSense::eq && !(delta == T(0))) return false;
    if (row.sense == RowSense::le && T(0) < delta) return false;
    if (row.sense == RowSense::ge && delta < T(0)) return false;
  }
  T improve(0);
  for (int j = 0; j < lp.variable_count(); ++j) improve += lp.objective[j] * unb.ray[j];
  return lp.sense == ObjSense::maximize ? T(0) < improve : improve < T(0);
}

// ---------------------------------------------------------------------------
// Random generators.

inline Rational random_rational(std::mt19937_64& rng, long lo, long hi, long max_den = 4) {
  std::uniform_int_distribution<long> num(lo, hi);
  std::uniform_int_distribution<long> den(1, max_den);
  return Rational(num(rng), den(rng));
}

inline LinearProgram<Rational> random_lp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nvar(1, 5);
  std::uniform_int_distribution<int> nrow(0, 5);
  std::uniform_int_distribution<int> coin(0, 3);
  LinearProgram<Rational> lp;
  lp.sense = coin(rng) % 2 == 0 ? ObjSense::minimize : ObjSense::maximize;
  int n = nvar(rng);
  for (int j = 0; j < n; ++j) {
    std::optional<Rational> lo, hi;
    int kind = coin(rng);
    if (kind == 0) {
      lo = random_rational(rng, -3, 0);
      hi = *lo + random_rational(rng, 0, 5);
    } else if (kind == 1) {
      lo = Rational(0);
    } else if (kind == 2) {
      hi = random_rational(rng, 0, 4);
    }  // kind == 3: free
    lp.add_variable(lo, hi, random_rational(rng, -4, 4));
  }
  int m = nrow(rng);
  for (int r = 0; r < m; ++r) {
    std::vector<std::pair<int, Rational>> coeffs;
    for (int j = 0; j < n; ++j) {
      if (coin(rng) != 0) coeffs.emplace_back(j, random_rational(rng, -3, 3));
    }
    RowSense s = coin(rng) == 0 ? RowSense::eq : (coin(rng) % 2 == 0 ? RowSense::le : RowSense::ge);
    lp.add_row(std::move(coeffs), s, random_rational(rng, -4, 4));
  }
  return lp;
}

// Random constant-externality instance. Nodes form a spine so every
// commodity has a path; extra edges are sprinkled on top. Strictly
// increasing by default; `flat_pieces` mixes in zero-slope pieces.
inline Instance random_instance(std::mt19937_64& rng, int max_nodes = 6, int max_edges = 10,
                                int max_commodities = 2, int max_pieces = 3,
                                bool flat_pieces = false) {
  std::uniform_int_distribution<int> nnode(2, max_nodes);
  int n = nnode(rng);
  std::vector<std::string> nodes;
  for (int v = 0; v < n; ++v) nodes.push_back("n" + std::to_string(v));

  std::uniform_int_distribution<int> nedge(n - 1, max_edges);
  int m = nedge(rng);
  std::uniform_int_distribution<int> npieces(1, max_pieces);
  std::uniform_int_distribution<int> anynode(0, n - 1);
  std::uniform_int_distribution<long> gpick(0, 3);

  std::vector<Edge> edges;
  auto pick_slope = [&]() {
    if (flat_pieces && gpick(rng) <= 1) return Rational(0);
    return random_rational(rng, 1, 3, 2);
  };
  auto add_edge = [&](int tail, int head, int idx) {
    int pieces = npieces(rng);
    std::vector<CostPiece> ps;
    Rational slope = pick_slope();
    Rational offset = random_rational(rng, 0, 3, 2);
    Rational breakpoint = 0;
    for (int k = 0; k < pieces; ++k) {
      if (k > 0) {
        Rational next_bp = breakpoint + random_rational(rng, 1, 2, 2);
        Rational value_at = slope * next_bp + offset;
        slope = pick_slope();
        offset = value_at - slope * next_bp;  // keep the function continuous
        breakpoint = next_bp;
      }
      ps.push_back({breakpoint, slope, offset});
    }
    Rational g(gpick(rng), gpick(rng) + 1);
    edges.push_back(make_edge("e" + std::to_string(idx), tail, head, std::move(ps), {{g, 0}}));
  };
  for (int v = 0; v + 1 < n; ++v) add_edge(v, v + 1, static_cast<int>(edges.size()));
  while (static_cast<int>(edges.size()) < m) {
    int a = anynode(rng), b = anynode(rng);
    if (a == b) continue;
    add_edge(a, b, static_cast<int>(edges.size()));
  }

  std::uniform_int_distribution<int> ncomm(1, max_commodities);
  int k = ncomm(rng);
  std::vector<Commodity> comms;
  for (int i = 0; i < k; ++i) {
    int a = anynode(rng), b = anynode(rng);
    if (a >= b) {
      a = 0;
      b = n - 1;
    }
    comms.push_back(Commodity{a, b, random_rational(rng, 1, 3, 2)});
  }
  return Instance::create(std::move(nodes), {"co2"}, std::move(edges), std::move(comms));
}

}  // namespace testutil
