#include "tollcast/curve.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "tollcast/curve_internal.hpp"
#include "tollcast/errors.hpp"

namespace tollcast {

namespace detail {

template <typename T>
StateLp<T> build_state_lp(const Instance& inst, const EdgeState& state, bool perturb,
                          ObjSense sense) {
  int ne = inst.edge_count();
  int ni = inst.commodity_count();
  int nv = inst.node_count();
  StateLp<T> out;
  LinearProgram<T>& lp = out.lp;
  lp.sense = sense;

  std::vector<std::vector<char>> in_support(ni, std::vector<char>(ne, 0));
  for (auto [i, e] : state.support) in_support[i][e] = 1;

  // Flow variables, pinned to zero off the support.
  for (int i = 0; i < ni; ++i) {
    for (int e = 0; e < ne; ++e) {
      lp.add_variable(T(0), in_support[i][e] ? std::optional<T>() : std::optional<T>(T(0)));
    }
  }
  out.pi0 = lp.variable_count();
  for (int i = 0; i < ni * nv; ++i) lp.add_variable(std::nullopt, std::nullopt);
  out.lambda_var = lp.add_variable(T(0), std::nullopt, T(1));

  auto xvar = [&](int i, int e) { return i * ne + e; };
  auto pivar = [&](int i, int v) { return out.pi0 + i * nv + v; };

  // Potential rows: tight on the support, dominated elsewhere.
  for (int i = 0; i < ni; ++i) {
    for (int e = 0; e < ne; ++e) {
      const Edge& ed = inst.edge(e);
      const CostPiece& piece = ed.pieces[state.parts[e]];
      T slope = from_rational<T>(piece.slope);
      if (perturb) {
        if constexpr (std::is_same_v<T, EpsRational>) {
          slope += EpsRational::epsilon();
        } else {
          throw InternalError("perturbed regime program requires the perturbation field");
        }
      }
      std::vector<std::pair<int, T>> coeffs;
      coeffs.emplace_back(pivar(i, ed.head), T(1));
      coeffs.emplace_back(pivar(i, ed.tail), T(-1));
      for (int ii = 0; ii < ni; ++ii) coeffs.emplace_back(xvar(ii, e), -slope);
      coeffs.emplace_back(out.lambda_var, -from_rational<T>(ed.externality[0].g));
      lp.add_row(std::move(coeffs), in_support[i][e] ? RowSense::eq : RowSense::le,
                 from_rational<T>(piece.offset));
    }
  }
  // Load boxed into the active piece.
  for (int e = 0; e < ne; ++e) {
    const auto& pieces = inst.edge(e).pieces;
    int part = state.parts[e];
    std::vector<std::pair<int, T>> coeffs;
    for (int i = 0; i < ni; ++i) coeffs.emplace_back(xvar(i, e), T(1));
    lp.add_row(coeffs, RowSense::ge, from_rational<T>(pieces[part].breakpoint));
    if (part + 1 < static_cast<int>(pieces.size())) {
      lp.add_row(std::move(coeffs), RowSense::le,
                 from_rational<T>(pieces[part + 1].breakpoint));
    }
  }
  // Conservation.
  for (int i = 0; i < ni; ++i) {
    const Commodity& com = inst.commodity(i);
    for (int v = 0; v < nv; ++v) {
      std::vector<std::pair<int, T>> coeffs;
      for (int e = 0; e < ne; ++e) {
        if (inst.edge(e).tail == v) coeffs.emplace_back(xvar(i, e), T(1));
        if (inst.edge(e).head == v) coeffs.emplace_back(xvar(i, e), T(-1));
      }
      T rhs(0);
      if (v == com.source) rhs = from_rational<T>(com.demand);
      if (v == com.target) rhs = -from_rational<T>(com.demand);
      lp.add_row(std::move(coeffs), RowSense::eq, std::move(rhs));
    }
  }
  return out;
}

namespace {

template <typename T>
std::vector<std::vector<T>> decode_flow(const Instance& inst, const std::vector<T>& primal) {
  std::vector<std::vector<T>> flow(inst.commodity_count(),
                                   std::vector<T>(inst.edge_count(), T(0)));
  for (int i = 0; i < inst.commodity_count(); ++i) {
    for (int e = 0; e < inst.edge_count(); ++e) flow[i][e] = primal[i * inst.edge_count() + e];
  }
  return flow;
}

}  // namespace

template <typename T>
std::optional<TInterval<T>> state_interval_typed(const Instance& inst, const EdgeState& state,
                                                 bool perturb) {
  auto max_lp = build_state_lp<T>(inst, state, perturb, ObjSense::maximize);
  auto max_out = solve_lp(max_lp.lp);
  if (max_out.is_infeasible()) return std::nullopt;

  TInterval<T> ti;
  ti.state = state;
  if (max_out.is_optimal()) {
    ti.hi = max_out.optimal().primal[max_lp.lambda_var];
    ti.flow_hi = decode_flow(inst, max_out.optimal().primal);
  } else {
    const auto& unb = max_out.unbounded();
    T dl = unb.ray[max_lp.lambda_var];
    if (!(sign_of(dl) > 0)) throw InternalError("price ray without increasing price");
    ti.ray.assign(inst.commodity_count(), std::vector<T>(inst.edge_count(), T(0)));
    for (int i = 0; i < inst.commodity_count(); ++i) {
      for (int e = 0; e < inst.edge_count(); ++e) {
        ti.ray[i][e] = unb.ray[i * inst.edge_count() + e] / dl;
      }
    }
  }

  auto min_lp = build_state_lp<T>(inst, state, perturb, ObjSense::minimize);
  auto min_out = solve_lp(min_lp.lp);
  if (!min_out.is_optimal()) throw InternalError("bounded regime program did not solve");
  ti.lo = min_out.optimal().primal[min_lp.lambda_var];
  ti.flow_lo = decode_flow(inst, min_out.optimal().primal);
  return ti;
}

template <typename T>
TInterval<T> segment_at(const Instance& inst, const T& lambda, bool perturb,
                        const std::vector<std::vector<Rational>>* warm) {
  auto eq = solve_equilibrium_typed<T>(inst, std::vector<T>{lambda}, perturb, false, warm);
  auto ti = state_interval_typed<T>(inst, eq.state, perturb);
  if (!ti) throw InternalError("observed state has an empty regime interval");
  return std::move(*ti);
}

bool commodity_externality_is_fixed(const Instance& inst, int commodity) {
  int nv = inst.node_count();
  const Commodity& com = inst.commodity(commodity);
  auto reach = [&](int start, bool forward) {
    std::vector<char> seen(nv, 0);
    seen[start] = 1;
    std::deque<int> queue{start};
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int e = 0; e < inst.edge_count(); ++e) {
        int from = forward ? inst.edge(e).tail : inst.edge(e).head;
        int to = forward ? inst.edge(e).head : inst.edge(e).tail;
        if (from == v && !seen[to]) {
          seen[to] = 1;
          queue.push_back(to);
        }
      }
    }
    return seen;
  };
  auto from_s = reach(com.source, true);
  auto to_t = reach(com.target, false);
  // Potential labelling over edges on some source->target route: consistent
  // iff every route induces the same total externality.
  std::vector<std::optional<Rational>> label(nv);
  label[com.source] = Rational(0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int e = 0; e < inst.edge_count(); ++e) {
      const Edge& ed = inst.edge(e);
      if (!from_s[ed.tail] || !to_t[ed.head]) continue;
      if (!label[ed.tail]) continue;
      Rational cand = *label[ed.tail] + ed.externality[0].g;
      if (!label[ed.head]) {
        label[ed.head] = cand;
        changed = true;
      } else if (!(*label[ed.head] == cand)) {
        return false;
      }
    }
  }
  return true;
}

Rational externality_denominator_scale(const Instance& inst) {
  mpz_class l(1);
  for (int e = 0; e < inst.edge_count(); ++e) {
    mpz_class d = inst.edge(e).externality[0].g.denominator();
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
  }
  return Rational(l);
}

template <typename T>
T lambda_max_typed(const Instance& inst, bool perturb) {
  bool all_fixed = true;
  for (int i = 0; i < inst.commodity_count() && all_fixed; ++i) {
    all_fixed = commodity_externality_is_fixed(inst, i);
  }
  if (all_fixed) return T(0);
  T demand = from_rational<T>(inst.total_demand());
  std::vector<T> zero_lambda(inst.externality_count(), T(0));
  T sum(0);
  for (int e = 0; e < inst.edge_count(); ++e) {
    sum += typed_edge_cost(inst, e, demand, zero_lambda, perturb);
  }
  return from_rational<T>(externality_denominator_scale(inst)) * sum + T(1);
}

template StateLp<Rational> build_state_lp(const Instance&, const EdgeState&, bool, ObjSense);
template StateLp<EpsRational> build_state_lp(const Instance&, const EdgeState&, bool, ObjSense);
template std::optional<TInterval<Rational>> state_interval_typed(const Instance&, const EdgeState&, bool);
template std::optional<TInterval<EpsRational>> state_interval_typed(const Instance&, const EdgeState&, bool);
template TInterval<Rational> segment_at(const Instance&, const Rational&, bool, const std::vector<std::vector<Rational>>*);
template TInterval<EpsRational> segment_at(const Instance&, const EpsRational&, bool, const std::vector<std::vector<Rational>>*);
template Rational lambda_max_typed<Rational>(const Instance&, bool);
template EpsRational lambda_max_typed<EpsRational>(const Instance&, bool);

}  // namespace detail

namespace {

void require_tractable_externality(const Instance& inst, const char* what) {
  if (inst.externality_count() != 1) {
    throw UnsupportedExternalityError(std::string(what) +
                                      " requires exactly one externality class");
  }
  if (inst.has_affine_externality()) {
    throw UnsupportedExternalityError(std::string(what) +
                                      " requires constant externality coefficients");
  }
}

void validate_state_shape(const Instance& inst, const EdgeState& state) {
  if (state.parts.size() != static_cast<size_t>(inst.edge_count())) {
    throw ValidationError("state.parts", "one active piece per edge required");
  }
  for (int e = 0; e < inst.edge_count(); ++e) {
    if (state.parts[e] < 0 || state.parts[e] >= inst.piece_count()) {
      throw ValidationError("state.parts", "piece index out of range");
    }
  }
  for (auto [i, e] : state.support) {
    if (i < 0 || i >= inst.commodity_count() || e < 0 || e >= inst.edge_count()) {
      throw ValidationError("state.support", "support pair out of range");
    }
  }
}

template <typename T>
struct TracedCurve {
  std::vector<detail::TInterval<T>> intervals;  // sorted, chained, last unbounded
  long states = 0;
};

template <typename T>
TracedCurve<T> trace_typed(const Instance& inst, bool perturb) {
  std::map<EdgeState, detail::TInterval<T>> found;
  // Regime count bound: supports times piece assignments.
  mpz_class state_bound(1);
  mpz_mul_2exp(state_bound.get_mpz_t(), state_bound.get_mpz_t(),
               static_cast<mp_bitcnt_t>(inst.commodity_count()) *
                   static_cast<mp_bitcnt_t>(inst.edge_count()));
  for (int e = 0; e < inst.edge_count(); ++e) state_bound *= inst.piece_count();

  std::vector<std::vector<Rational>> warm;
  bool have_warm = false;
  auto probe = [&](const T& lam) -> const detail::TInterval<T>& {
    auto eq = solve_equilibrium_typed<T>(inst, std::vector<T>{lam}, perturb, false,
                                         have_warm ? &warm : nullptr);
    warm.assign(inst.commodity_count(), std::vector<Rational>(inst.edge_count()));
    for (int i = 0; i < inst.commodity_count(); ++i) {
      for (int e = 0; e < inst.edge_count(); ++e) warm[i][e] = standard_part(eq.flow[i][e]);
    }
    have_warm = true;
    auto it = found.find(eq.state);
    if (it != found.end()) return it->second;
    if (mpz_class(static_cast<long>(found.size())) >= state_bound) {
      throw InternalError("state discovery exceeded the regime-count bound");
    }
    auto ti = detail::state_interval_typed<T>(inst, eq.state, perturb);
    if (!ti) throw InternalError("observed state has an empty regime interval");
    if (lam < ti->lo || (ti->hi && *ti->hi < lam)) {
      throw InternalError("regime interval does not contain its witness price");
    }
    return found.emplace(eq.state, std::move(*ti)).first->second;
  };

  // Bisect gaps left to right; every probe lands in uncovered territory and
  // discovers a new state.
  std::function<void(const T&, const T&)> close_gap = [&](const T& a, const T& b) {
    if (!(a < b)) return;
    T mid = (a + b) / T(2);
    const auto& ti = probe(mid);
    T lo = ti.lo;
    std::optional<T> hi = ti.hi;
    close_gap(a, lo);
    if (hi) close_gap(*hi, b);
  };

  T lam_max = detail::lambda_max_typed<T>(inst, perturb);
  probe(T(0));
  probe(lam_max);
  for (int guard = 0;; ++guard) {
    if (guard > 4096) throw InternalError("curve chaining did not converge");
    std::vector<const detail::TInterval<T>*> sorted;
    sorted.reserve(found.size());
    for (const auto& [st, ti] : found) sorted.push_back(&ti);
    std::sort(sorted.begin(), sorted.end(), [](const auto* x, const auto* y) {
      if (x->lo < y->lo) return true;
      if (y->lo < x->lo) return false;
      bool x_unbounded = !x->hi.has_value(), y_unbounded = !y->hi.has_value();
      if (x_unbounded != y_unbounded) return y_unbounded;
      if (x->hi && y->hi && !(*x->hi == *y->hi)) return *x->hi < *y->hi;
      return x->state < y->state;
    });
    std::optional<std::pair<T, T>> gap;
    for (size_t k = 0; k + 1 < sorted.size() && !gap; ++k) {
      if (sorted[k]->hi && *sorted[k]->hi < sorted[k + 1]->lo) {
        gap = std::make_pair(*sorted[k]->hi, sorted[k + 1]->lo);
      }
    }
    if (gap) {
      close_gap(gap->first, gap->second);
      continue;
    }
    if (!sorted.back()->hi) {
      TracedCurve<T> out;
      out.states = static_cast<long>(found.size());
      for (const auto* p : sorted) out.intervals.push_back(*p);
      return out;
    }
    // The rightmost known regime is still bounded: probe past it.
    probe(*sorted.back()->hi + T(1));
  }
}

template <typename T>
EquilibriumCurve assemble_curve(const Instance& inst, const TracedCurve<T>& traced,
                                bool perturb) {
  auto project_flow = [&](const std::vector<std::vector<T>>& f) {
    std::vector<std::vector<Rational>> values(inst.commodity_count(),
                                              std::vector<Rational>(inst.edge_count()));
    for (int i = 0; i < inst.commodity_count(); ++i) {
      for (int e = 0; e < inst.edge_count(); ++e) values[i][e] = standard_part(f[i][e]);
    }
    return values;
  };

  EquilibriumCurve curve{inst, {}, {}, {}, perturb, traced.states};
  std::map<Rational, std::vector<std::vector<Rational>>> bp;
  std::optional<CurveSegment> terminal_seg;
  for (const auto& ti : traced.intervals) {
    Rational lo = standard_part(ti.lo);
    auto flow_lo = project_flow(ti.flow_lo);
    bp.emplace(lo, flow_lo);  // keeps an already-recorded flow for this price
    if (ti.hi) {
      Rational hi = standard_part(*ti.hi);
      auto flow_hi = project_flow(ti.flow_hi);
      bp[hi] = flow_hi;  // the breakpoint flow comes from the left regime's max
      if (lo < hi) {
        curve.segments.push_back(
            CurveSegment{ti.state, lo, hi, std::move(flow_lo), std::move(flow_hi), {}});
      }
    } else {
      CurveSegment seg{ti.state, lo, std::nullopt, flow_lo, {}, project_flow(ti.ray)};
      curve.terminal =
          EquilibriumCurve::Terminal{lo, Flow::create(inst, flow_lo), seg.ray};
      terminal_seg = std::move(seg);
    }
  }
  if (!terminal_seg) throw InternalError("traced curve without a terminal regime");
  curve.segments.push_back(std::move(*terminal_seg));
  for (auto& [lam, values] : bp) {
    curve.breakpoints.emplace_back(lam, Flow::create(inst, values));
  }
  return curve;
}

}  // namespace

StateIntervalOutcome state_interval(const Instance& inst, const EdgeState& state,
                                    ObjSense sense) {
  require_tractable_externality(inst, "regime interval computation");
  validate_state_shape(inst, state);
  auto lp = detail::build_state_lp<Rational>(inst, state, false, sense);
  auto out = solve_lp(lp.lp);
  StateIntervalOutcome res;
  if (out.is_infeasible()) {
    res.kind = StateIntervalOutcome::Kind::infeasible;
    return res;
  }
  auto decode = [&](const std::vector<Rational>& primal) {
    std::vector<std::vector<Rational>> values(inst.commodity_count(),
                                              std::vector<Rational>(inst.edge_count()));
    for (int i = 0; i < inst.commodity_count(); ++i) {
      for (int e = 0; e < inst.edge_count(); ++e) {
        values[i][e] = primal[i * inst.edge_count() + e];
      }
    }
    return values;
  };
  if (out.is_optimal()) {
    res.kind = StateIntervalOutcome::Kind::optimal;
    res.lambda = out.optimal().primal[lp.lambda_var];
    res.flow = Flow::create(inst, decode(out.optimal().primal));
    return res;
  }
  const auto& unb = out.unbounded();
  res.kind = StateIntervalOutcome::Kind::unbounded;
  res.base_lambda = unb.point[lp.lambda_var];
  res.base_flow = Flow::create(inst, decode(unb.point));
  Rational dl = unb.ray[lp.lambda_var];
  if (!(dl.sign() > 0)) throw InternalError("price ray without increasing price");
  res.flow_ray.assign(inst.commodity_count(), std::vector<Rational>(inst.edge_count()));
  for (int i = 0; i < inst.commodity_count(); ++i) {
    for (int e = 0; e < inst.edge_count(); ++e) {
      res.flow_ray[i][e] = unb.ray[i * inst.edge_count() + e] / dl;
    }
  }
  return res;
}

Rational lambda_max(const Instance& inst) {
  require_tractable_externality(inst, "breakpoint bound");
  return detail::lambda_max_typed<Rational>(inst, false);
}

EquilibriumCurve trace_curve(const Instance& inst) {
  require_tractable_externality(inst, "curve tracing");
  bool perturb = !inst.strictly_increasing();
  if (!perturb) {
    return assemble_curve<Rational>(inst, trace_typed<Rational>(inst, false), false);
  }
  return assemble_curve<EpsRational>(inst, trace_typed<EpsRational>(inst, true), true);
}

Flow evaluate(const EquilibriumCurve& curve, const Rational& lambda) {
  if (lambda.sign() < 0) throw ValidationError("lambda", "price must be >= 0");
  const Instance& inst = curve.instance;
  // Recorded flow at an exact breakpoint.
  auto it = std::lower_bound(
      curve.breakpoints.begin(), curve.breakpoints.end(), lambda,
      [](const auto& bp, const Rational& l) { return bp.first < l; });
  if (it != curve.breakpoints.end() && it->first == lambda) return it->second;

  for (const auto& seg : curve.segments) {
    if (lambda < seg.lo) continue;
    if (!seg.hi) {
      std::vector<std::vector<Rational>> values = seg.flow_lo;
      Rational t = lambda - seg.lo;
      for (int i = 0; i < inst.commodity_count(); ++i) {
        for (int e = 0; e < inst.edge_count(); ++e) values[i][e] += t * seg.ray[i][e];
      }
      return Flow::create(inst, std::move(values));
    }
    if (*seg.hi < lambda) continue;
    Rational width = *seg.hi - seg.lo;
    Rational wl = (*seg.hi - lambda) / width;
    Rational wh = (lambda - seg.lo) / width;
    std::vector<std::vector<Rational>> values(inst.commodity_count(),
                                              std::vector<Rational>(inst.edge_count()));
    for (int i = 0; i < inst.commodity_count(); ++i) {
      for (int e = 0; e < inst.edge_count(); ++e) {
        values[i][e] = wl * seg.flow_lo[i][e] + wh * seg.flow_hi[i][e];
      }
    }
    return Flow::create(inst, std::move(values));
  }
  throw InternalError("price not covered by the traced curve");
}

}  // namespace tollcast
