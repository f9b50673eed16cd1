#include "tollcast/pricing.hpp"

#include <algorithm>

#include "tollcast/curve.hpp"
#include "tollcast/curve_internal.hpp"
#include "tollcast/equilibrium.hpp"
#include "tollcast/errors.hpp"
#include "tollcast/linalg.hpp"
#include "tollcast/lp.hpp"

namespace tollcast {

namespace {

void require_constant_externality(const Instance& inst, const char* what) {
  if (inst.has_affine_externality()) {
    throw UnsupportedExternalityError(std::string(what) +
                                      " requires constant externality coefficients");
  }
}

void require_single_class(const Instance& inst, const char* what) {
  if (inst.externality_count() != 1) {
    throw UnsupportedExternalityError(std::string(what) +
                                      " requires exactly one externality class");
  }
}

// Flow polytope rows on variables x_{i,e}.
LinearProgram<Rational> flow_polytope_lp(const Instance& inst) {
  LinearProgram<Rational> lp;
  for (int i = 0; i < inst.commodity_count(); ++i) {
    for (int e = 0; e < inst.edge_count(); ++e) {
      lp.add_variable(Rational(0), std::nullopt);
    }
  }
  for (int i = 0; i < inst.commodity_count(); ++i) {
    const Commodity& com = inst.commodity(i);
    for (int v = 0; v < inst.node_count(); ++v) {
      std::vector<std::pair<int, Rational>> coeffs;
      for (int e = 0; e < inst.edge_count(); ++e) {
        if (inst.edge(e).tail == v) coeffs.emplace_back(i * inst.edge_count() + e, 1);
        if (inst.edge(e).head == v) coeffs.emplace_back(i * inst.edge_count() + e, -1);
      }
      Rational rhs;
      if (v == com.source) rhs = com.demand;
      if (v == com.target) rhs = -com.demand;
      lp.add_row(std::move(coeffs), RowSense::eq, rhs);
    }
  }
  return lp;
}

std::vector<std::vector<Rational>> decode_edge_flow(const Instance& inst,
                                                    const std::vector<Rational>& primal) {
  std::vector<std::vector<Rational>> values(inst.commodity_count(),
                                            std::vector<Rational>(inst.edge_count()));
  for (int i = 0; i < inst.commodity_count(); ++i) {
    for (int e = 0; e < inst.edge_count(); ++e) {
      values[i][e] = primal[i * inst.edge_count() + e];
    }
  }
  return values;
}

template <typename T>
T externality_of(const Instance& inst, const std::vector<std::vector<T>>& flow) {
  T total(0);
  for (int e = 0; e < inst.edge_count(); ++e) {
    T load(0);
    for (int i = 0; i < inst.commodity_count(); ++i) load += flow[i][e];
    total += from_rational<T>(inst.edge(e).externality[0].g) * load;
  }
  return total;
}

// Scaled travel time at full congestion; the search interval is
// [0, lambda_hat + 1] and no breakpoint lies beyond it.
Rational lambda_hat(const Instance& inst) {
  Rational sum;
  Rational demand = inst.total_demand();
  for (int e = 0; e < inst.edge_count(); ++e) sum += inst.travel_time(e, demand);
  return detail::externality_denominator_scale(inst) * sum;
}

// ceil(log2(value)) for value >= 1.
long ceil_log2(const Rational& value) {
  if (value <= Rational(1)) return 0;
  mpz_class p = value.numerator();
  mpz_class q = value.denominator();
  long k = std::max<long>(
      0, static_cast<long>(mpz_sizeinbase(p.get_mpz_t(), 2)) -
             static_cast<long>(mpz_sizeinbase(q.get_mpz_t(), 2)) - 1);
  mpz_class pow;
  mpz_ui_pow_ui(pow.get_mpz_t(), 2, static_cast<unsigned long>(k));
  while (pow * q < p) {
    pow *= 2;
    ++k;
  }
  return k;
}

mpz_class iteration_bound_for(const Instance& inst) {
  long eta = static_cast<long>(inst.commodity_count()) * inst.node_count() +
             static_cast<long>(inst.commodity_count()) * inst.edge_count() + 1;
  // Common denominator over the regime-program coefficient set {a, b, g}.
  mpz_class scale(1);
  for (int e = 0; e < inst.edge_count(); ++e) {
    for (const auto& piece : inst.edge(e).pieces) {
      mpz_class da = piece.slope.denominator();
      mpz_class db = piece.offset.denominator();
      mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), da.get_mpz_t());
      mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), db.get_mpz_t());
    }
    mpz_class dg = inst.edge(e).externality[0].g.denominator();
    mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), dg.get_mpz_t());
  }
  Rational mu(1);
  Rational s(scale);
  for (int e = 0; e < inst.edge_count(); ++e) {
    for (const auto& piece : inst.edge(e).pieces) {
      mu = max(mu, (piece.slope * s).abs());
      mu = max(mu, (piece.offset * s).abs());
    }
    mu = max(mu, (inst.edge(e).externality[0].g * s).abs());
  }
  // Adjacent regime endpoints are basic solutions of the regime program, so
  // they differ by at least the determinant gap bound.
  Rational gap = hadamard_bit_bound(mu, eta);
  long bits = ceil_log2((lambda_hat(inst) + Rational(1)) / gap);
  return mpz_class(bits);
}

enum class SearchKind { minimal_meeting, maximal_using };

// Shared monotone bisection over regime intervals. For minimal_meeting it
// finds the least price with usage <= budget (assuming usage(0) > budget);
// for maximal_using, the greatest price with usage >= budget (assuming
// usage(lo) >= budget > terminal usage). Search brackets are exact field
// values; the crossing segment is solved in closed form.
template <typename T>
std::pair<Rational, Flow> bisect_crossing(const Instance& inst, bool perturb,
                                          const Rational& budget, SearchKind kind,
                                          const T& lambda_lo, const T& lambda_hi,
                                          long max_iterations, long* iterations_out) {
  T budget_t = from_rational<T>(budget);
  T left = lambda_lo;
  T right = lambda_hi;
  long iterations = 0;
  std::vector<std::vector<Rational>> warm;
  bool have_warm = false;
  while (true) {
    if (++iterations > max_iterations + 8) {
      throw InternalError("price bisection exceeded its iteration bound");
    }
    T mid = (left + right) / T(2);
    auto seg = detail::segment_at<T>(inst, mid, perturb, have_warm ? &warm : nullptr);
    warm.assign(inst.commodity_count(), std::vector<Rational>(inst.edge_count()));
    for (int i = 0; i < inst.commodity_count(); ++i) {
      for (int e = 0; e < inst.edge_count(); ++e) {
        warm[i][e] = standard_part(seg.flow_lo[i][e]);
      }
    }
    have_warm = true;
    T usage_lo = externality_of(inst, seg.flow_lo);
    bool unbounded = !seg.hi.has_value();
    T usage_hi = unbounded ? usage_lo : externality_of(inst, seg.flow_hi);
    if (unbounded) {
      T drift = externality_of(inst, seg.ray);
      if (!is_zero(drift)) throw InternalError("terminal regime with drifting externality");
    }

    bool crossing = kind == SearchKind::minimal_meeting
                        ? sign_of(usage_lo - budget_t) > 0 && !(budget_t < usage_hi)
                        : !(usage_lo < budget_t) && usage_hi < budget_t;
    if (crossing) {
      // usage is affine and strictly decreasing on [lo, hi].
      T target = seg.lo + (usage_lo - budget_t) * (*seg.hi - seg.lo) / (usage_lo - usage_hi);
      T span = *seg.hi - seg.lo;
      std::vector<std::vector<Rational>> values(inst.commodity_count(),
                                                std::vector<Rational>(inst.edge_count()));
      T wl = (*seg.hi - target) / span;
      T wh = (target - seg.lo) / span;
      for (int i = 0; i < inst.commodity_count(); ++i) {
        for (int e = 0; e < inst.edge_count(); ++e) {
          values[i][e] =
              standard_part(wl * seg.flow_lo[i][e] + wh * seg.flow_hi[i][e]);
        }
      }
      if (iterations_out) *iterations_out = iterations;
      return {standard_part(target), Flow::create(inst, values)};
    }
    if (kind == SearchKind::minimal_meeting) {
      if (!(budget_t < usage_lo)) {
        right = seg.lo;  // the whole segment already meets the budget
      } else {
        if (!seg.hi) throw InternalError("terminal regime exceeds a feasible budget");
        left = *seg.hi;  // segment stays above the budget
      }
    } else {
      if (!(usage_hi < budget_t)) {
        if (!seg.hi) throw InternalError("terminal regime keeps using a tight budget");
        left = *seg.hi;  // still using at least the budget past this segment
      } else {
        right = seg.lo;
      }
    }
    if (!(left < right)) throw InternalError("price bisection bracket collapsed");
  }
}

template <typename T>
std::pair<Rational, Flow> min_price_impl(const Instance& inst, const Rational& budget,
                                         bool perturb, long max_iterations,
                                         long* iterations_out) {
  auto at_zero = solve_equilibrium_typed<T>(inst, std::vector<T>{T(0)}, perturb);
  T usage0 = externality_of(inst, at_zero.flow);
  if (!(from_rational<T>(budget) < usage0)) {
    std::vector<std::vector<Rational>> values(inst.commodity_count(),
                                              std::vector<Rational>(inst.edge_count()));
    for (int i = 0; i < inst.commodity_count(); ++i) {
      for (int e = 0; e < inst.edge_count(); ++e) {
        values[i][e] = standard_part(at_zero.flow[i][e]);
      }
    }
    if (iterations_out) *iterations_out = 0;
    return {Rational(0), Flow::create(inst, values)};
  }
  T upper = detail::lambda_max_typed<T>(inst, perturb);  // lambda_hat + 1
  return bisect_crossing<T>(inst, perturb, budget, SearchKind::minimal_meeting, T(0), upper,
                            max_iterations, iterations_out);
}

}  // namespace

std::vector<Rational> min_feasible_budget(const Instance& inst) {
  require_constant_externality(inst, "minimum feasible budget");
  std::vector<Rational> mins;
  for (int j = 0; j < inst.externality_count(); ++j) {
    auto lp = flow_polytope_lp(inst);
    for (int i = 0; i < inst.commodity_count(); ++i) {
      for (int e = 0; e < inst.edge_count(); ++e) {
        lp.objective[i * inst.edge_count() + e] = inst.edge(e).externality[j].g;
      }
    }
    auto out = solve_lp(lp);
    if (!out.is_optimal()) throw InternalError("externality minimization did not solve");
    mins.push_back(out.optimal().objective);
  }
  return mins;
}

ImplementabilityReport check_implementable(const Instance& inst, const Flow& flow) {
  // Coefficients frozen at the flow: tau_e(x_e) and g_e + gamma_e * x_e.
  std::vector<Rational> tau(inst.edge_count());
  std::vector<std::vector<Rational>> g_hat(inst.externality_count(),
                                           std::vector<Rational>(inst.edge_count()));
  std::vector<Rational> totals(inst.externality_count());
  for (int e = 0; e < inst.edge_count(); ++e) {
    tau[e] = inst.travel_time(e, flow.load(e));
    for (int j = 0; j < inst.externality_count(); ++j) {
      g_hat[j][e] = inst.edge(e).externality[j].g +
                    inst.edge(e).externality[j].gamma * flow.load(e);
      totals[j] += g_hat[j][e] * flow.load(e);
    }
  }

  auto lp = flow_polytope_lp(inst);
  for (int i = 0; i < inst.commodity_count(); ++i) {
    for (int e = 0; e < inst.edge_count(); ++e) {
      lp.objective[i * inst.edge_count() + e] = tau[e];
    }
  }
  int first_budget_row = static_cast<int>(lp.rows.size());
  for (int j = 0; j < inst.externality_count(); ++j) {
    std::vector<std::pair<int, Rational>> coeffs;
    for (int i = 0; i < inst.commodity_count(); ++i) {
      for (int e = 0; e < inst.edge_count(); ++e) {
        coeffs.emplace_back(i * inst.edge_count() + e, g_hat[j][e]);
      }
    }
    lp.add_row(std::move(coeffs), RowSense::le, totals[j]);
  }
  auto out = solve_lp(lp);
  if (!out.is_optimal()) throw InternalError("implementability program did not solve");

  Rational at_flow;
  for (int e = 0; e < inst.edge_count(); ++e) at_flow += tau[e] * flow.load(e);
  ImplementabilityReport report;
  report.gap = at_flow - out.optimal().objective;
  if (report.gap.sign() < 0) throw InternalError("flow beats the program optimum");
  report.implementable = report.gap.is_zero();
  if (report.implementable) {
    std::vector<Rational> lambda(inst.externality_count());
    for (int j = 0; j < inst.externality_count(); ++j) {
      lambda[j] = -out.optimal().row_duals[first_budget_row + j];
      if (lambda[j].sign() < 0) throw InternalError("negative implementing price");
    }
    report.lambda = std::move(lambda);
  }
  return report;
}

BudgetPriceResult implement_budget(const Instance& inst, const Budget& budget) {
  require_constant_externality(inst, "budget pricing");
  if (budget.bounds.size() != static_cast<size_t>(inst.externality_count())) {
    throw ValidationError("budget", "one bound per externality class required");
  }
  for (const auto& b : budget.bounds) {
    if (b.sign() < 0) throw ValidationError("budget", "bounds must be >= 0");
  }

  // Feasibility: one program per class for diagnostics, then the joint one
  // whose certificate is authoritative and whose optimum seeds the solve.
  auto mins = min_feasible_budget(inst);
  std::vector<std::string> trouble;
  for (int j = 0; j < inst.externality_count(); ++j) {
    if (budget.bounds[j] < mins[j]) {
      trouble.push_back("class " + inst.externalities()[j] + " needs at least " +
                        mins[j].str());
    }
  }
  auto joint = flow_polytope_lp(inst);
  for (int j = 0; j < inst.externality_count(); ++j) {
    std::vector<std::pair<int, Rational>> coeffs;
    for (int i = 0; i < inst.commodity_count(); ++i) {
      for (int e = 0; e < inst.edge_count(); ++e) {
        coeffs.emplace_back(i * inst.edge_count() + e, inst.edge(e).externality[j].g);
      }
    }
    joint.add_row(std::move(coeffs), RowSense::le, budget.bounds[j]);
  }
  auto joint_out = solve_lp(joint);
  if (joint_out.is_infeasible()) {
    std::vector<std::string> certificate = std::move(trouble);
    const auto& y = joint_out.infeasible().farkas;
    for (size_t r = 0; r < y.size(); ++r) {
      if (!y[r].is_zero()) {
        certificate.push_back("row " + std::to_string(r) + " multiplier " + y[r].str());
      }
    }
    throw InfeasibleBudgetError("budget cannot be met by any feasible flow",
                                std::move(certificate));
  }
  if (!joint_out.is_optimal()) throw InternalError("feasibility program did not solve");
  auto start = decode_edge_flow(inst, joint_out.optimal().primal);

  QpOptions options;
  options.start = start;
  for (int j = 0; j < inst.externality_count(); ++j) {
    LoadRow row;
    row.edge_coeff.resize(inst.edge_count());
    for (int e = 0; e < inst.edge_count(); ++e) {
      row.edge_coeff[e] = inst.edge(e).externality[j].g;
    }
    row.rhs = budget.bounds[j];
    options.rows.push_back(std::move(row));
  }

  BudgetPriceResult result;
  if (inst.strictly_increasing()) {
    std::vector<Rational> zero(inst.externality_count(), Rational(0));
    auto net = expand_network<Rational>(inst, zero, false);
    auto qp = solve_expanded_qp(inst, net, options);
    result.flow = Flow::create(inst, collapse_flow(inst, net, qp));
    for (int j = 0; j < inst.externality_count(); ++j) {
      result.lambda.push_back(qp.row_duals[j]);
    }
  } else {
    std::vector<EpsRational> zero(inst.externality_count(), EpsRational(0));
    auto net = expand_network<EpsRational>(inst, zero, true);
    auto qp = solve_expanded_qp(inst, net, options);
    auto flow_t = collapse_flow(inst, net, qp);
    std::vector<std::vector<Rational>> values(inst.commodity_count(),
                                              std::vector<Rational>(inst.edge_count()));
    for (int i = 0; i < inst.commodity_count(); ++i) {
      for (int e = 0; e < inst.edge_count(); ++e) values[i][e] = flow_t[i][e].standard_part();
    }
    result.flow = Flow::create(inst, values);
    for (int j = 0; j < inst.externality_count(); ++j) {
      result.lambda.push_back(qp.row_duals[j].standard_part());
    }
  }
  for (int j = 0; j < inst.externality_count(); ++j) {
    if (result.lambda[j].sign() < 0) throw InternalError("negative budget multiplier");
  }
  // Exact complementary slackness of the returned pair.
  auto totals = total_externality(inst, result.flow);
  for (int j = 0; j < inst.externality_count(); ++j) {
    if (totals[j] > budget.bounds[j]) throw InternalError("budget violated at the optimum");
    if (!result.lambda[j].is_zero() && !(totals[j] == budget.bounds[j])) {
      throw InternalError("slack budget with a positive multiplier");
    }
  }
  return result;
}

PriceSearchReport min_price(const Instance& inst, const Rational& budget) {
  require_single_class(inst, "minimal price search");
  require_constant_externality(inst, "minimal price search");
  if (budget.sign() < 0) throw ValidationError("budget", "budget must be >= 0");
  Rational bmin = min_feasible_budget(inst)[0];
  if (budget < bmin) {
    throw InfeasibleBudgetError("budget below the minimum achievable externality " +
                                bmin.str());
  }

  PriceSearchReport report;
  report.iteration_bound = iteration_bound_for(inst);
  long max_it = std::max<long>(8, mpz_get_si(report.iteration_bound.get_mpz_t()));
  std::pair<Rational, Flow> found{Rational(0), Flow{}};
  if (inst.strictly_increasing()) {
    found = min_price_impl<Rational>(inst, budget, false, max_it, &report.iterations);
  } else {
    found = min_price_impl<EpsRational>(inst, budget, true, max_it, &report.iterations);
  }
  report.lambda_star = std::move(found.first);
  report.flow = std::move(found.second);
  return report;
}

MarketInterval market_price_interval(const Instance& inst, const Rational& credits) {
  require_single_class(inst, "market price interval");
  require_constant_externality(inst, "market price interval");
  if (credits.sign() < 0) throw ValidationError("credits", "credit issue must be >= 0");
  Rational bmin = min_feasible_budget(inst)[0];
  if (credits < bmin) {
    throw InfeasibleBudgetError("credit scheme infeasible: issue below minimum usage " +
                                bmin.str());
  }

  auto lower = min_price(inst, credits);
  MarketInterval interval;
  interval.lo = lower.lambda_star;
  interval.witness_lo = lower.flow;

  Rational usage0 = total_externality(inst, solve_equilibrium(inst, {Rational(0)}).flow)[0];
  if (usage0 < credits) {
    // Market already clears free: zero is the only equilibrium price.
    interval.hi = Rational(0);
    interval.witness_hi = interval.witness_lo;
    return interval;
  }
  if (credits == bmin) {
    return interval;  // every price above the minimum keeps clearing
  }
  long max_it = std::max<long>(8, mpz_get_si(iteration_bound_for(inst).get_mpz_t()));
  std::pair<Rational, Flow> found{Rational(0), Flow{}};
  if (inst.strictly_increasing()) {
    Rational upper = detail::lambda_max_typed<Rational>(inst, false);
    found = bisect_crossing<Rational>(inst, false, credits, SearchKind::maximal_using,
                                      interval.lo, upper, max_it, nullptr);
  } else {
    EpsRational upper = detail::lambda_max_typed<EpsRational>(inst, true);
    found = bisect_crossing<EpsRational>(inst, true, credits, SearchKind::maximal_using,
                                         EpsRational(interval.lo), upper, max_it, nullptr);
  }
  interval.hi = found.first;
  interval.witness_hi = std::move(found.second);
  return interval;
}

}  // namespace tollcast
