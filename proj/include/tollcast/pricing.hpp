#pragma once

#include <gmpxx.h>

#include <optional>
#include <vector>

#include "tollcast/model.hpp"

namespace tollcast {

/// Result of the minimal-price search: the price, a witness equilibrium
/// respecting the budget, and the iteration count against its worst-case
/// bound (from the determinant gap between adjacent regime endpoints).
struct PriceSearchReport {
  Rational lambda_star;
  Flow flow;
  long iterations = 0;
  mpz_class iteration_bound;
};

/// Smallest price whose equilibrium meets the budget. Monotone bisection
/// over regime intervals with an exact affine solve once the crossing
/// segment is bracketed. Single constant-coefficient externality class
/// only; infeasible budgets raise InfeasibleBudgetError.
PriceSearchReport min_price(const Instance& instance, const Rational& budget);

struct BudgetPriceResult {
  std::vector<Rational> lambda;  // per class
  Flow flow;
};

/// Prices implementing a multi-class budget: minimizes the travel-time
/// potential under the budget rows and returns the optimal flow together
/// with the budget rows' multipliers, which implement it. Constant
/// externality coefficients only.
BudgetPriceResult implement_budget(const Instance& instance, const Budget& budget);

struct ImplementabilityReport {
  bool implementable = false;
  std::optional<std::vector<Rational>> lambda;  // implementing prices if any
  Rational gap;  // objective gap of the frozen-coefficient program at the flow
};

/// Exact implementability test for an arbitrary feasible flow: the flow is
/// implementable iff it minimizes frozen travel time subject to not
/// exceeding its own externality totals; the budget-row duals provide the
/// prices. Load-dependent externality coefficients are supported (they are
/// frozen at the flow).
ImplementabilityReport check_implementable(const Instance& instance, const Flow& flow);

/// Per-class minimum achievable externality over all feasible flows.
std::vector<Rational> min_feasible_budget(const Instance& instance);

struct MarketInterval {
  Rational lo;
  std::optional<Rational> hi;  // nullopt: every large price clears
  std::optional<Flow> witness_lo;
  std::optional<Flow> witness_hi;
};

/// All market-clearing prices of a credit scheme issuing `credits`: the
/// closed interval between the minimal budget-respecting price and the
/// largest price whose equilibrium still uses the full issue. Witness flows
/// satisfy price * (usage - credits) = 0 exactly.
MarketInterval market_price_interval(const Instance& instance, const Rational& credits);

}  // namespace tollcast
