#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "testutil.hpp"
#include "tollcast/curve.hpp"
#include "tollcast/equilibrium.hpp"
#include "tollcast/errors.hpp"
#include "tollcast/paths.hpp"
#include "tollcast/pricing.hpp"

using namespace tollcast;
using testutil::Q;

TEST_CASE("minimum feasible budgets") {
  CHECK(min_feasible_budget(testutil::pigou())[0] == 0);
  CHECK(min_feasible_budget(testutil::t1(2, 3))[0] == 6);
  CHECK(min_feasible_budget(testutil::fig1())[0] == 0);
  auto two = min_feasible_budget(testutil::two_class());
  CHECK(two[0] == 0);
  CHECK(two[1] == 0);
  CHECK_THROWS_AS(min_feasible_budget(testutil::braess()), UnsupportedExternalityError);
}

TEST_CASE("minimal price meeting a budget") {
  auto pigou = testutil::pigou();
  SUBCASE("interior crossing") {
    auto r = min_price(pigou, Q("1/2"));
    CHECK(r.lambda_star == 1);
    CHECK(total_externality(pigou, r.flow)[0] == Q("1/2"));
    CHECK(verify_wardrop(pigou, r.flow, {r.lambda_star}).equilibrium);
    CHECK(r.iterations <= mpz_get_si(r.iteration_bound.get_mpz_t()));
  }
  SUBCASE("already satisfied at zero") {
    auto r = min_price(pigou, 2);
    CHECK(r.lambda_star == 0);
    CHECK(r.iterations == 0);
  }
  SUBCASE("flat slopes fixture") {
    auto f1 = testutil::f1();
    auto r = min_price(f1, 0);
    CHECK(r.lambda_star == Q("101/100"));
    CHECK(total_externality(f1, r.flow)[0] == 0);
    CHECK(r.iterations <= mpz_get_si(r.iteration_bound.get_mpz_t()));
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(min_price(testutil::braess(), 1), UnsupportedExternalityError);
    CHECK_THROWS_AS(min_price(testutil::t1(2, 3), 5), InfeasibleBudgetError);
    CHECK_THROWS_AS(min_price(testutil::two_class(), 1), UnsupportedExternalityError);
  }
  SUBCASE("minimality margin") {
    // Just below the found price the externality still exceeds the budget.
    auto r = min_price(pigou, Q("1/2"));
    Rational before = r.lambda_star - Q("1/100");
    auto eq = solve_equilibrium(pigou, {before});
    CHECK(Q("1/2") < total_externality(pigou, eq.flow)[0]);
  }
}

TEST_CASE("budget-implementing prices via the constrained potential") {
  auto inst = testutil::two_class();
  SUBCASE("slack budget needs no prices") {
    auto r = implement_budget(inst, Budget{{Q("3/4"), Q("3/4")}});
    CHECK(r.flow.load(0) == Q("1/2"));
    CHECK(r.flow.load(1) == Q("1/2"));
    CHECK(r.lambda[0] == 0);
    CHECK(r.lambda[1] == 0);
  }
  SUBCASE("one binding class") {
    auto r = implement_budget(inst, Budget{{Q("1/4"), 1}});
    CHECK(r.flow.load(0) == Q("1/4"));
    CHECK(r.flow.load(1) == Q("3/4"));
    CHECK(r.lambda[0] == Q("1/2"));
    CHECK(r.lambda[1] == 0);
    CHECK(verify_wardrop(inst, r.flow, r.lambda).equilibrium);
    // Re-solving at the returned prices reproduces the externality totals.
    auto eq = solve_equilibrium(inst, r.lambda);
    auto g1 = total_externality(inst, r.flow);
    auto g2 = total_externality(inst, eq.flow);
    CHECK(g1[0] == g2[0]);
    CHECK(g1[1] == g2[1]);
  }
  SUBCASE("impossible budget carries a certificate") {
    try {
      implement_budget(inst, Budget{{0, 0}});
      FAIL("expected infeasibility");
    } catch (const InfeasibleBudgetError& err) {
      CHECK(!err.certificate().empty());
    }
  }
  SUBCASE("budget validation") {
    CHECK_THROWS_AS(implement_budget(inst, Budget{{1}}), ValidationError);
    CHECK_THROWS_AS(implement_budget(inst, Budget{{-1, 1}}), ValidationError);
    CHECK_THROWS_AS(implement_budget(testutil::braess(), Budget{{1}}),
                    UnsupportedExternalityError);
  }
}

TEST_CASE("implementability of given flows") {
  SUBCASE("clean-edge flow on the flat fixture") {
    auto inst = testutil::fig1();
    auto flow = Flow::create(inst, {{0, 1}});
    auto r = check_implementable(inst, flow);
    CHECK(r.implementable);
    CHECK(r.gap == 0);
    REQUIRE(r.lambda.has_value());
    CHECK((*r.lambda)[0] == 1);
  }
  SUBCASE("without the externality the slow edge cannot be priced into use") {
    auto inst = testutil::fig1_zero_g();
    auto flow = Flow::create(inst, {{0, 1}});
    auto r = check_implementable(inst, flow);
    CHECK_FALSE(r.implementable);
    CHECK(r.gap == 1);
  }
  SUBCASE("equilibria are implementable, including load-dependent classes") {
    std::mt19937_64 rng(53);
    for (int it = 0; it < 10; ++it) {
      auto inst = testutil::random_instance(rng, 4, 6, 2, 2);
      Rational lam = testutil::random_rational(rng, 0, 3, 2);
      auto eq = solve_equilibrium(inst, {lam});
      auto r = check_implementable(inst, eq.flow);
      CHECK(r.implementable);
      CHECK(r.gap == 0);
      REQUIRE(r.lambda.has_value());
      // The returned prices implement an equilibrium with identical loads.
      auto re = solve_equilibrium(inst, *r.lambda);
      for (int e = 0; e < inst.edge_count(); ++e) {
        CHECK(re.flow.load(e) == eq.flow.load(e));
      }
    }
    auto braess = testutil::braess();
    auto eq = solve_equilibrium(braess, {1});
    auto r = check_implementable(braess, eq.flow);
    CHECK(r.implementable);
    CHECK(r.gap == 0);
  }
}

TEST_CASE("market price intervals of credit schemes") {
  auto pigou = testutil::pigou();
  SUBCASE("interior issue pins a single price") {
    auto m = market_price_interval(pigou, Q("1/2"));
    CHECK(m.lo == 1);
    REQUIRE(m.hi.has_value());
    CHECK(*m.hi == 1);
    REQUIRE(m.witness_lo.has_value());
    CHECK(total_externality(pigou, *m.witness_lo)[0] == Q("1/2"));
    REQUIRE(m.witness_hi.has_value());
    CHECK(total_externality(pigou, *m.witness_hi)[0] == Q("1/2"));
  }
  SUBCASE("generous issue clears only at price zero") {
    auto m = market_price_interval(pigou, 1);
    CHECK(m.lo == 0);
    REQUIRE(m.hi.has_value());
    CHECK(*m.hi == 0);
    // usage(0) equals the issue, so price zero clears with complementarity.
    CHECK(total_externality(pigou, *m.witness_lo)[0] == 1);
  }
  SUBCASE("issue at the minimum keeps every large price clearing") {
    auto m = market_price_interval(pigou, 0);
    CHECK(m.lo == 2);
    CHECK_FALSE(m.hi.has_value());
    CHECK(total_externality(pigou, *m.witness_lo)[0] == 0);
  }
  SUBCASE("strictly generous issue") {
    auto m = market_price_interval(pigou, 3);
    CHECK(m.lo == 0);
    REQUIRE(m.hi.has_value());
    CHECK(*m.hi == 0);
  }
  SUBCASE("complementarity of witnesses") {
    for (const char* b : {"0", "1/3", "1/2", "9/10", "1"}) {
      auto m = market_price_interval(pigou, Q(b));
      if (m.witness_lo) {
        Rational g = total_externality(pigou, *m.witness_lo)[0];
        CHECK(m.lo * (g - Q(b)) == 0);
        CHECK(!(Q(b) < g));
      }
      if (m.hi && m.witness_hi) {
        Rational g = total_externality(pigou, *m.witness_hi)[0];
        CHECK(*m.hi * (g - Q(b)) == 0);
      }
    }
  }
  SUBCASE("infeasible scheme") {
    CHECK_THROWS_AS(market_price_interval(testutil::t1(2, 3), 1), InfeasibleBudgetError);
  }
}

namespace {

// Independent oracle: scan a traced curve left to right for the least price
// whose usage meets the budget. Usage is affine on every segment.
Rational oracle_min_price(const Instance& inst, const EquilibriumCurve& curve,
                          const Rational& budget) {
  for (const auto& seg : curve.segments) {
    Rational g_lo = total_externality(inst, Flow::create(inst, seg.flow_lo))[0];
    if (!(budget < g_lo)) return seg.lo;
    if (!seg.hi) break;
    Rational g_hi = total_externality(inst, Flow::create(inst, seg.flow_hi))[0];
    if (!(budget < g_hi)) {
      return seg.lo + (g_lo - budget) * (*seg.hi - seg.lo) / (g_lo - g_hi);
    }
  }
  throw std::runtime_error("oracle: budget unreachable");
}

// Greatest price whose usage still reaches the budget (right-to-left scan).
Rational oracle_max_using(const Instance& inst, const EquilibriumCurve& curve,
                          const Rational& budget) {
  Rational best(-1);
  for (const auto& seg : curve.segments) {
    Rational g_lo = total_externality(inst, Flow::create(inst, seg.flow_lo))[0];
    if (g_lo < budget) continue;
    if (!seg.hi) return best;  // constant terminal usage below the budget
    Rational g_hi = total_externality(inst, Flow::create(inst, seg.flow_hi))[0];
    if (!(g_hi < budget)) {
      best = max(best, *seg.hi);
    } else {
      best = max(best, seg.lo + (g_lo - budget) * (*seg.hi - seg.lo) / (g_lo - g_hi));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("price searches agree with a curve-scanning oracle") {
  std::mt19937_64 rng(61);
  int checked = 0;
  for (int it = 0; it < 12; ++it) {
    auto inst = testutil::random_instance(rng, 4, 6, 2, 2);
    auto curve = trace_curve(inst);
    Rational g0 = total_externality(inst, evaluate(curve, 0))[0];
    Rational bmin = min_feasible_budget(inst)[0];
    if (!(bmin < g0)) continue;  // price cannot move the usage

    std::vector<Rational> budgets{bmin, g0, (bmin + g0) / Rational(2),
                                  bmin + (g0 - bmin) / Rational(7),
                                  g0 - (g0 - bmin) / Rational(9)};
    for (const auto& b : budgets) {
      ++checked;
      auto report = min_price(inst, b);
      CHECK(report.lambda_star == oracle_min_price(inst, curve, b));
      CHECK(!(b < total_externality(inst, report.flow)[0]));
      CHECK(report.iterations <= mpz_get_si(report.iteration_bound.get_mpz_t()));

      auto interval = market_price_interval(inst, b);
      CHECK(interval.lo == report.lambda_star);
      if (b == bmin) {
        CHECK_FALSE(interval.hi.has_value());
      } else if (total_externality(inst, evaluate(curve, 0))[0] < b) {
        REQUIRE(interval.hi.has_value());
        CHECK(*interval.hi == 0);
      } else {
        REQUIRE(interval.hi.has_value());
        CHECK(*interval.hi == oracle_max_using(inst, curve, b));
      }
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("single-class budget pricing is consistent with the curve") {
  std::mt19937_64 rng(67);
  int checked = 0;
  while (checked < 6) {
    auto inst = testutil::random_instance(rng, 4, 6, 2, 2);
    auto curve = trace_curve(inst);
    Rational g0 = total_externality(inst, evaluate(curve, 0))[0];
    Rational bmin = min_feasible_budget(inst)[0];
    if (!(bmin < g0)) continue;
    Rational b = (bmin + g0) / Rational(2);
    ++checked;

    auto res = implement_budget(inst, Budget{{b}});
    auto totals = total_externality(inst, res.flow);
    CHECK(!(b < totals[0]));
    CHECK((res.lambda[0] * (totals[0] - b)).is_zero());
    CHECK(verify_wardrop(inst, res.flow, res.lambda).equilibrium);

    // The constrained optimum cannot lose to the minimal-price equilibrium,
    // which also respects the budget.
    auto mp = min_price(inst, b);
    CHECK(!(potential(inst, mp.flow) < potential(inst, res.flow)));

    // Re-solving at the returned price reproduces the usage.
    auto re = solve_equilibrium(inst, res.lambda);
    CHECK(total_externality(inst, re.flow)[0] == totals[0]);
  }
  CHECK(checked == 6);
}

TEST_CASE("at the minimal budget every implementable flow shares the optimal potential") {
  // With a single class, the only undominated budget is the minimum usage;
  // flows meeting it exactly all attain the constrained optimum's travel
  // potential. Curve tails meet the budget, so they are such flows.
  std::mt19937_64 rng(83);
  int checked = 0;
  while (checked < 6) {
    auto inst = testutil::random_instance(rng, 4, 6, 2, 2);
    Rational bmin = min_feasible_budget(inst)[0];
    auto curve = trace_curve(inst);
    Rational g0 = total_externality(inst, evaluate(curve, 0))[0];
    if (!(bmin < g0)) continue;
    ++checked;
    auto opt = implement_budget(inst, Budget{{bmin}});
    Rational phi_opt = potential(inst, opt.flow);
    auto tail = evaluate(curve, curve.terminal.start + 2);
    CHECK(total_externality(inst, tail)[0] == bmin);
    CHECK(potential(inst, tail) == phi_opt);
  }
}

TEST_CASE("externality monotone in the price, potential antitone") {
  std::mt19937_64 rng(59);
  for (int it = 0; it < 25; ++it) {
    auto inst = testutil::random_instance(rng, 5, 8, 2, 2);
    for (int rep = 0; rep < 4; ++rep) {
      Rational l1 = testutil::random_rational(rng, 0, 5, 3);
      Rational l2 = testutil::random_rational(rng, 0, 5, 3);
      if (l2 < l1) std::swap(l1, l2);
      if (l1 == l2) l2 += Q("1/7");
      auto x1 = solve_equilibrium(inst, {l1});
      auto x2 = solve_equilibrium(inst, {l2});
      CHECK(!(total_externality(inst, x1.flow)[0] < total_externality(inst, x2.flow)[0]));
      CHECK(!(potential(inst, x2.flow) < potential(inst, x1.flow)));
    }
  }
}
