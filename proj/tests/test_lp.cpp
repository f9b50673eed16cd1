#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "testutil.hpp"
#include "tollcast/lp.hpp"

using namespace tollcast;
using testutil::Q;

TEST_CASE("single bounded variable maximization") {
  LinearProgram<Rational> lp;
  lp.sense = ObjSense::maximize;
  int l = lp.add_variable(Rational(0), std::nullopt, Rational(1));
  lp.add_row({{l, Rational(1)}}, RowSense::le, Rational(2));
  auto out = solve_lp(lp);
  REQUIRE(out.is_optimal());
  CHECK(out.optimal().primal[l] == 2);
  CHECK(out.optimal().objective == 2);
  CHECK(out.optimal().row_duals[0] == 1);
  CHECK(testutil::lp_optimal_certified(lp, out.optimal()));
}

TEST_CASE("unbounded direction is reported with a ray") {
  LinearProgram<Rational> lp;
  lp.sense = ObjSense::maximize;
  lp.add_variable(Rational(0), std::nullopt, Rational(1));
  auto out = solve_lp(lp);
  REQUIRE(out.is_unbounded());
  CHECK(out.unbounded().ray[0] == 1);
  CHECK(testutil::lp_ray_certified(lp, out.unbounded()));
}

TEST_CASE("two-variable equality with a bound") {
  LinearProgram<Rational> lp;
  lp.sense = ObjSense::minimize;
  int x1 = lp.add_variable(Rational(0), Q("1/2"), Rational(0));
  int x2 = lp.add_variable(Rational(0), std::nullopt, Rational(1));
  lp.add_row({{x1, Rational(1)}, {x2, Rational(1)}}, RowSense::eq, Rational(1));
  auto out = solve_lp(lp);
  REQUIRE(out.is_optimal());
  CHECK(out.optimal().primal[x1] == Q("1/2"));
  CHECK(out.optimal().primal[x2] == Q("1/2"));
  CHECK(out.optimal().objective == Q("1/2"));
  CHECK(testutil::lp_optimal_certified(lp, out.optimal()));
}

TEST_CASE("infeasible system carries a verified certificate") {
  LinearProgram<Rational> lp;
  int x = lp.add_variable(Rational(0), std::nullopt, Rational(1));
  lp.add_row({{x, Rational(1)}}, RowSense::ge, Rational(3));
  lp.add_row({{x, Rational(1)}}, RowSense::le, Rational(1));
  auto out = solve_lp(lp);
  REQUIRE(out.is_infeasible());
  CHECK(testutil::lp_farkas_certified(lp, out.infeasible()));
}

TEST_CASE("degenerate and free-variable corners") {
  // Free variable pinned by two equalities.
  LinearProgram<Rational> lp;
  int x = lp.add_variable(std::nullopt, std::nullopt, Rational(3));
  int y = lp.add_variable(std::nullopt, std::nullopt, Rational(-1));
  lp.add_row({{x, Rational(1)}, {y, Rational(1)}}, RowSense::eq, Rational(2));
  lp.add_row({{x, Rational(1)}, {y, Rational(-1)}}, RowSense::eq, Rational(0));
  auto out = solve_lp(lp);
  REQUIRE(out.is_optimal());
  CHECK(out.optimal().primal[x] == 1);
  CHECK(out.optimal().primal[y] == 1);

  // Redundant equality rows must not break phase 1.
  LinearProgram<Rational> lp2;
  int z = lp2.add_variable(Rational(0), std::nullopt, Rational(1));
  lp2.add_row({{z, Rational(1)}}, RowSense::eq, Rational(1));
  lp2.add_row({{z, Rational(2)}}, RowSense::eq, Rational(2));
  auto out2 = solve_lp(lp2);
  REQUIRE(out2.is_optimal());
  CHECK(out2.optimal().primal[z] == 1);
}

TEST_CASE("determinism: identical inputs give identical pivot sequences") {
  std::mt19937_64 rng(23);
  for (int it = 0; it < 50; ++it) {
    auto lp = testutil::random_lp(rng);
    auto a = solve_lp(lp);
    auto b = solve_lp(lp);
    CHECK(a.pivots == b.pivots);
    CHECK(a.result.index() == b.result.index());
    if (a.is_optimal()) {
      CHECK(a.optimal().primal == b.optimal().primal);
      CHECK(a.optimal().row_duals == b.optimal().row_duals);
    }
  }
}

TEST_CASE("random self-certification sweep") {
  std::mt19937_64 rng(29);
  int optimal = 0, infeasible = 0, unbounded = 0;
  for (int it = 0; it < 500; ++it) {
    auto lp = testutil::random_lp(rng);
    auto out = solve_lp(lp);  // internal verification throws on any defect
    if (out.is_optimal()) {
      ++optimal;
      CHECK(testutil::lp_optimal_certified(lp, out.optimal()));
    } else if (out.is_infeasible()) {
      ++infeasible;
      CHECK(testutil::lp_farkas_certified(lp, out.infeasible()));
    } else {
      ++unbounded;
      CHECK(testutil::lp_ray_certified(lp, out.unbounded()));
    }
  }
  // The generator must exercise all three outcomes.
  CHECK(optimal > 50);
  CHECK(infeasible > 20);
  CHECK(unbounded > 20);
}

TEST_CASE("perturbed-field instantiation solves and orders correctly") {
  // min x subject to x >= eps: optimum is the infinitesimal itself.
  LinearProgram<EpsRational> lp;
  int x = lp.add_variable(EpsRational(0), std::nullopt, EpsRational(1));
  lp.add_row({{x, EpsRational(1)}}, RowSense::ge, EpsRational::epsilon());
  auto out = solve_lp(lp);
  REQUIRE(out.is_optimal());
  CHECK(out.optimal().primal[x] == EpsRational::epsilon());
  CHECK(out.optimal().primal[x].standard_part() == 0);
}
