#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "testutil.hpp"
#include "tollcast/curve.hpp"
#include "tollcast/equilibrium.hpp"
#include "tollcast/errors.hpp"
#include "tollcast/paths.hpp"

using namespace tollcast;
using testutil::Q;

namespace {

EdgeState pigou_full_state() {
  EdgeState s;
  s.support = {{0, 0}, {0, 1}};
  s.parts = {0, 0};
  return s;
}

}  // namespace

TEST_CASE("regime interval endpoints on the two-edge fixture") {
  auto inst = testutil::pigou();
  SUBCASE("both edges supported: prices 0 through 2") {
    auto mx = state_interval(inst, pigou_full_state(), ObjSense::maximize);
    REQUIRE(mx.kind == StateIntervalOutcome::Kind::optimal);
    CHECK(*mx.lambda == 2);
    CHECK(mx.flow->load(0) == 0);
    CHECK(mx.flow->load(1) == 1);

    auto mn = state_interval(inst, pigou_full_state(), ObjSense::minimize);
    REQUIRE(mn.kind == StateIntervalOutcome::Kind::optimal);
    CHECK(*mn.lambda == 0);
    CHECK(mn.flow->load(0) == 1);
    CHECK(mn.flow->load(1) == 0);
  }
  SUBCASE("clean edge alone extends forever") {
    EdgeState s;
    s.support = {{0, 1}};
    s.parts = {0, 0};
    auto mx = state_interval(inst, s, ObjSense::maximize);
    REQUIRE(mx.kind == StateIntervalOutcome::Kind::unbounded);
    for (int e = 0; e < 2; ++e) CHECK(mx.flow_ray[0][e] == 0);
    auto mn = state_interval(inst, s, ObjSense::minimize);
    REQUIRE(mn.kind == StateIntervalOutcome::Kind::optimal);
    CHECK(*mn.lambda == 2);
  }
  SUBCASE("unrealizable support is infeasible") {
    EdgeState s;
    s.support = {};  // demand must flow somewhere tight
    s.parts = {0, 0};
    auto out = state_interval(inst, s, ObjSense::maximize);
    CHECK(out.kind == StateIntervalOutcome::Kind::infeasible);
  }
  SUBCASE("load-dependent externalities are rejected") {
    auto braess = testutil::braess();
    EdgeState s;
    s.support = {};
    s.parts = {0, 0, 0, 0, 0};
    CHECK_THROWS_AS(state_interval(braess, s, ObjSense::maximize),
                    UnsupportedExternalityError);
  }
}

TEST_CASE("curve of the two-edge fixture") {
  auto inst = testutil::pigou();
  auto curve = trace_curve(inst);
  REQUIRE(curve.breakpoints.size() == 2);
  CHECK(curve.breakpoints[0].first == 0);
  CHECK(curve.breakpoints[0].second.load(0) == 1);
  CHECK(curve.breakpoints[0].second.load(1) == 0);
  CHECK(curve.breakpoints[1].first == 2);
  CHECK(curve.breakpoints[1].second.load(0) == 0);
  CHECK(curve.breakpoints[1].second.load(1) == 1);
  CHECK(curve.terminal.start == 2);
  for (const auto& row : curve.terminal.ray) {
    for (const auto& v : row) CHECK(v == 0);
  }
  CHECK_FALSE(curve.perturbed);

  SUBCASE("evaluation: interpolation, breakpoints, and the constant tail") {
    CHECK(evaluate(curve, 1).load(0) == Q("1/2"));
    CHECK(evaluate(curve, 1).load(1) == Q("1/2"));
    CHECK(evaluate(curve, 2).load(1) == 1);
    CHECK(evaluate(curve, 5).load(0) == 0);
    CHECK(evaluate(curve, 5).load(1) == 1);
    CHECK_THROWS_AS(evaluate(curve, Q("-1")), ValidationError);
  }
}

TEST_CASE("single-edge curve is constant") {
  auto inst = testutil::t1();
  auto curve = trace_curve(inst);
  REQUIRE(curve.breakpoints.size() == 1);
  CHECK(curve.breakpoints[0].first == 0);
  CHECK(curve.breakpoints[0].second.load(0) == 3);
  CHECK(evaluate(curve, Q("7/3")).load(0) == 3);
  CHECK(lambda_max(inst) == 0);
}

TEST_CASE("two independent pairs merge their breakpoints") {
  auto inst = testutil::two_commodity();
  auto curve = trace_curve(inst);
  // Closed forms: pair A drains at 2, pair B at 4.
  REQUIRE(curve.breakpoints.size() == 3);
  CHECK(curve.breakpoints[0].first == 0);
  CHECK(curve.breakpoints[1].first == 2);
  CHECK(curve.breakpoints[2].first == 4);

  // Oracle: solve each pair separately and compare loads on a grid.
  for (int k = 0; k <= 16; ++k) {
    Rational lam = Rational(k) / Rational(3);
    auto flow = evaluate(curve, lam);
    Rational a1 = max(Rational(0), Rational(1) - lam / Rational(2));
    Rational b1 = max(Rational(0), Rational(2) - lam / Rational(2));
    CHECK(flow.load(0) == a1);
    CHECK(flow.load(1) == Rational(1) - a1);
    CHECK(flow.load(2) == b1);
    CHECK(flow.load(3) == Rational(2) - b1);
  }
}

TEST_CASE("flat-cost instance is traced through the perturbation field") {
  auto inst = testutil::fig1();
  auto curve = trace_curve(inst);
  CHECK(curve.perturbed);
  REQUIRE(curve.breakpoints.size() == 2);
  CHECK(curve.breakpoints[0].first == 0);
  CHECK(curve.breakpoints[0].second.load(0) == 1);
  CHECK(curve.breakpoints[1].first == 1);
  CHECK(curve.breakpoints[1].second.load(1) == 1);
  // Every sampled price yields a genuine equilibrium of the original
  // instance.
  for (const char* l : {"0", "1/3", "1", "3/2", "7"}) {
    auto flow = evaluate(curve, Q(l));
    CHECK(verify_wardrop(inst, flow, {Q(l)}).equilibrium);
  }
}

TEST_CASE("breakpoint bound formula") {
  CHECK(lambda_max(testutil::pigou()) == 4);
  CHECK(lambda_max(testutil::t1()) == 0);
  // Fractional coefficients scale the travel-time sum by the denominator.
  auto inst = Instance::create(
      {"s", "t"}, {"co2"},
      {testutil::make_edge("e1", 0, 1, {{0, 1, 0}}, {{Q("1/3"), 0}}),
       testutil::make_edge("e2", 0, 1, {{0, 1, 1}}, {{0, 0}})},
      {Commodity{0, 1, 1}});
  // Travel times at total demand 1: 1 and 2; scale 3; bound 3*3 + 1.
  CHECK(lambda_max(inst) == 10);
  // The last breakpoint of its curve stays below the bound.
  auto curve = trace_curve(inst);
  CHECK(curve.breakpoints.back().first < lambda_max(inst));
}

TEST_CASE("multi-piece curves stay consistent with the solver") {
  std::mt19937_64 rng(89);
  for (int it = 0; it < 4; ++it) {
    auto inst = testutil::random_instance(rng, 5, 7, 2, 3);
    auto curve = trace_curve(inst);
    CHECK(curve.breakpoints.front().first == 0);
    // Strictly increasing breakpoint prices.
    for (size_t k = 0; k + 1 < curve.breakpoints.size(); ++k) {
      CHECK(curve.breakpoints[k].first < curve.breakpoints[k + 1].first);
    }
    Rational end = curve.terminal.start + 1;
    for (int k = 0; k <= 24; ++k) {
      Rational lam = end * Rational(k) / Rational(24);
      auto flow = evaluate(curve, lam);
      auto eq = solve_equilibrium(inst, {lam});
      for (int e = 0; e < inst.edge_count(); ++e) {
        CHECK(flow.load(e) == eq.flow.load(e));
      }
    }
  }
}

TEST_CASE("curves of random flat-piece instances select genuine equilibria") {
  std::mt19937_64 rng(73);
  int traced = 0;
  while (traced < 6) {
    auto inst = testutil::random_instance(rng, 3, 5, 1, 2, /*flat_pieces=*/true);
    if (inst.strictly_increasing()) continue;
    ++traced;
    auto curve = trace_curve(inst);
    CHECK(curve.perturbed);
    CHECK(curve.breakpoints.front().first == 0);
    // Sampled prices: breakpoints, interior points, and beyond the end.
    std::vector<Rational> samples{0, curve.terminal.start + 1};
    for (size_t k = 0; k + 1 < curve.breakpoints.size(); ++k) {
      samples.push_back(curve.breakpoints[k].first);
      samples.push_back(
          (curve.breakpoints[k].first + curve.breakpoints[k + 1].first) / Rational(2));
    }
    for (const auto& lam : samples) {
      auto flow = evaluate(curve, lam);
      CHECK(verify_wardrop(inst, flow, {lam}).equilibrium);
    }
    // Usage stays monotone along the selection.
    std::optional<Rational> prev;
    for (const auto& [lam, flow] : curve.breakpoints) {
      Rational g = total_externality(inst, flow)[0];
      if (prev) CHECK(!(*prev < g));
      prev = g;
    }
  }
}

TEST_CASE("curve properties on random strictly-increasing instances") {
  std::mt19937_64 rng(47);
  int instances = 0;
  while (instances < 12) {
    auto inst = testutil::random_instance(rng, 4, 6, 2, 2);
    ++instances;
    auto curve = trace_curve(inst);

    // Segment validity: interior prices reproduce the segment's state and
    // verify as equilibria; loads match the one-shot solver exactly.
    for (const auto& seg : curve.segments) {
      std::vector<Rational> probes;
      if (seg.hi) {
        for (int k = 1; k <= 8; ++k) {
          probes.push_back(seg.lo + (*seg.hi - seg.lo) * Rational(k) / Rational(9));
        }
      } else {
        for (int k = 1; k <= 3; ++k) probes.push_back(seg.lo + Rational(k));
      }
      for (const auto& lam : probes) {
        auto flow = evaluate(curve, lam);
        auto eq = solve_equilibrium(inst, {lam});
        for (int e = 0; e < inst.edge_count(); ++e) {
          CHECK(flow.load(e) == eq.flow.load(e));
        }
        CHECK(verify_wardrop(inst, flow, {lam}).equilibrium);
        if (seg.hi && seg.lo < lam && lam < *seg.hi) {
          CHECK(eq.state == seg.state);  // regimes are price intervals
        }
      }
    }

    // Evaluation at a breakpoint returns the recorded flow.
    for (const auto& [lam, flow] : curve.breakpoints) {
      auto again = evaluate(curve, lam);
      for (int i = 0; i < inst.commodity_count(); ++i) {
        for (int e = 0; e < inst.edge_count(); ++e) {
          CHECK(again.value(i, e) == flow.value(i, e));
        }
      }
    }

    // Along the curve the externality never increases and the travel-time
    // potential never decreases.
    std::optional<Rational> prev_g, prev_phi;
    for (const auto& [lam, flow] : curve.breakpoints) {
      Rational g = total_externality(inst, flow)[0];
      Rational phi = potential(inst, flow);
      if (prev_g) {
        CHECK(!(*prev_g < g));
        CHECK(!(phi < *prev_phi));
      }
      prev_g = g;
      prev_phi = phi;
    }

    // Breakpoint count bound.
    mpz_class bound(1);
    mpz_mul_2exp(bound.get_mpz_t(), bound.get_mpz_t(),
                 static_cast<mp_bitcnt_t>(inst.commodity_count()) *
                     static_cast<mp_bitcnt_t>(inst.edge_count()));
    for (int e = 0; e < inst.edge_count(); ++e) bound *= inst.piece_count();
    CHECK(mpz_class(static_cast<long>(curve.breakpoints.size())) <= bound);
  }
}
