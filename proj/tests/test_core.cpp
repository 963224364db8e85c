#include <catch_amalgamated.hpp>

#include <cmath>

#include "bellpost/bellpost.hpp"
#include "support.hpp"

using namespace bellpost;
using Catch::Approx;

namespace {
Behavior all_zero_behavior(const Scenario& s) {
  return Behavior::from_function(s, [](int a, int b, int, int) { return a == 0 && b == 0 ? 1.0 : 0.0; });
}
}  // namespace

TEST_CASE("scenario sizes and index layout") {
  const Scenario s = Scenario::binary(2, 3);
  CHECK(s.size() == 24);
  CHECK(s.settings(Party::alice) == 2);
  CHECK(s.settings(Party::bob) == 3);
  CHECK(s.index(1, 1, 1, 2) == s.size() - 1);
  const Scenario r = Scenario::raw_eberhard(2, 2);
  CHECK(r.outcomes() == 3);
  CHECK_FALSE(r.is_binary());
  CHECK_THROWS_AS(Scenario::binary(0, 2), InvalidArgument);
}

TEST_CASE("behavior validation") {
  const Scenario s = Scenario::binary(1, 1);
  CHECK_NOTHROW(Behavior(s, {0.5, 0.5, 0.0, 0.0}));
  CHECK_THROWS_AS(Behavior(s, {0.5, 0.4, 0.0, 0.0}), InvalidBehavior);
  CHECK_THROWS_AS(Behavior(s, {1.5, -0.5, 0.0, 0.0}), InvalidBehavior);
  CHECK_THROWS_AS(Behavior(s, {1.0, 0.0, 0.0}), InvalidBehavior);
  // Tiny negative entries are tolerated and read as zero.
  const Behavior p(s, {1.0 + 5e-13, -5e-13, 0.0, 0.0});
  CHECK(p(0, 1, 0, 0) == 0.0);
}

TEST_CASE("functional_value examples") {
  const Scenario s = Scenario::binary(2, 2);
  const Behavior zeros = all_zero_behavior(s);
  CHECK(functional_value(builtin_functional("CHSH"), zeros) == Approx(2.0).margin(1e-12));
  // 3 - 1 - 1 - 1 with both marginals equal to one.
  CHECK(functional_value(builtin_functional("CH"), zeros) == Approx(0.0).margin(1e-12));
  const BellFunctional zero(s, std::vector<Rational>(s.size()), Rational(0), Rational(0), Rational(0), "zero");
  SplitMix64 rng(7);
  CHECK(functional_value(zero, test_support::random_behavior(s, rng)) == 0.0);
  CHECK_THROWS_AS(functional_value(builtin_functional("I3322"), zeros), ScenarioMismatch);
}

TEST_CASE("marginal examples") {
  const Scenario s = Scenario::binary(2, 2);
  const Behavior u = uniform_behavior(s);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) CHECK(marginal(u, {Party::alice, 0, x, y}) == Approx(0.5));
  const Behavior prod = product_behavior(s, {{0.7, 0.3}, {0.7, 0.3}}, {{0.5, 0.5}, {0.5, 0.5}});
  for (int y = 0; y < 2; ++y) CHECK(marginal(prod, {Party::alice, 0, 1, y}) == Approx(0.7).margin(1e-15));
  CHECK_THROWS_AS(marginal(u, {Party::alice, 0, 2, 0}), InvalidArgument);

  const Behavior demo = discard_postselect(build_signaling_demo(0.5));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) CHECK(marginal(demo, {Party::alice, 0, x, y}) == (y == 0 ? 1.0 : 0.0));
}

TEST_CASE("ns_violation examples") {
  CHECK(ns_violation(uniform_behavior(Scenario::binary(3, 3))) == 0.0);
  CHECK(ns_violation(discard_postselect(build_signaling_demo(0.5))) == Approx(1.0).margin(1e-15));
  SplitMix64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const Behavior p = test_support::random_ns_behavior(2, 2, rng);
    CHECK(ns_violation(apply_assignment(p, rng.uniform(), rng.uniform(), AssignmentRule{1, 0})) <= 1e-12);
  }
}

TEST_CASE("builtin functionals") {
  const auto chsh = builtin_functional("CHSH");
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const int sign = ((x & y) ? -1 : 1) * ((a ^ b) ? -1 : 1);
          CHECK(chsh.coeff(a, b, x, y) == Rational(sign));
        }
  CHECK(*chsh.lower() == Rational(-2));
  CHECK(*chsh.upper() == Rational(2));

  const auto ch = builtin_functional("CH");
  CHECK(ch.coeff(0, 0, 1, 1) == Rational(-1));
  CHECK(ch.coeff(0, 0, 0, 1) == Rational(1));
  CHECK(ch.coeff(1, 1, 0, 0) == Rational(0));
  CHECK(*ch.lower() == Rational(-1));
  CHECK(*ch.upper() == Rational(0));

  CHECK(*builtin_functional("E").upper() == Rational(0));
  CHECK_FALSE(builtin_functional("E").scenario().is_binary());
  CHECK(*builtin_functional("I3322").upper() == Rational(6));
  CHECK(builtin_functional("I3322").marginals().size() == 3);
  CHECK(*builtin_functional("I3322_SYM").upper() == Rational(6));
  CHECK_THROWS_AS(builtin_functional("I4422"), InvalidArgument);
}

TEST_CASE("instantiate_representation") {
  const auto i3 = builtin_functional("I3322");
  const BellFunctional r0 = instantiate_representation(
      i3, std::vector<MarginalSpec>{{Party::bob, 1, 0, 0}, {Party::bob, 1, 1, 0}, {Party::alice, 1, 0, 0}});
  CHECK(r0.is_concrete());
  CHECK(r0.coeff(0, 1, 0, 0) == Rational(2));  // 2 P^B(1|0) at x=0
  CHECK_THROWS_AS(instantiate_representation(i3, std::vector<int>{0, 0}), InvalidArgument);
  CHECK_THROWS_AS(instantiate_representation(
                      i3, std::vector<MarginalSpec>{{Party::alice, 1, 0, 0}, {Party::bob, 1, 1, 0}, {Party::alice, 1, 0, 0}}),
                  InvalidArgument);
  const auto chsh = builtin_functional("CHSH");
  CHECK(instantiate_representation(chsh, std::vector<int>{}).joint() == chsh.joint());

  // Mirror of the signaling demo with three settings: hidden λ ∈ {0,1,2}, Alice
  // clicks iff x = λ, Bob outputs [λ = 2]. After discarding, Bob's marginal
  // P^B(1|0) read at context x equals [x = 2], so moving the 2·P^B(1|0) term from
  // x = 0 to x = 2 raises the value by exactly 2.
  const Scenario s = Scenario::binary(3, 3);
  std::vector<LhvComponent> comps;
  for (int l = 0; l < 3; ++l) {
    std::vector<double> a_click(3, 0.0);
    a_click[l] = 1.0;
    comps.push_back({1.0 / 3, {{0, 0, 0}, std::vector<int>(3, l == 2 ? 1 : 0)}, {a_click, {1, 1, 1}}});
  }
  comps[2].weight = 1.0 - 2.0 / 3;
  const Behavior sig = discard_postselect(LhvModel(s, comps));
  const BellFunctional r2 = instantiate_representation(i3, std::vector<int>{2, 0, 0});
  CHECK(functional_value(r2, sig) - functional_value(r0, sig) == Approx(2.0).margin(1e-12));
}

TEST_CASE("functional value is affine in the behavior") {
  SplitMix64 rng(3);
  const auto f = concrete(builtin_functional("I3322"));
  for (int i = 0; i < 100; ++i) {
    const Behavior p = test_support::random_behavior(f.scenario(), rng);
    const Behavior q = test_support::random_behavior(f.scenario(), rng);
    const double al = rng.uniform();
    const std::vector<Behavior> parts{p, q};
    const std::vector<double> w{al, 1 - al};
    CHECK(functional_value(f, mix(parts, w)) ==
          Approx(al * functional_value(f, p) + (1 - al) * functional_value(f, q)).margin(1e-12));
  }
}

TEST_CASE("representations agree on non-signaling behaviors") {
  SplitMix64 rng(5);
  const auto reps = enumerate_representations(builtin_functional("I3322"));
  for (int i = 0; i < 50; ++i) {
    const Behavior p = test_support::random_ns_behavior(3, 3, rng);
    const double ref = functional_value(reps.front().functional, p);
    for (const auto& r : reps) CHECK(functional_value(r.functional, p) == Approx(ref).margin(1e-12));
  }
}

TEST_CASE("product behaviors are non-signaling and marginals sum to one") {
  SplitMix64 rng(9);
  for (int i = 0; i < 100; ++i) {
    const Scenario s = Scenario::binary(3, 2);
    std::vector<std::vector<double>> pa, pb;
    for (int x = 0; x < 3; ++x) {
      const double v = rng.uniform();
      pa.push_back({v, 1 - v});
    }
    for (int y = 0; y < 2; ++y) {
      const double v = rng.uniform();
      pb.push_back({v, 1 - v});
    }
    CHECK(ns_violation(product_behavior(s, pa, pb)) <= 1e-12);
    const Behavior r = test_support::random_behavior(s, rng);
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 2; ++y)
        CHECK(marginal(r, {Party::alice, 0, x, y}) + marginal(r, {Party::alice, 1, x, y}) ==
              Approx(1.0).margin(1e-12));
  }
}
