#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "bellpost/bellpost.hpp"
#include "support.hpp"

using namespace bellpost;
using Catch::Approx;

namespace {

// Three-outcome behavior of a quantum strategy seen through honest lossy
// detectors, with ∅ recorded as its own outcome.
Behavior lossy_quantum(const QuantumStrategy& qs, double ea, double eb) {
  const Behavior p = quantum_behavior(qs);
  return Behavior::from_function(Scenario::raw_eberhard(2, 2), [&](int a, int b, int x, int y) {
    if (a < 2 && b < 2) return ea * eb * p(a, b, x, y);
    if (a < 2) return ea * (1 - eb) * quantum_marginal(qs, Party::alice, a, x);
    if (b < 2) return (1 - ea) * eb * quantum_marginal(qs, Party::bob, b, y);
    return (1 - ea) * (1 - eb);
  });
}

}  // namespace

TEST_CASE("assignment examples") {
  SplitMix64 rng(1);
  const Behavior p = test_support::random_ns_behavior(2, 2, rng);
  const Behavior same = apply_assignment(p, 1.0, 1.0, {0, 0});
  for (std::size_t i = 0; i < p.table().size(); ++i) CHECK(same.table()[i] == Approx(p.table()[i]).margin(1e-15));

  const Behavior all00 = apply_assignment(p, 0.0, 0.0, {0, 0});
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) CHECK(all00(0, 0, x, y) == 1.0);

  const Behavior bob_lost = apply_assignment(p, 1.0, 0.0, {1, 0});
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a) {
        CHECK(bob_lost(a, 0, x, y) == Approx(ns_marginal(p, Party::alice, a, x)).margin(1e-15));
        CHECK(bob_lost(a, 1, x, y) == 0.0);
      }

  CHECK_THROWS_AS(apply_assignment(discard_postselect(build_signaling_demo(0.5)), 0.9, 0.9, {0, 0}), SignalingInput);
  CHECK_THROWS_AS(apply_assignment(p, 1.1, 0.9, {0, 0}), InvalidArgument);
}

TEST_CASE("assignment preserves normalization and non-signaling") {
  SplitMix64 rng(2);
  for (int i = 0; i < 10000; ++i) {
    const int na = 2 + static_cast<int>(rng.next() % 2), nb = 2 + static_cast<int>(rng.next() % 2);
    const Behavior p = test_support::random_ns_behavior(na, nb, rng);
    const auto rule = AssignmentRule::all()[rng.next() % 4];
    // The constructor rejects anything off normalization by more than 1e-12.
    const Behavior q = apply_assignment(p, rng.uniform(), rng.uniform(), rule);
    REQUIRE(ns_violation(q) <= 1e-12);
  }
}

TEST_CASE("assignment components for CHSH") {
  const auto k = assignment_components(builtin_functional("CHSH"), chsh_optimal_strategy(), {0, 0});
  CHECK(k.q == Approx(2 * std::sqrt(2.0)).margin(1e-12));
  CHECK(k.w_a == Approx(0.0).margin(1e-12));
  CHECK(k.w_b == Approx(0.0).margin(1e-12));
  CHECK(k.d == Approx(2.0).margin(1e-12));

  // Separable strategy measuring z with outcomes equal to the assigned ones.
  const QuantumStrategy z{0.0, {{0, 0}, {0, 0}, {0, 0}}, {{0, 0}, {0, 0}, {0, 0}}};
  const auto f = concrete(builtin_functional("I3322"));
  const auto kz = assignment_components(f, z, {0, 0});
  CHECK(kz.q == Approx(kz.d).margin(1e-12));
  CHECK(kz.w_a == Approx(kz.d).margin(1e-12));
  CHECK(kz.w_b == Approx(kz.d).margin(1e-12));
}

TEST_CASE("bilinear identity of the assignment value") {
  SplitMix64 rng(3);
  for (const char* name : {"CHSH", "I3322", "I3322_SYM"}) {
    const auto f = concrete(builtin_functional(name));
    const int n = f.scenario().settings_a();
    for (int trial = 0; trial < 5; ++trial) {
      const auto qs = test_support::random_strategy(n, n, rng);
      const Behavior p = quantum_behavior(qs);
      for (const auto rule : AssignmentRule::all()) {
        const auto k = assignment_components(f, qs, rule);
        for (int i = 0; i <= 10; ++i)
          for (int j = 0; j <= 10; ++j) {
            const double ea = i / 10.0, eb = j / 10.0;
            const double direct = functional_value(f, apply_assignment(p, ea, eb, rule));
            CHECK(assignment_value(k, ea, eb) == Approx(direct).margin(1e-12));
            CHECK(assigned_value(f, qs, ea, eb, rule) == Approx(direct).margin(1e-12));
          }
      }
    }
  }
}

TEST_CASE("C-variant of the double-no-click term") {
  const AssignmentComponents k{3.0, 1.0, 2.0, 0.5};
  CHECK(assignment_value(k, 0.5, 0.5, DoubleNoClick::classical_maximum, 6.0) ==
        Approx(0.25 * 3 + 0.25 * 1 + 0.25 * 2 + 0.25 * 6).margin(1e-15));
  CHECK(assignment_value(k, 0.5, 0.5) == Approx(0.25 * 3 + 0.25 * 1 + 0.25 * 2 + 0.25 * 0.5).margin(1e-15));
}

TEST_CASE("discard post-selection") {
  const Scenario s = Scenario::binary(2, 2);
  SplitMix64 rng(4);
  const auto det = enumerate_deterministic(s);
  std::vector<LhvComponent> comps;
  for (int i = 0; i < 5; ++i) comps.push_back({0.2, det[rng.next() % det.size()], ClickPattern::always(s)});
  const LhvModel full(s, comps);
  const Behavior a = discard_postselect(full), b = mixture_behavior(full);
  for (std::size_t i = 0; i < a.table().size(); ++i) CHECK(a.table()[i] == Approx(b.table()[i]).margin(1e-15));

  // A single deterministic point post-selects to itself.
  const LhvModel one(s, {{1.0, det[6], {{1.0, 0.4}, {0.7, 1.0}}}});
  const Behavior p1 = discard_postselect(one), d1 = behavior_of(s, det[6]);
  for (std::size_t i = 0; i < p1.table().size(); ++i) CHECK(p1.table()[i] == Approx(d1.table()[i]).margin(1e-15));

  // Random click patterns: always normalized.
  for (int t = 0; t < 200; ++t) {
    std::vector<LhvComponent> cs;
    for (int i = 0; i < 4; ++i)
      cs.push_back({0.25, det[rng.next() % det.size()],
                    {{rng.uniform(0.1, 1), rng.uniform(0.1, 1)}, {rng.uniform(0.1, 1), rng.uniform(0.1, 1)}}});
    CHECK_NOTHROW(discard_postselect(LhvModel(s, cs)));
  }

  try {
    discard_postselect(LhvModel(s, {{1.0, det[0], {{1.0, 1.0}, {1.0, 0.0}}}}));
    FAIL("expected a degenerate post-selection");
  } catch (const DegeneratePostselection& e) {
    CHECK(e.x() == 0);
    CHECK(e.y() == 1);
  }
}

TEST_CASE("signaling demonstration") {
  CHECK_THROWS_AS(build_signaling_demo(0.0), InvalidArgument);
  CHECK_THROWS_AS(build_signaling_demo(1.0), InvalidArgument);
  for (double p0 : {0.5, 0.2, 0.9}) {
    const LhvModel m = build_signaling_demo(p0);
    const Behavior pre = mixture_behavior(m);
    CHECK(ns_violation(pre) == 0.0);
    for (int x = 0; x < 2; ++x) {
      CHECK(ns_marginal(pre, Party::alice, 0, x) == Approx(p0).margin(1e-15));
      CHECK(ns_marginal(pre, Party::alice, 1, x) == Approx(1 - p0).margin(1e-15));
    }
    for (int y = 0; y < 2; ++y) CHECK(ns_marginal(pre, Party::bob, 0, y) == 1.0);
    const Behavior post = discard_postselect(m);
    CHECK(ns_violation(post) == 1.0);
    for (int a = 0; a < 2; ++a)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) CHECK(post(a, 0, x, y) == (a == y ? 1.0 : 0.0));
  }
}

TEST_CASE("honest discard keeps the statistics") {
  SplitMix64 rng(5);
  const Behavior p = test_support::random_ns_behavior(2, 2, rng);
  const Behavior q = discard_honest(p, DetectorModel::uniform(2, 2, 0.7, 0.8));
  CHECK(std::equal(p.table().begin(), p.table().end(), q.table().begin()));
  CHECK_THROWS_AS(discard_honest(p, DetectorModel({0.5, 0.0}, {1.0, 1.0})), DegeneratePostselection);
  CHECK_THROWS_AS(discard_honest(p, DetectorModel::uniform(3, 2, 0.7, 0.8)), InvalidArgument);
  CHECK_THROWS_AS(DetectorModel({1.2}, {1.0}), InvalidArgument);
  CHECK(DetectorModel({0.5, 1.0}, {1.0, 0.5}).average_efficiency() == 0.75);
}

TEST_CASE("Eberhard merge") {
  const Scenario s3 = Scenario::raw_eberhard(2, 2);
  SplitMix64 rng(6);
  const Behavior two = test_support::random_ns_behavior(2, 2, rng);
  const Behavior lifted = Behavior::from_function(s3, [&](int a, int b, int x, int y) {
    return a < 2 && b < 2 ? two(a, b, x, y) : 0.0;
  });
  const Behavior back = eberhard_merge(lifted);
  for (std::size_t i = 0; i < two.table().size(); ++i) CHECK(back.table()[i] == two.table()[i]);

  const Behavior none = eberhard_merge(Behavior::from_function(
      s3, [](int a, int b, int, int) { return a == kNoClick && b == kNoClick ? 1.0 : 0.0; }));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) CHECK(none(1, 1, x, y) == 1.0);

  CHECK_THROWS_AS(eberhard_merge(two), InvalidArgument);
}

TEST_CASE("Eberhard functional equals CH on the merged behavior") {
  SplitMix64 rng(7);
  const auto e = builtin_functional("E");
  const auto ch = concrete(builtin_functional("CH"));
  for (int i = 0; i < 1000; ++i) {
    const Behavior p3 = lossy_quantum(test_support::random_strategy(2, 2, rng), rng.uniform(), rng.uniform());
    REQUIRE(ns_violation(p3) <= 1e-12);
    CHECK(functional_value(e, p3) == Approx(functional_value(ch, eberhard_merge(p3))).margin(1e-12));
  }
  // The merged functional reproduces E on every three-outcome table.
  const auto g = merge_functional(e);
  for (int i = 0; i < 100; ++i) {
    const Behavior p3 = test_support::random_behavior(Scenario::raw_eberhard(2, 2), rng);
    CHECK(functional_value(g, eberhard_merge(p3)) == Approx(functional_value(e, p3)).margin(1e-12));
  }
  CHECK_THROWS_AS(merge_functional(ch), InvalidArgument);
}

TEST_CASE("merge commutes with mixing") {
  SplitMix64 rng(8);
  const Scenario s3 = Scenario::raw_eberhard(2, 2);
  for (int i = 0; i < 100; ++i) {
    const Behavior p = test_support::random_behavior(s3, rng), q = test_support::random_behavior(s3, rng);
    const double w = rng.uniform();
    const std::vector<Behavior> b3{p, q}, b2{eberhard_merge(p), eberhard_merge(q)};
    const std::vector<double> ws{w, 1 - w};
    const Behavior l = eberhard_merge(mix(b3, ws)), r = mix(b2, ws);
    for (std::size_t k = 0; k < l.table().size(); ++k) CHECK(l.table()[k] == Approx(r.table()[k]).margin(1e-15));
  }
}
