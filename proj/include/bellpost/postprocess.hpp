#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "bellpost/core.hpp"
#include "bellpost/detectors.hpp"
#include "bellpost/lhv.hpp"
#include "bellpost/quantum.hpp"

namespace bellpost {

namespace detail {
inline void check_efficiency(double eta, const char* who) {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw InvalidArgument(std::string(who) + ": efficiency must lie in [0,1]");
}
}  // namespace detail

// Local substitution of a fixed outcome on no-click rounds, with detectors that
// click independently with probabilities eta_a and eta_b:
//   P'(ab|xy) = η_Aη_B P(ab|xy) + (1-η_A)η_B δ_{a,a*} P^B(b|y)
//             + η_A(1-η_B) δ_{b,b*} P^A(a|x) + (1-η_A)(1-η_B) δ_{a,a*}δ_{b,b*}.
inline Behavior apply_assignment(const Behavior& p, double eta_a, double eta_b, AssignmentRule rule) {
  const Scenario& s = p.scenario();
  if (!s.is_binary()) throw InvalidArgument("apply_assignment: binary outcomes required");
  detail::check_efficiency(eta_a, "apply_assignment");
  detail::check_efficiency(eta_b, "apply_assignment");
  if (const double v = ns_violation(p); v > kProbabilityTol)
    throw SignalingInput("apply_assignment: input behavior is signaling (violation " +
                         std::to_string(v) + ")");
  return Behavior::from_function(s, [&](int a, int b, int x, int y) {
    const double da = a == rule.a_star ? 1.0 : 0.0, db = b == rule.b_star ? 1.0 : 0.0;
    return eta_a * eta_b * p(a, b, x, y) + (1 - eta_a) * eta_b * da * ns_marginal(p, Party::bob, b, y) +
           eta_a * (1 - eta_b) * db * ns_marginal(p, Party::alice, a, x) +
           (1 - eta_a) * (1 - eta_b) * da * db;
  });
}

// The four behaviors an assignment run mixes, evaluated on f: both detectors
// click (Q), only Alice's fails (W_A), only Bob's fails (W_B), both fail (D).
struct AssignmentComponents {
  double q = 0.0;
  double w_a = 0.0;
  double w_b = 0.0;
  double d = 0.0;
};

inline AssignmentComponents assignment_components(const BellFunctional& f, const QuantumStrategy& qs,
                                                  AssignmentRule rule) {
  const Behavior p = quantum_behavior(qs);
  require_same(f.scenario(), p.scenario(), "assignment_components");
  const Scenario& s = p.scenario();
  auto delta = [](int u, int v) { return u == v ? 1.0 : 0.0; };
  const Behavior alice_miss = Behavior::from_function(s, [&](int a, int b, int, int y) {
    return delta(a, rule.a_star) * quantum_marginal(qs, Party::bob, b, y);
  });
  const Behavior bob_miss = Behavior::from_function(s, [&](int a, int b, int x, int) {
    return delta(b, rule.b_star) * quantum_marginal(qs, Party::alice, a, x);
  });
  const Behavior both_miss = Behavior::from_function(
      s, [&](int a, int b, int, int) { return delta(a, rule.a_star) * delta(b, rule.b_star); });
  return {functional_value(f, p), functional_value(f, alice_miss), functional_value(f, bob_miss),
          functional_value(f, both_miss)};
}

// How the both-detectors-fail term is weighted in the threshold expression.
enum class DoubleNoClick {
  deterministic_value,  // D: f on the assigned deterministic point
  classical_maximum     // C: the published form, which uses the classical bound
};

// η_Aη_B Q + (1-η_A)η_B W_A + η_A(1-η_B) W_B + (1-η_A)(1-η_B) (D or C).
inline double assignment_value(const AssignmentComponents& k, double eta_a, double eta_b,
                               DoubleNoClick mode = DoubleNoClick::deterministic_value,
                               double classical_max = 0.0) {
  const double last = mode == DoubleNoClick::deterministic_value ? k.d : classical_max;
  return eta_a * eta_b * k.q + (1 - eta_a) * eta_b * k.w_a + eta_a * (1 - eta_b) * k.w_b +
         (1 - eta_a) * (1 - eta_b) * last;
}

// Statistics kept after dropping every round without a coincident click.
inline Behavior discard_postselect(const LhvModel& m) {
  const Scenario& s = m.scenario();
  std::vector<double> t(s.size(), 0.0);
  for (int x = 0; x < s.settings_a(); ++x)
    for (int y = 0; y < s.settings_b(); ++y) {
      double coincidence = 0.0;
      for (const auto& c : m.components()) {
        const double k = c.weight * c.clicks.a_click[x] * c.clicks.b_click[y];
        coincidence += k;
        t[s.index(c.strategy.a_map[x], c.strategy.b_map[y], x, y)] += k;
      }
      if (coincidence <= kProbabilityTol) throw DegeneratePostselection(x, y);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) t[s.index(a, b, x, y)] /= coincidence;
    }
  return Behavior(s, std::move(t));
}

// Discarding with honest detectors: clicks are independent of the source, so the
// kept statistics equal the input. Throws when some setting pair never
// produces a coincidence.
inline Behavior discard_honest(const Behavior& p, const DetectorModel& d) {
  const Scenario& s = p.scenario();
  if (static_cast<int>(d.eta_a.size()) != s.settings_a() ||
      static_cast<int>(d.eta_b.size()) != s.settings_b())
    throw InvalidArgument("detector model does not match scenario");
  if (!d.honest) throw InvalidArgument("discard_honest: detector model is not honest");
  for (int x = 0; x < s.settings_a(); ++x)
    for (int y = 0; y < s.settings_b(); ++y)
      if (d.eta_a[x] * d.eta_b[y] <= kProbabilityTol) throw DegeneratePostselection(x, y);
  return p;
}

// Two hidden values λ ∈ {0,1} with weights (p0, 1-p0): a = λ, b = 0, Alice
// always clicks, Bob clicks iff y = λ.
inline LhvModel build_signaling_demo(double p0) {
  if (!(p0 > 0.0 && p0 < 1.0))
    throw InvalidArgument("build_signaling_demo: p0 must lie strictly between 0 and 1");
  const Scenario s = Scenario::binary(2, 2);
  std::vector<LhvComponent> comps;
  for (int lambda = 0; lambda < 2; ++lambda) {
    LhvComponent c;
    c.weight = lambda == 0 ? p0 : 1 - p0;
    c.strategy = {{lambda, lambda}, {0, 0}};
    c.clicks = {{1.0, 1.0}, {lambda == 0 ? 1.0 : 0.0, lambda == 1 ? 1.0 : 0.0}};
    comps.push_back(std::move(c));
  }
  return LhvModel(s, std::move(comps));
}

// Treats outcomes 1 and ∅ as a single outcome 1 for both parties.
inline Behavior eberhard_merge(const Behavior& p3) {
  const Scenario& s3 = p3.scenario();
  if (s3.is_binary()) throw InvalidArgument("eberhard_merge: expects a three-outcome behavior");
  const Scenario s = Scenario::binary(s3.settings_a(), s3.settings_b());
  std::vector<double> t(s.size(), 0.0);
  for (int x = 0; x < s.settings_a(); ++x)
    for (int y = 0; y < s.settings_b(); ++y)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) t[s.index(std::min(a, 1), std::min(b, 1), x, y)] += p3(a, b, x, y);
  return Behavior(s, std::move(t));
}

// Binary functional g with g(eberhard_merge(P)) = f(P) for every three-outcome P.
// Exists only when f gives outcomes 1 and ∅ identical coefficients.
inline BellFunctional merge_functional(const BellFunctional& f3) {
  const Scenario& s3 = f3.scenario();
  if (s3.is_binary()) throw InvalidArgument("merge_functional: expects a three-outcome functional");
  if (!f3.is_concrete()) throw SymbolicFunctional("merge_functional: functional must be concrete");
  const Scenario s = Scenario::binary(s3.settings_a(), s3.settings_b());
  std::vector<Rational> joint(s.size());
  for (int x = 0; x < s.settings_a(); ++x)
    for (int y = 0; y < s.settings_b(); ++y)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const Rational& c = f3.coeff(a, b, x, y);
          const Rational& rep = f3.coeff(std::min(a, 1), std::min(b, 1), x, y);
          if (!(c == rep))
            throw InvalidArgument("merge_functional: coefficients of outcomes 1 and no-click differ at (x=" +
                                  std::to_string(x) + ", y=" + std::to_string(y) + ")");
          if (a < 2 && b < 2) joint[s.index(a, b, x, y)] = c;
        }
  return BellFunctional(s, std::move(joint), f3.constant(), f3.lower(), f3.upper(),
                        f3.label() + "_merged");
}

}  // namespace bellpost
