#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bellpost/core.hpp"
#include "bellpost/geometry.hpp"

namespace bellpost {

// Local deterministic strategy: one binary outcome per setting for each party.
struct DeterministicStrategy {
  std::vector<int> a_map;
  std::vector<int> b_map;

  friend bool operator==(const DeterministicStrategy&, const DeterministicStrategy&) = default;
};

// Per-setting click probabilities of each party's detector.
struct ClickPattern {
  std::vector<double> a_click;
  std::vector<double> b_click;

  static ClickPattern always(const Scenario& s) {
    return {std::vector<double>(s.settings_a(), 1.0), std::vector<double>(s.settings_b(), 1.0)};
  }
};

struct LhvComponent {
  double weight = 0.0;
  DeterministicStrategy strategy;
  ClickPattern clicks;
};

// Mixture of deterministic strategies whose detector clicks may depend on the
// hidden variable.
class LhvModel {
 public:
  LhvModel(Scenario scenario, std::vector<LhvComponent> components)
      : scenario_(scenario), components_(std::move(components)) {
    if (!scenario_.is_binary()) throw InvalidArgument("LHV models use binary outcomes");
    if (components_.empty()) throw InvalidArgument("LHV model needs at least one component");
    double total = 0.0;
    for (const auto& c : components_) {
      if (!(c.weight >= 0.0)) throw InvalidArgument("LHV weights must be non-negative");
      total += c.weight;
      check_map(c.strategy.a_map, scenario_.settings_a());
      check_map(c.strategy.b_map, scenario_.settings_b());
      check_clicks(c.clicks.a_click, scenario_.settings_a());
      check_clicks(c.clicks.b_click, scenario_.settings_b());
    }
    if (std::fabs(total - 1.0) > kProbabilityTol)
      throw InvalidArgument("LHV weights must sum to one");
  }

  const Scenario& scenario() const noexcept { return scenario_; }
  const std::vector<LhvComponent>& components() const noexcept { return components_; }

 private:
  static void check_map(const std::vector<int>& m, int n) {
    if (static_cast<int>(m.size()) != n) throw InvalidArgument("strategy size mismatch");
    for (int v : m)
      if (v != 0 && v != 1) throw InvalidArgument("deterministic outcomes must be binary");
  }
  static void check_clicks(const std::vector<double>& c, int n) {
    if (static_cast<int>(c.size()) != n) throw InvalidArgument("click pattern size mismatch");
    for (double v : c)
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("click probabilities must be in [0,1]");
  }

  Scenario scenario_;
  std::vector<LhvComponent> components_;
};

// All 2^sa * 2^sb strategies, lexicographic in (a_map, b_map).
inline std::vector<DeterministicStrategy> enumerate_deterministic(const Scenario& s) {
  if (!s.is_binary()) throw InvalidArgument("deterministic enumeration needs binary outcomes");
  const int na = s.settings_a(), nb = s.settings_b();
  if (na + nb > 24) throw InvalidArgument("too many settings to enumerate");
  auto bits = [](unsigned code, int n) {
    std::vector<int> m(n);
    for (int i = 0; i < n; ++i) m[i] = static_cast<int>((code >> (n - 1 - i)) & 1u);
    return m;
  };
  std::vector<DeterministicStrategy> out;
  out.reserve(std::size_t{1} << (na + nb));
  for (unsigned ca = 0; ca < (1u << na); ++ca)
    for (unsigned cb = 0; cb < (1u << nb); ++cb) out.push_back({bits(ca, na), bits(cb, nb)});
  return out;
}

inline Behavior behavior_of(const Scenario& s, const DeterministicStrategy& d) {
  return Behavior::from_function(s, [&](int a, int b, int x, int y) {
    return (a == d.a_map.at(x) && b == d.b_map.at(y)) ? 1.0 : 0.0;
  });
}

// Exact value of a concrete functional on a deterministic strategy.
inline Rational deterministic_value(const BellFunctional& f, const DeterministicStrategy& d) {
  const Scenario& s = f.scenario();
  Rational v = f.constant();
  for (int x = 0; x < s.settings_a(); ++x)
    for (int y = 0; y < s.settings_b(); ++y) v += f.coeff(d.a_map[x], d.b_map[y], x, y);
  return v;
}

struct ClassicalBound {
  Rational lower;
  Rational upper;
  DeterministicStrategy argmin;  // lexicographically first minimizer
  DeterministicStrategy argmax;  // lexicographically first maximizer
};

inline ClassicalBound classical_bound(const BellFunctional& f) {
  if (!f.is_concrete())
    throw SymbolicFunctional("classical_bound: instantiate the marginal terms of '" + f.label() +
                             "' first");
  const auto strategies = enumerate_deterministic(f.scenario());
  ClassicalBound out{deterministic_value(f, strategies[0]), deterministic_value(f, strategies[0]),
                     strategies[0], strategies[0]};
  for (std::size_t i = 1; i < strategies.size(); ++i) {
    const Rational v = deterministic_value(f, strategies[i]);
    if (v < out.lower) {
      out.lower = v;
      out.argmin = strategies[i];
    }
    if (v > out.upper) {
      out.upper = v;
      out.argmax = strategies[i];
    }
  }
  return out;
}

// The behavior of an LHV model with every round kept (clicks ignored).
inline Behavior mixture_behavior(const LhvModel& m) {
  const Scenario& s = m.scenario();
  std::vector<double> t(s.size(), 0.0);
  for (const auto& c : m.components())
    for (int x = 0; x < s.settings_a(); ++x)
      for (int y = 0; y < s.settings_b(); ++y)
        t[s.index(c.strategy.a_map[x], c.strategy.b_map[y], x, y)] += c.weight;
  return Behavior(s, std::move(t));
}

// PR box P(ab|xy) = 1/2 [a⊕b = xy ⊕ αx ⊕ βy ⊕ γ].
inline Behavior pr_box(int alpha, int beta, int gamma) {
  return Behavior::from_function(Scenario::binary(2, 2), [=](int a, int b, int x, int y) {
    return ((a ^ b) == ((x & y) ^ (alpha & x) ^ (beta & y) ^ gamma)) ? 0.5 : 0.0;
  });
}

// Vertices of the two-setting, two-outcome non-signaling polytope: the 16
// deterministic behaviors followed by the 8 PR boxes.
inline std::vector<Behavior> ns_vertices_222() {
  const Scenario s = Scenario::binary(2, 2);
  std::vector<Behavior> out;
  for (const auto& d : enumerate_deterministic(s)) out.push_back(behavior_of(s, d));
  for (int alpha = 0; alpha < 2; ++alpha)
    for (int beta = 0; beta < 2; ++beta)
      for (int gamma = 0; gamma < 2; ++gamma) out.push_back(pr_box(alpha, beta, gamma));
  return out;
}

// Projects behaviors onto two functionals and returns the convex hull
// (counterclockwise, closing vertex not repeated).
inline std::vector<Point2> project_2d(const std::vector<Behavior>& points,
                                      const BellFunctional& axis1, const BellFunctional& axis2) {
  if (points.empty()) throw InvalidArgument("project_2d: empty point set");
  if (!axis1.is_concrete() || !axis2.is_concrete())
    throw SymbolicFunctional("project_2d: axes must be concrete functionals");
  std::vector<Point2> projected;
  projected.reserve(points.size());
  for (const auto& p : points)
    projected.push_back({functional_value(axis1, p), functional_value(axis2, p)});
  return convex_hull(std::move(projected));
}

}  // namespace bellpost
