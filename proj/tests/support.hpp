#pragma once

#include <vector>

#include "bellpost/bellpost.hpp"

namespace test_support {

// Arbitrary normalized table, generally signaling.
inline bellpost::Behavior random_behavior(const bellpost::Scenario& s, bellpost::SplitMix64& rng) {
  std::vector<double> t(s.size());
  for (int x = 0; x < s.settings_a(); ++x)
    for (int y = 0; y < s.settings_b(); ++y) {
      double sum = 0.0;
      for (int a = 0; a < s.outcomes(); ++a)
        for (int b = 0; b < s.outcomes(); ++b) sum += t[s.index(a, b, x, y)] = rng.uniform() + 1e-3;
      for (int a = 0; a < s.outcomes(); ++a)
        for (int b = 0; b < s.outcomes(); ++b) t[s.index(a, b, x, y)] /= sum;
    }
  return bellpost::Behavior(s, std::move(t));
}

inline bellpost::QuantumStrategy random_strategy(int na, int nb, bellpost::SplitMix64& rng) {
  constexpr double pi = std::numbers::pi;
  bellpost::QuantumStrategy qs;
  qs.theta = rng.uniform(0.0, pi / 4);
  for (int i = 0; i < na; ++i) qs.meas_a.push_back({rng.uniform(0.0, pi), rng.uniform(0.0, 2 * pi)});
  for (int i = 0; i < nb; ++i) qs.meas_b.push_back({rng.uniform(0.0, pi), rng.uniform(0.0, 2 * pi)});
  return qs;
}

// Non-signaling: a random mixture of a quantum behavior, a deterministic point
// and (in the 2x2 case) a PR box.
inline bellpost::Behavior random_ns_behavior(int na, int nb, bellpost::SplitMix64& rng) {
  using namespace bellpost;
  const Scenario s = Scenario::binary(na, nb);
  std::vector<Behavior> parts{quantum_behavior(random_strategy(na, nb, rng))};
  const auto det = enumerate_deterministic(s);
  parts.push_back(behavior_of(s, det[rng.next() % det.size()]));
  if (na == 2 && nb == 2) parts.push_back(pr_box(rng.next() & 1, rng.next() & 1, rng.next() & 1));
  std::vector<double> w;
  double sum = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) sum += w.emplace_back(rng.uniform());
  for (double& v : w) v /= sum;
  return mix(parts, w);
}

}  // namespace test_support
