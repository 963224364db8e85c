#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "bellpost/errors.hpp"

namespace bellpost {

// Outcomes substituted locally on a no-click round: strategy S_{a* b*}.
struct AssignmentRule {
  int a_star = 0;
  int b_star = 0;

  std::string name() const { return "S" + std::to_string(a_star) + std::to_string(b_star); }

  static AssignmentRule parse(const std::string& s) {
    if (s.size() == 3 && s[0] == 'S' && (s[1] == '0' || s[1] == '1') && (s[2] == '0' || s[2] == '1'))
      return {s[1] - '0', s[2] - '0'};
    throw InvalidArgument("unknown assignment rule '" + s + "' (expected S00, S01, S10 or S11)");
  }

  static std::vector<AssignmentRule> all() { return {{0, 0}, {0, 1}, {1, 0}, {1, 1}}; }

  friend bool operator==(const AssignmentRule&, const AssignmentRule&) = default;
};

// Click probability per party and setting. Honest detectors fail independently of
// everything else (the quantum side); dishonest ones may follow a hidden variable.
struct DetectorModel {
  std::vector<double> eta_a;
  std::vector<double> eta_b;
  bool honest = true;

  DetectorModel(std::vector<double> a, std::vector<double> b, bool is_honest = true)
      : eta_a(std::move(a)), eta_b(std::move(b)), honest(is_honest) {
    for (const auto* v : {&eta_a, &eta_b})
      for (double e : *v)
        if (!(e >= 0.0 && e <= 1.0)) throw InvalidArgument("detector efficiency outside [0,1]");
    if (eta_a.empty() || eta_b.empty()) throw InvalidArgument("detector model needs settings");
  }

  static DetectorModel uniform(int settings_a, int settings_b, double ea, double eb) {
    return {std::vector<double>(settings_a, ea), std::vector<double>(settings_b, eb)};
  }

  // Mean click probability over all entries of both parties.
  double average_efficiency() const {
    const double sum = std::accumulate(eta_a.begin(), eta_a.end(), 0.0) +
                       std::accumulate(eta_b.begin(), eta_b.end(), 0.0);
    return sum / static_cast<double>(eta_a.size() + eta_b.size());
  }
};

}  // namespace bellpost
