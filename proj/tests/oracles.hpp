#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

// Oracles written without the library's optimizers.

namespace oracles {

// CHSH post-selected value of a local model in which each party has one lossy
// setting clicking with probability lossy (the other setting always clicks).
// A component is (a0, a1, b0, b1, lossy_a, lossy_b).
struct ChshComponent {
  std::array<int, 4> outcomes;
  int lossy_a;
  int lossy_b;
};

inline std::vector<ChshComponent> chsh_components() {
  std::vector<ChshComponent> out;
  for (int bits = 0; bits < 16; ++bits)
    for (int la = 0; la < 2; ++la)
      for (int lb = 0; lb < 2; ++lb)
        out.push_back({{(bits >> 3) & 1, (bits >> 2) & 1, (bits >> 1) & 1, bits & 1}, la, lb});
  return out;
}

// Σ_xy s_xy E_xy of the post-selected statistics of a weighted set of components.
inline double chsh_postselected(const std::vector<ChshComponent>& comps, const std::vector<int>& idx,
                                const std::vector<double>& w, double lossy) {
  double total = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto& c = comps[static_cast<std::size_t>(idx[k])];
        const double click = (c.lossy_a == x ? lossy : 1.0) * (c.lossy_b == y ? lossy : 1.0);
        const double corr = c.outcomes[x] == c.outcomes[2 + y] ? 1.0 : -1.0;
        num += w[k] * click * corr;
        den += w[k] * click;
      }
      if (den <= 0.0) return -1e300;
      total += (x == 1 && y == 1 ? -1.0 : 1.0) * num / den;
    }
  return total;
}

// Exhaustive search over all supports of up to three components with weights
// on a mesh of the given step.
inline double chsh_discard_grid(double eta_t, double step = 0.02) {
  const auto comps = chsh_components();
  const double lossy = 2 * eta_t - 1;
  const int n = static_cast<int>(comps.size());
  const int m = static_cast<int>(std::lround(1.0 / step));
  // Per component and setting pair: coincidence weight and signed correlator.
  std::vector<std::array<double, 4>> click(comps.size()), corr(comps.size());
  for (int i = 0; i < n; ++i)
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        const auto& c = comps[static_cast<std::size_t>(i)];
        click[i][x * 2 + y] = (c.lossy_a == x ? lossy : 1.0) * (c.lossy_b == y ? lossy : 1.0);
        corr[i][x * 2 + y] = c.outcomes[x] == c.outcomes[2 + y] ? 1.0 : -1.0;
      }
  auto value3 = [&](int i, int j, int k, double wi, double wj, double wk) {
    double total = 0.0;
    for (int c = 0; c < 4; ++c) {
      const double ki = wi * click[i][c], kj = wj * click[j][c], kk = wk * click[k][c];
      const double den = ki + kj + kk;
      if (den <= 0.0) return -1e300;
      total += (c == 3 ? -1.0 : 1.0) * (ki * corr[i][c] + kj * corr[j][c] + kk * corr[k][c]) / den;
    }
    return total;
  };
  double best = -1e300;
  for (int i = 0; i < n; ++i) best = std::max(best, value3(i, i, i, 1.0, 0.0, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int u = 1; u < m; ++u) best = std::max(best, value3(i, j, j, u * step, 1 - u * step, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int u = 1; u < m; ++u)
          for (int v = 1; u + v < m; ++v)
            best = std::max(best, value3(i, j, k, u * step, v * step, 1 - (u + v) * step));
  return best;
}

}  // namespace oracles
