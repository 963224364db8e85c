#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bellpost/core.hpp"
#include "bellpost/detectors.hpp"
#include "bellpost/lhv.hpp"
#include "bellpost/parallel.hpp"
#include "bellpost/postprocess.hpp"
#include "bellpost/quantum.hpp"
#include "bellpost/random.hpp"

namespace bellpost {

// ---------------------------------------------------------------------------
// Critical efficiency under assignment
// ---------------------------------------------------------------------------

// One-parameter family of detector efficiencies (η_A, η_B) = point(t).
class EfficiencyRay {
 public:
  enum class Mode { symmetric, fixed_alice, ratio };

  static EfficiencyRay symmetric() { return EfficiencyRay(Mode::symmetric, 1.0); }
  static EfficiencyRay fixed_alice(double eta_a) {
    if (!(eta_a > 0.0 && eta_a <= 1.0)) throw InvalidArgument("fixed-alice efficiency must lie in (0,1]");
    return EfficiencyRay(Mode::fixed_alice, eta_a);
  }
  // η_A = r·η_B.
  static EfficiencyRay ratio(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("ratio must be positive");
    return EfficiencyRay(Mode::ratio, r);
  }

  // "symmetric", "fixed-alice=<v>", "ratio=<r>".
  static EfficiencyRay parse(const std::string& text) {
    auto value = [&](std::size_t pos) {
      try {
        std::size_t used = 0;
        const double v = std::stod(text.substr(pos), &used);
        if (used != text.size() - pos) throw InvalidArgument("");
        return v;
      } catch (...) {
        throw InvalidArgument("malformed ray '" + text + "'");
      }
    };
    if (text == "symmetric") return symmetric();
    if (text.rfind("fixed-alice=", 0) == 0) return fixed_alice(value(12));
    if (text.rfind("ratio=", 0) == 0) return ratio(value(6));
    throw InvalidArgument("unknown ray '" + text + "' (symmetric, fixed-alice=<v>, ratio=<r>)");
  }

  Mode mode() const noexcept { return mode_; }
  double parameter() const noexcept { return param_; }

  std::pair<double, double> point(double t) const noexcept {
    switch (mode_) {
      case Mode::symmetric: return {t, t};
      case Mode::fixed_alice: return {param_, t};
      case Mode::ratio: return {param_ * t, t};
    }
    return {t, t};
  }

  double max_parameter() const noexcept { return mode_ == Mode::ratio ? std::min(1.0, 1.0 / param_) : 1.0; }

  std::string str() const {
    switch (mode_) {
      case Mode::symmetric: return "symmetric";
      case Mode::fixed_alice: return "fixed-alice=" + std::to_string(param_);
      case Mode::ratio: return "ratio=" + std::to_string(param_);
    }
    return "";
  }

 private:
  EfficiencyRay(Mode m, double p) : mode_(m), param_(p) {}
  Mode mode_;
  double param_;
};

enum class ThresholdMethod { closed_form, bisection };

struct CriticalEfficiencyOptions {
  ThresholdMethod method = ThresholdMethod::closed_form;
  DoubleNoClick double_no_click = DoubleNoClick::deterministic_value;
};

namespace detail {

// g(t) = L(point(t)) - C = α t² + β t + γ along the ray.
struct RayQuadratic {
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  double operator()(double t) const noexcept { return (alpha * t + beta) * t + gamma; }
};

inline RayQuadratic ray_quadratic(const AssignmentComponents& k, double last, double c,
                                  const EfficiencyRay& ray) {
  const double q = k.q, wa = k.w_a, wb = k.w_b, d = last;
  switch (ray.mode()) {
    case EfficiencyRay::Mode::symmetric:
      return {q - wa - wb + d, wa + wb - 2 * d, d - c};
    case EfficiencyRay::Mode::fixed_alice: {
      const double v = ray.parameter();
      return {0.0, v * q + (1 - v) * wa - v * wb - (1 - v) * d, v * wb + (1 - v) * d - c};
    }
    case EfficiencyRay::Mode::ratio: {
      const double r = ray.parameter();
      return {r * (q - wa - wb + d), wa + r * wb - d - r * d, d - c};
    }
  }
  return {};
}

// Left end of the first sub-interval of (0, tmax] on which g > 0.
inline std::optional<double> first_positive_from_roots(const RayQuadratic& g, std::vector<double> roots,
                                                       double tmax) {
  std::vector<double> pts{0.0};
  std::sort(roots.begin(), roots.end());
  for (double r : roots)
    if (r > 0.0 && r < tmax) pts.push_back(r);
  pts.push_back(tmax);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] - pts[i] <= 0.0) continue;
    if (g(0.5 * (pts[i] + pts[i + 1])) > 0.0) return pts[i];
  }
  return std::nullopt;
}

inline std::optional<double> solve_by_bisection(const RayQuadratic& g, double tmax) {
  constexpr int kScan = 1000;
  double prev = 0.0;
  for (int i = 1; i <= kScan; ++i) {
    const double t = tmax * i / kScan;
    if (g(t) > 0.0) {
      if (g(prev) > 0.0) return prev;
      double lo = prev, hi = t;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? hi : lo) = mid;
      }
      return hi;
    }
    prev = t;
  }
  return std::nullopt;
}

}  // namespace detail

// Smallest ray parameter t ∈ (0, tmax] from which the assignment value exceeds
// the classical maximum c; nullopt when it never does.
inline std::optional<double> critical_efficiency(const AssignmentComponents& k, double c,
                                                 const EfficiencyRay& ray,
                                                 const CriticalEfficiencyOptions& opt = {}) {
  const double last = opt.double_no_click == DoubleNoClick::deterministic_value ? k.d : c;
  const detail::RayQuadratic g = detail::ray_quadratic(k, last, c, ray);
  const double tmax = ray.max_parameter();
  const double scale = std::max({1.0, std::fabs(g.beta), std::fabs(g.gamma)});
  if (opt.method == ThresholdMethod::bisection || std::fabs(g.alpha) <= 1e-14 * scale)
    return detail::solve_by_bisection(g, tmax);
  std::vector<double> roots;
  const double disc = g.beta * g.beta - 4 * g.alpha * g.gamma;
  if (disc >= 0.0) {
    // Numerically stable pair of roots.
    const double sq = std::sqrt(disc);
    const double qq = -0.5 * (g.beta + (g.beta >= 0 ? sq : -sq));
    if (qq != 0.0) {
      roots.push_back(qq / g.alpha);
      roots.push_back(g.gamma / qq);
    } else {
      roots.push_back(0.0);
    }
  }
  return detail::first_positive_from_roots(g, std::move(roots), tmax);
}

inline double classical_maximum(const BellFunctional& f) {
  return classical_bound(f).upper.to_double();
}

inline std::optional<double> critical_efficiency_assignment(const BellFunctional& f, const QuantumStrategy& qs,
                                                            AssignmentRule rule, const EfficiencyRay& ray,
                                                            const CriticalEfficiencyOptions& opt = {}) {
  const double c = classical_maximum(f);
  return critical_efficiency(assignment_components(f, qs, rule), c, ray, opt);
}

// ---------------------------------------------------------------------------
// Optimization of the assignment value
// ---------------------------------------------------------------------------

struct ThetaOptimum {
  double theta = 0.0;
  double value = 0.0;
  QuantumStrategy strategy;
  bool converged = false;
};

struct OptimizeThetaOptions {
  std::uint64_t seed = 0;
  int restarts = 20;
  std::optional<QuantumStrategy> warm_start;
  std::optional<double> fixed_theta;
  DoubleNoClick double_no_click = DoubleNoClick::deterministic_value;
};

// f on the point where both parties output their assigned value everywhere.
inline double assigned_point_value(const BellFunctional& f, AssignmentRule rule) {
  const Scenario& s = f.scenario();
  const DeterministicStrategy d{std::vector<int>(s.settings_a(), rule.a_star),
                                std::vector<int>(s.settings_b(), rule.b_star)};
  return deterministic_value(concrete(f), d).to_double();
}

// Maximizes η_Aη_B Q + (1-η_A)η_B W_A + η_A(1-η_B) W_B + (1-η_A)(1-η_B) D over
// states and measurements.
inline ThetaOptimum optimize_theta(const BellFunctional& f, double eta_a, double eta_b, AssignmentRule rule,
                                   const OptimizeThetaOptions& opt = {}) {
  if (!(eta_a > 0.0 && eta_a <= 1.0 && eta_b > 0.0 && eta_b <= 1.0))
    throw InvalidArgument("optimize_theta: efficiencies must lie in (0,1]");
  SeesawOptions s;
  s.seed = opt.seed;
  s.restarts = opt.restarts;
  s.eta_a = eta_a;
  s.eta_b = eta_b;
  s.rule = rule;
  s.warm_start = opt.warm_start;
  s.fixed_theta = opt.fixed_theta;
  const SeesawResult r = seesaw_optimize(f, s);
  double value = r.value;
  // The C-variant differs by a strategy-independent shift.
  if (opt.double_no_click == DoubleNoClick::classical_maximum)
    value += (1 - eta_a) * (1 - eta_b) * (classical_maximum(f) - assigned_point_value(f, rule));
  return {r.strategy.theta, value, r.strategy, r.converged};
}

struct OptimizedThreshold {
  double eta = 1.0;  // ray parameter
  QuantumStrategy strategy;
  int iterations = 0;
};

struct OptimizedThresholdOptions {
  std::uint64_t seed = 0;
  int restarts = 20;
  std::optional<double> fixed_theta;
  int max_iterations = 200;
  std::optional<QuantumStrategy> warm_start;
  DoubleNoClick double_no_click = DoubleNoClick::deterministic_value;
};

// Smallest critical efficiency along the ray over all strategies. Alternates
// between optimizing the assignment value at the current efficiency and
// replacing the efficiency by the exact critical efficiency of the optimizer;
// the sequence is non-increasing.
inline std::optional<OptimizedThreshold> optimized_critical_efficiency(
    const BellFunctional& f, AssignmentRule rule, const EfficiencyRay& ray,
    const OptimizedThresholdOptions& opt = {}) {
  const double c = classical_maximum(f);
  double t = ray.max_parameter();
  std::optional<QuantumStrategy> best = opt.warm_start;
  std::optional<OptimizedThreshold> out;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const auto [ea, eb] = ray.point(t);
    OptimizeThetaOptions o;
    o.seed = derive_seed(opt.seed, static_cast<std::uint64_t>(it));
    o.restarts = opt.restarts;
    o.warm_start = best;
    o.fixed_theta = opt.fixed_theta;
    const ThetaOptimum r = optimize_theta(f, ea, eb, rule, o);
    const auto t_new = critical_efficiency(assignment_components(f, r.strategy, rule), c, ray,
                                           {ThresholdMethod::closed_form, opt.double_no_click});
    if (!t_new) return out;
    if (out && *t_new >= out->eta - 1e-12) break;
    out = OptimizedThreshold{*t_new, r.strategy, it + 1};
    best = r.strategy;
    if (std::fabs(t - *t_new) < 1e-10) break;
    t = *t_new;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Violation regions
// ---------------------------------------------------------------------------

struct RuleOutcome {
  bool violated = false;
  double theta = 0.0;
  double value = 0.0;
};

struct RegionCell {
  double eta_a = 0.0;
  double eta_b = 0.0;
  std::vector<RuleOutcome> outcomes;  // parallel to RegionGrid::rules
};

struct RegionGrid {
  double step = 0.01;
  double lo = 0.0;
  int n = 0;  // grid values per axis: lo + i·step, i < n, last one is 1
  double classical_max = 0.0;
  std::vector<AssignmentRule> rules;
  std::vector<RegionCell> cells;  // index i_a * n + i_b

  const RegionCell& at(int ia, int ib) const { return cells[static_cast<std::size_t>(ia * n + ib)]; }
};

struct RegionOptions {
  double lo = 0.0;
  std::uint64_t seed = 0;
  int restarts = 20;  // cold restarts for the first cell of each row
  std::optional<double> fixed_theta;
  DoubleNoClick double_no_click = DoubleNoClick::deterministic_value;
};

inline std::vector<double> efficiency_grid(double lo, double step) {
  if (!(step > 0.0 && step <= 0.1)) throw InvalidArgument("grid step must lie in (0, 0.1]");
  if (!(lo >= 0.0 && lo < 1.0)) throw InvalidArgument("grid start must lie in [0,1)");
  const int n = static_cast<int>(std::floor((1.0 - lo) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = 1.0 - (n - 1 - i) * step;
  g[0] = std::max(g[0], lo);
  return g;
}

// For each (η_A, η_B) cell and rule, optimizes the assignment value and marks a
// violation when it exceeds the classical maximum by more than 1e-9. Each row of
// fixed η_A is scanned from η_B = 1 downwards, warm-starting every cell from its
// neighbor plus one cold restart. Zero efficiencies are skipped (never violating).
inline RegionGrid violation_region(const BellFunctional& f, const std::vector<AssignmentRule>& rules,
                                   double step, const RegionOptions& opt = {}) {
  const auto grid = efficiency_grid(opt.lo, step);
  RegionGrid out;
  out.step = step;
  out.lo = opt.lo;
  out.n = static_cast<int>(grid.size());
  out.rules = rules;
  out.classical_max = classical_maximum(f);
  out.cells.resize(grid.size() * grid.size());
  for (int ia = 0; ia < out.n; ++ia)
    for (int ib = 0; ib < out.n; ++ib) {
      auto& cell = out.cells[static_cast<std::size_t>(ia * out.n + ib)];
      cell.eta_a = grid[ia];
      cell.eta_b = grid[ib];
      cell.outcomes.resize(rules.size());
    }
  const std::size_t rows = rules.size() * grid.size();
  parallel_for(rows, [&](std::size_t job) {
    const std::size_t r = job / grid.size();
    const int ia = static_cast<int>(job % grid.size());
    std::optional<QuantumStrategy> prev;
    for (int ib = out.n - 1; ib >= 0; --ib) {
      auto& cell = out.cells[static_cast<std::size_t>(ia * out.n + ib)];
      RuleOutcome& o = cell.outcomes[r];
      if (cell.eta_a <= 0.0 || cell.eta_b <= 0.0) continue;
      OptimizeThetaOptions ot;
      ot.seed = derive_seed(opt.seed, job * 4096 + static_cast<std::uint64_t>(ib));
      ot.restarts = prev ? 2 : opt.restarts;
      ot.warm_start = prev;
      ot.fixed_theta = opt.fixed_theta;
      ot.double_no_click = opt.double_no_click;
      const ThetaOptimum best = optimize_theta(f, cell.eta_a, cell.eta_b, rules[r], ot);
      o.value = best.value;
      o.theta = best.theta;
      o.violated = best.value > out.classical_max + kOptimizationTol;
      prev = best.strategy;
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Discard: classical bound under post-selection
// ---------------------------------------------------------------------------

enum class DiscardMethod { restricted, refined };

struct DiscardBoundOptions {
  DiscardMethod method = DiscardMethod::restricted;
  std::uint64_t seed = 0;
  int restarts = 50;
  int max_iterations = 4000;
  // Optional additional starting point (mixture weights over the component list).
  std::vector<double> warm_start;
};

struct DiscardBoundResult {
  double value = 0.0;
  std::vector<double> weights;  // over discard_components()
};

// Lowest average efficiency at which a party can still click on every setting
// with probability bounded away from zero: 1 - 1/settings.
inline double discard_min_efficiency(const Scenario& s) {
  return std::max(0.0, 1.0 - 1.0 / std::min(s.settings_a(), s.settings_b()));
}

namespace detail {

// Click vectors of one party with average efficiency eta_t.
inline std::vector<std::vector<double>> click_patterns(int n, double eta_t, DiscardMethod method) {
  std::vector<std::vector<double>> out;
  const double lossy = n * eta_t - (n - 1);
  if (lossy >= 1.0 - 1e-15) return {std::vector<double>(n, 1.0)};
  for (int l = 0; l < n; ++l) {
    std::vector<double> c(n, 1.0);
    c[l] = lossy;
    out.push_back(std::move(c));
  }
  if (method == DiscardMethod::refined && n >= 2) {
    const double total = n * eta_t - (n - 2);  // shared by two lossy settings
    const double lo = std::max(0.0, total - 1.0), hi = std::min(1.0, total);
    constexpr int kSplits = 5;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = 1; k <= kSplits; ++k) {
          const double u = lo + (hi - lo) * k / (kSplits + 1);
          std::vector<double> c(n, 1.0);
          c[i] = u;
          c[j] = total - u;
          out.push_back(std::move(c));
        }
  }
  return out;
}

}  // namespace detail

// Hidden-variable components searched by the discard bound: every deterministic
// strategy paired with every admissible click vector of each party.
inline std::vector<LhvComponent> discard_components(const Scenario& s, double eta_t, DiscardMethod method) {
  const auto pa = detail::click_patterns(s.settings_a(), eta_t, method);
  const auto pb = detail::click_patterns(s.settings_b(), eta_t, method);
  std::vector<LhvComponent> out;
  for (const auto& d : enumerate_deterministic(s))
    for (const auto& ca : pa)
      for (const auto& cb : pb) out.push_back({0.0, d, {ca, cb}});
  return out;
}

namespace detail {

// Euclidean projection onto the probability simplex.
inline void project_to_simplex(std::vector<double>& v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, tau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumsum += u[i];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  for (double& x : v) x = std::max(0.0, x - tau);
}

// Post-selected functional value as a function of the mixture weights:
//   F(p) = const + Σ_xy N_xy(p) / D_xy(p), both linear in p.
class PostselectedObjective {
 public:
  PostselectedObjective(const BellFunctional& f, const std::vector<LhvComponent>& comps)
      : cells_(static_cast<std::size_t>(f.scenario().settings_a() * f.scenario().settings_b())),
        m_(comps.size()),
        constant_(f.constant().to_double()),
        k_(cells_ * m_),
        v_(cells_ * m_) {
    const Scenario& s = f.scenario();
    const auto c = f.dense();
    for (std::size_t i = 0; i < m_; ++i)
      for (int x = 0; x < s.settings_a(); ++x)
        for (int y = 0; y < s.settings_b(); ++y) {
          const std::size_t cell = static_cast<std::size_t>(x * s.settings_b() + y);
          k_[cell * m_ + i] = comps[i].clicks.a_click[x] * comps[i].clicks.b_click[y];
          v_[cell * m_ + i] = c[s.index(comps[i].strategy.a_map[x], comps[i].strategy.b_map[y], x, y)];
        }
  }

  std::size_t size() const noexcept { return m_; }

  double value(const std::vector<double>& p) const {
    double total = constant_;
    for (std::size_t cell = 0; cell < cells_; ++cell) {
      double num = 0.0, den = 0.0;
      const double* k = &k_[cell * m_];
      const double* v = &v_[cell * m_];
      for (std::size_t i = 0; i < m_; ++i) {
        den += p[i] * k[i];
        num += p[i] * k[i] * v[i];
      }
      if (den <= 1e-300) return -std::numeric_limits<double>::infinity();
      total += num / den;
    }
    return total;
  }

  double value_and_gradient(const std::vector<double>& p, std::vector<double>& g) const {
    std::fill(g.begin(), g.end(), 0.0);
    double total = constant_;
    for (std::size_t cell = 0; cell < cells_; ++cell) {
      double num = 0.0, den = 0.0;
      const double* k = &k_[cell * m_];
      const double* v = &v_[cell * m_];
      for (std::size_t i = 0; i < m_; ++i) {
        den += p[i] * k[i];
        num += p[i] * k[i] * v[i];
      }
      const double ratio = num / den;
      total += ratio;
      for (std::size_t i = 0; i < m_; ++i) g[i] += k[i] * (v[i] - ratio) / den;
    }
    return total;
  }

 private:
  std::size_t cells_;
  std::size_t m_;
  double constant_;
  std::vector<double> k_;  // coincidence probability per [cell][component]
  std::vector<double> v_;  // functional coefficient hit by the component per [cell][component]
};

// Projected-gradient ascent with Armijo backtracking from p.
inline double ascend(const PostselectedObjective& obj, std::vector<double>& p, int max_iterations) {
  std::vector<double> g(p.size()), trial(p.size());
  double value = obj.value_and_gradient(p, g);
  double step = 1.0;
  for (int it = 0; it < max_iterations; ++it) {
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < p.size(); ++i) trial[i] = p[i] + step * g[i];
      project_to_simplex(trial);
      double dir = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) dir += g[i] * (trial[i] - p[i]);
      if (dir <= 1e-18) break;  // stationary for this step size
      const double tv = obj.value(trial);
      if (tv >= value + 1e-4 * dir) {
        moved = true;
        const double gain = tv - value;
        p.swap(trial);
        value = obj.value_and_gradient(p, g);
        step *= 2.0;
        if (gain < 1e-15) return value;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return value;
}

}  // namespace detail

// Largest post-selected value of f reachable by LHV models whose every click
// vector has average efficiency eta_t. Restricted: one lossy setting per party;
// refined: also two lossy settings per party.
inline DiscardBoundResult discard_classical_bound(const BellFunctional& f, double eta_t,
                                                  const DiscardBoundOptions& opt = {}) {
  const Scenario& s = f.scenario();
  if (!s.is_binary()) throw InvalidArgument("discard_classical_bound: binary outcomes required");
  const double lo = discard_min_efficiency(s);
  if (!(eta_t > lo && eta_t <= 1.0))
    throw InvalidArgument("discard_classical_bound: eta_t must lie in (" + std::to_string(lo) + ", 1]");
  if (opt.restarts < 1) throw InvalidArgument("discard_classical_bound: restarts must be >= 1");
  const auto comps = discard_components(s, eta_t, opt.method);
  const detail::PostselectedObjective obj(f, comps);
  const std::size_t m = obj.size();
  const bool warm = opt.warm_start.size() == m;
  const std::size_t runs = static_cast<std::size_t>(opt.restarts) + (warm ? 1 : 0);

  std::vector<DiscardBoundResult> results(runs);
  parallel_for(runs, [&](std::size_t r) {
    std::vector<double> p(m);
    if (warm && r == runs - 1) {
      p = opt.warm_start;
    } else {
      // Sparse random start: exponential weights raised to a random power.
      SplitMix64 rng(derive_seed(opt.seed, r));
      const double sharp = 1.0 + 7.0 * rng.uniform();
      double sum = 0.0;
      for (auto& w : p) {
        w = std::pow(-std::log(1.0 - rng.uniform()), sharp);
        sum += w;
      }
      for (auto& w : p) w /= sum;
    }
    detail::project_to_simplex(p);
    results[r].value = detail::ascend(obj, p, opt.max_iterations);
    results[r].weights = std::move(p);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs; ++r)
    if (results[r].value > results[best].value) best = r;
  return results[best];
}

// LHV model realizing a discard bound result.
inline LhvModel discard_witness(const BellFunctional& f, double eta_t, DiscardMethod method,
                                const std::vector<double>& weights) {
  auto comps = discard_components(f.scenario(), eta_t, method);
  if (comps.size() != weights.size()) throw InvalidArgument("discard_witness: weight count mismatch");
  std::vector<LhvComponent> kept;
  double total = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i)
    if (weights[i] > 0.0) {
      comps[i].weight = weights[i];
      total += weights[i];
      kept.push_back(comps[i]);
    }
  for (auto& c : kept) c.weight /= total;
  return LhvModel(f.scenario(), std::move(kept));
}

// Post-selected behaviors of every single discard component and of every
// two-component mixture with weights k/weight_steps. Used to sample the set of
// behaviors reachable by cheating local models.
inline std::vector<Behavior> discard_family(const Scenario& s, double eta_t, DiscardMethod method,
                                            int weight_steps = 10) {
  if (weight_steps < 1) throw InvalidArgument("discard_family: weight_steps must be >= 1");
  const auto comps = discard_components(s, eta_t, method);
  std::vector<Behavior> out;
  for (const auto& c : comps) out.push_back(discard_postselect(LhvModel(s, {{1.0, c.strategy, c.clicks}})));
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (std::size_t j = i + 1; j < comps.size(); ++j)
      for (int k = 1; k < weight_steps; ++k) {
        const double w = static_cast<double>(k) / weight_steps;
        out.push_back(discard_postselect(
            LhvModel(s, {{w, comps[i].strategy, comps[i].clicks}, {1 - w, comps[j].strategy, comps[j].clicks}})));
      }
  return out;
}

enum class QuantumSource { maximally_entangled, optimized };

struct DiscardThresholdOptions {
  QuantumSource source = QuantumSource::maximally_entangled;
  std::uint64_t seed = 0;
  int bound_restarts = 50;
  int quantum_restarts = 20;
  double tolerance = 1e-4;
  DiscardMethod method = DiscardMethod::restricted;
};

struct DiscardThreshold {
  double eta_t = 1.0;         // smallest average efficiency found to violate
  double quantum_value = 0.0;  // unaffected by honest post-selection
};

// Smallest average efficiency at which the quantum value beats the discard bound
// of a concrete representation. nullopt when even η_T = 1 does not violate.
inline std::optional<DiscardThreshold> discard_threshold(const BellFunctional& representation,
                                                         const DiscardThresholdOptions& opt = {}) {
  SeesawOptions so;
  so.seed = opt.seed;
  so.restarts = opt.quantum_restarts;
  if (opt.source == QuantumSource::maximally_entangled) so.fixed_theta = std::numbers::pi / 4;
  const double q = seesaw_optimize(representation, so).value;

  DiscardBoundOptions bo;
  bo.seed = opt.seed;
  bo.restarts = opt.bound_restarts;
  bo.method = opt.method;
  auto violated = [&](double eta_t) {
    return q > discard_classical_bound(representation, eta_t, bo).value + kOptimizationTol;
  };
  if (!violated(1.0)) return std::nullopt;
  double lo = discard_min_efficiency(representation.scenario()), hi = 1.0;
  while (hi - lo > opt.tolerance) {
    const double mid = 0.5 * (lo + hi);
    (violated(mid) ? hi : lo) = mid;
  }
  return DiscardThreshold{hi, q};
}

// ---------------------------------------------------------------------------
// Representations
// ---------------------------------------------------------------------------

struct Representation {
  std::vector<int> contexts;  // one per marginal term, in term order
  BellFunctional functional;
  // Set when all marginal terms of each party share one context:
  // shared Bob-term context * settings_b + shared Alice-term context.
  std::optional<int> class_id;
};

inline std::vector<Representation> enumerate_representations(const BellFunctional& f) {
  const auto& terms = f.marginals();
  const Scenario& s = f.scenario();
  std::vector<int> radix;
  for (const auto& t : terms) radix.push_back(t.spec.party == Party::alice ? s.settings_b() : s.settings_a());
  std::vector<Representation> out;
  std::vector<int> ctx(terms.size(), 0);
  for (;;) {
    std::optional<int> shared_a, shared_b;
    bool shared = true;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      auto& slot = terms[k].spec.party == Party::alice ? shared_a : shared_b;
      if (slot && *slot != ctx[k]) shared = false;
      slot = ctx[k];
    }
    std::optional<int> cls;
    if (shared) cls = shared_b.value_or(0) * s.settings_b() + shared_a.value_or(0);
    out.push_back({ctx, instantiate_representation(f, ctx), cls});
    int k = static_cast<int>(terms.size()) - 1;
    while (k >= 0 && ++ctx[k] == radix[k]) ctx[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Equivalence under normalization and non-signaling
// ---------------------------------------------------------------------------

// Local relabeling: setting permutations, per-setting outcome flips and an
// optional exchange of the parties (applied first).
struct Relabeling {
  bool swap_parties = false;
  std::vector<int> perm_a, perm_b;
  std::vector<int> flip_a, flip_b;

  bool is_identity() const {
    for (std::size_t i = 0; i < perm_a.size(); ++i)
      if (perm_a[i] != static_cast<int>(i) || flip_a[i]) return false;
    for (std::size_t i = 0; i < perm_b.size(); ++i)
      if (perm_b[i] != static_cast<int>(i) || flip_b[i]) return false;
    return !swap_parties;
  }
};

inline BellFunctional relabel(const BellFunctional& f, const Relabeling& r) {
  const BellFunctional g = concrete(f);
  const Scenario& s = g.scenario();
  if (!s.is_binary()) throw InvalidArgument("relabel: binary outcomes required");
  const Scenario t = r.swap_parties ? Scenario::binary(s.settings_b(), s.settings_a()) : s;
  std::vector<Rational> joint(t.size());
  for (int x = 0; x < s.settings_a(); ++x)
    for (int y = 0; y < s.settings_b(); ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          int xx = x, yy = y, aa = a, bb = b;
          if (r.swap_parties) {
            std::swap(xx, yy);
            std::swap(aa, bb);
          }
          joint[t.index(aa ^ r.flip_a[xx], bb ^ r.flip_b[yy], r.perm_a[xx], r.perm_b[yy])] +=
              g.coeff(a, b, x, y);
        }
  return BellFunctional(t, std::move(joint), g.constant(), g.lower(), g.upper(), g.label() + "_relabeled");
}

struct EquivalenceCertificate {
  double alpha = 1.0;  // > 0
  double beta = 0.0;
  bool negated = false;  // f1 = α·(-f2) + β
  std::vector<double> combination;  // weights of the constraint vectors
  std::vector<std::string> constraints;
  double residual = 0.0;
  std::optional<Relabeling> relabeling;  // applied to f2
};

struct EquivalenceResult {
  bool equivalent = false;
  std::string reason;
  double residual = 0.0;  // of the best affine fit, also when not equivalent
  std::optional<EquivalenceCertificate> certificate;

  explicit operator bool() const noexcept { return equivalent; }
};

struct EquivalenceOptions {
  bool allow_relabeling = false;
};

namespace detail {

struct ConstraintBasis {
  Eigen::MatrixXd vectors;  // columns: normalization and NS equality vectors
  std::vector<std::string> labels;
  Eigen::MatrixXd orthonormal;  // basis of their span
};

inline ConstraintBasis constraint_basis(const Scenario& s) {
  std::vector<Eigen::VectorXd> cols;
  ConstraintBasis cb;
  const auto n = static_cast<Eigen::Index>(s.size());
  const int o = s.outcomes();
  for (int x = 0; x < s.settings_a(); ++x)
    for (int y = 0; y < s.settings_b(); ++y) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      for (int a = 0; a < o; ++a)
        for (int b = 0; b < o; ++b) v[static_cast<Eigen::Index>(s.index(a, b, x, y))] = 1.0;
      cols.push_back(v);
      cb.labels.push_back("norm(x=" + std::to_string(x) + ",y=" + std::to_string(y) + ")");
    }
  for (int x = 0; x < s.settings_a(); ++x)
    for (int a = 0; a < o; ++a)
      for (int y = 0; y + 1 < s.settings_b(); ++y) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        for (int b = 0; b < o; ++b) {
          v[static_cast<Eigen::Index>(s.index(a, b, x, y))] += 1.0;
          v[static_cast<Eigen::Index>(s.index(a, b, x, y + 1))] -= 1.0;
        }
        cols.push_back(v);
        cb.labels.push_back("nsA(a=" + std::to_string(a) + ",x=" + std::to_string(x) + ",y=" +
                            std::to_string(y) + "|" + std::to_string(y + 1) + ")");
      }
  for (int y = 0; y < s.settings_b(); ++y)
    for (int b = 0; b < o; ++b)
      for (int x = 0; x + 1 < s.settings_a(); ++x) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        for (int a = 0; a < o; ++a) {
          v[static_cast<Eigen::Index>(s.index(a, b, x, y))] += 1.0;
          v[static_cast<Eigen::Index>(s.index(a, b, x + 1, y))] -= 1.0;
        }
        cols.push_back(v);
        cb.labels.push_back("nsB(b=" + std::to_string(b) + ",y=" + std::to_string(y) + ",x=" +
                            std::to_string(x) + "|" + std::to_string(x + 1) + ")");
      }
  cb.vectors.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) cb.vectors.col(static_cast<Eigen::Index>(j)) = cols[j];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cb.vectors, Eigen::ComputeThinU);
  svd.setThreshold(1e-10);
  cb.orthonormal = svd.matrixU().leftCols(svd.rank());
  return cb;
}

inline Eigen::VectorXd as_vector(const BellFunctional& f) {
  const auto d = f.dense();
  return Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
}

inline bool bound_matches(const std::optional<Rational>& b1, const std::optional<Rational>& b2, double alpha,
                          double beta) {
  if (!b1 || !b2) return true;
  return std::fabs(b1->to_double() - (alpha * b2->to_double() + beta)) <= kOptimizationTol;
}

inline EquivalenceResult direct_equivalence(const BellFunctional& f1, const BellFunctional& f2,
                                            const ConstraintBasis& cb) {
  EquivalenceResult res;
  const Eigen::VectorXd c1 = as_vector(f1), c2 = as_vector(f2);
  const Eigen::MatrixXd& q = cb.orthonormal;
  const Eigen::VectorXd p1 = c1 - q * (q.transpose() * c1);
  const Eigen::VectorXd p2 = c2 - q * (q.transpose() * c2);
  const double n2 = p2.squaredNorm();
  if (n2 < 1e-20) {
    res.residual = p1.norm();
    res.reason = "second functional is constant on non-signaling behaviors";
    return res;
  }
  const double alpha = p1.dot(p2) / n2;
  res.residual = (p1 - alpha * p2).norm();
  if (!(res.residual < kOptimizationTol)) {
    res.reason = "coefficient residual " + std::to_string(res.residual) + " outside the constraint span";
    return res;
  }
  if (std::fabs(alpha) < 1e-12) {
    res.reason = "first functional is constant on non-signaling behaviors";
    return res;
  }
  const Behavior u = uniform_behavior(f1.scenario());
  const double beta = functional_value(f1, u) - alpha * functional_value(f2, u);

  EquivalenceCertificate cert;
  cert.negated = alpha < 0.0;
  cert.alpha = std::fabs(alpha);
  cert.beta = beta;
  cert.residual = res.residual;
  cert.constraints = cb.labels;
  const Eigen::VectorXd rest = c1 - alpha * c2;
  const Eigen::VectorXd mu = cb.vectors.completeOrthogonalDecomposition().solve(rest);
  cert.combination.assign(mu.data(), mu.data() + mu.size());

  const bool bounds_ok = cert.negated ? bound_matches(f1.upper(), f2.lower(), alpha, beta) &&
                                            bound_matches(f1.lower(), f2.upper(), alpha, beta)
                                      : bound_matches(f1.upper(), f2.upper(), alpha, beta) &&
                                            bound_matches(f1.lower(), f2.lower(), alpha, beta);
  if (!bounds_ok) {
    res.reason = "affine map does not carry the classical bounds onto each other";
    return res;
  }
  res.equivalent = true;
  res.reason = cert.negated ? "equivalent after negation" : "equivalent";
  res.certificate = std::move(cert);
  return res;
}

inline void for_each_relabeling(int na, int nb, bool allow_swap, const std::function<bool(const Relabeling&)>& fn) {
  std::vector<int> pa(na), pb(nb);
  for (int swap = 0; swap < (allow_swap ? 2 : 1); ++swap) {
    std::iota(pa.begin(), pa.end(), 0);
    do {
      std::iota(pb.begin(), pb.end(), 0);
      do {
        for (unsigned fa = 0; fa < (1u << na); ++fa)
          for (unsigned fb = 0; fb < (1u << nb); ++fb) {
            Relabeling r{swap == 1, pa, pb, std::vector<int>(na), std::vector<int>(nb)};
            for (int i = 0; i < na; ++i) r.flip_a[i] = (fa >> i) & 1u;
            for (int i = 0; i < nb; ++i) r.flip_b[i] = (fb >> i) & 1u;
            if (fn(r)) return;
          }
      } while (std::next_permutation(pb.begin(), pb.end()));
    } while (std::next_permutation(pa.begin(), pa.end()));
  }
}

}  // namespace detail

// Decides whether f1 = α f2 + β on every normalized non-signaling behavior, by
// projecting both coefficient vectors off the span of the normalization and
// non-signaling equality vectors. With allow_relabeling, local relabelings of f2
// are also tried when the direct check fails.
inline EquivalenceResult equivalence_check(const BellFunctional& f1, const BellFunctional& f2,
                                           const EquivalenceOptions& opt = {}) {
  require_same(f1.scenario(), f2.scenario(), "equivalence_check");
  if (!f1.is_concrete() || !f2.is_concrete())
    throw SymbolicFunctional("equivalence_check: functionals must be concrete");
  const auto cb = detail::constraint_basis(f1.scenario());
  EquivalenceResult direct = detail::direct_equivalence(f1, f2, cb);
  if (direct.equivalent || !opt.allow_relabeling || !f1.scenario().is_binary()) return direct;

  const Scenario& s = f1.scenario();
  std::optional<EquivalenceResult> found;
  detail::for_each_relabeling(s.settings_a(), s.settings_b(), s.settings_a() == s.settings_b(),
                              [&](const Relabeling& r) {
                                if (r.is_identity()) return false;
                                EquivalenceResult e = detail::direct_equivalence(f1, relabel(f2, r), cb);
                                if (!e.equivalent || e.certificate->negated) return false;
                                e.certificate->relabeling = r;
                                e.reason = "equivalent after local relabeling";
                                found = std::move(e);
                                return true;
                              });
  return found ? *found : direct;
}

}  // namespace bellpost
