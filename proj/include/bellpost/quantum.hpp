#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "bellpost/core.hpp"
#include "bellpost/detectors.hpp"
#include "bellpost/parallel.hpp"
#include "bellpost/random.hpp"

namespace bellpost {

// Measurement direction on the Bloch sphere.
struct BlochAngles {
  double polar = 0.0;
  double azimuth = 0.0;
};

using Vec3 = std::array<double, 3>;

inline Vec3 to_vector(const BlochAngles& b) {
  return {std::sin(b.polar) * std::cos(b.azimuth), std::sin(b.polar) * std::sin(b.azimuth),
          std::cos(b.polar)};
}

inline BlochAngles to_angles(const Vec3& v) {
  const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  BlochAngles b{std::acos(std::clamp(v[2] / r, -1.0, 1.0)), std::atan2(v[1], v[0])};
  if (b.azimuth < 0.0) b.azimuth += 2.0 * std::numbers::pi;
  return b;
}

// State cosθ|00⟩ + sinθ|11⟩ measured projectively; outcome 0 is the +1
// eigenprojector of the Bloch-direction observable.
struct QuantumStrategy {
  double theta = std::numbers::pi / 4;
  std::vector<BlochAngles> meas_a;
  std::vector<BlochAngles> meas_b;

  Scenario scenario() const {
    return Scenario::binary(static_cast<int>(meas_a.size()), static_cast<int>(meas_b.size()));
  }

  void validate() const {
    if (meas_a.empty() || meas_b.empty()) throw InvalidArgument("strategy needs measurements");
    if (!(theta >= -1e-15 && theta <= std::numbers::pi / 4 + 1e-15))
      throw InvalidArgument("theta must lie in [0, pi/4]");
  }
};

// Alice 0, π/2 and Bob π/4, -π/4 in the x-z plane on the maximally entangled state.
inline QuantumStrategy chsh_optimal_strategy() {
  constexpr double pi = std::numbers::pi;
  return {pi / 4, {{0.0, 0.0}, {pi / 2, 0.0}}, {{pi / 4, 0.0}, {pi / 4, pi}}};
}

namespace detail {

// Bloch-vector form of a strategy plus cached state parameters.
struct BlochStrategy {
  double theta = 0.0;
  std::vector<Vec3> na;
  std::vector<Vec3> nb;

  explicit BlochStrategy(const QuantumStrategy& qs) : theta(qs.theta) {
    for (const auto& m : qs.meas_a) na.push_back(to_vector(m));
    for (const auto& m : qs.meas_b) nb.push_back(to_vector(m));
  }
  BlochStrategy() = default;

  QuantumStrategy to_strategy() const {
    QuantumStrategy qs{theta, {}, {}};
    for (const auto& v : na) qs.meas_a.push_back(to_angles(v));
    for (const auto& v : nb) qs.meas_b.push_back(to_angles(v));
    return qs;
  }
};

inline double correlator(const Vec3& na, const Vec3& nb, double s2) {
  return s2 * (na[0] * nb[0] - na[1] * nb[1]) + na[2] * nb[2];
}

// Born-rule table of the strategy, layout of Behavior::table().
inline std::vector<double> quantum_table(const BlochStrategy& bs) {
  const Scenario s = Scenario::binary(static_cast<int>(bs.na.size()), static_cast<int>(bs.nb.size()));
  const double c2 = std::cos(2 * bs.theta), s2 = std::sin(2 * bs.theta);
  std::vector<double> t(s.size());
  for (int x = 0; x < s.settings_a(); ++x)
    for (int y = 0; y < s.settings_b(); ++y) {
      const double ma = c2 * bs.na[x][2], mb = c2 * bs.nb[y][2];
      const double e = correlator(bs.na[x], bs.nb[y], s2);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double sa = 1 - 2 * a, sb = 1 - 2 * b;
          t[s.index(a, b, x, y)] = 0.25 * (1 + sa * ma + sb * mb + sa * sb * e);
        }
    }
  return t;
}

}  // namespace detail

inline Behavior quantum_behavior(const QuantumStrategy& qs) {
  qs.validate();
  return Behavior(qs.scenario(), detail::quantum_table(detail::BlochStrategy(qs)));
}

// Single-party Born-rule marginal; independent of the other party by construction.
inline double quantum_marginal(const QuantumStrategy& qs, Party party, int outcome, int setting) {
  qs.validate();
  const auto& meas = party == Party::alice ? qs.meas_a : qs.meas_b;
  if (setting < 0 || setting >= static_cast<int>(meas.size()) || outcome < 0 || outcome > 1)
    throw InvalidArgument("quantum_marginal: setting or outcome out of range");
  const double m = std::cos(2 * qs.theta) * to_vector(meas[setting])[2];
  return 0.5 * (1 + (outcome == 0 ? m : -m));
}

namespace detail {

// Value of a functional on the assignment-processed quantum behavior
//   η_Aη_B P + (1-η_A)η_B δ_{a,a*} P^B + η_A(1-η_B) δ_{b,b*} P^A + (1-η_A)(1-η_B) δδ,
// organized so that it is affine in each single measurement direction and a
// sinusoid in 2θ. η_A = η_B = 1 gives the plain quantum value.
class AssignedObjective {
 public:
  AssignedObjective(const BellFunctional& f, double eta_a, double eta_b, AssignmentRule rule)
      : na_(f.scenario().settings_a()),
        nb_(f.scenario().settings_b()),
        eta_a_(eta_a),
        eta_b_(eta_b),
        constant_(f.constant().to_double()),
        cells_(static_cast<std::size_t>(na_ * nb_)) {
    if (!f.scenario().is_binary()) throw InvalidArgument("quantum objective needs binary outcomes");
    const Scenario& s = f.scenario();
    const auto c = f.dense();
    for (int x = 0; x < na_; ++x)
      for (int y = 0; y < nb_; ++y) {
        Cell& cell = cells_[x * nb_ + y];
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            const double v = c[s.index(a, b, x, y)];
            const double sa = 1 - 2 * a, sb = 1 - 2 * b;
            cell.c0 += v;
            cell.ca += sa * v;
            cell.cb += sb * v;
            cell.cab += sa * sb * v;
            if (a == rule.a_star) {
              cell.alice_miss0 += v;
              cell.alice_miss_b += sb * v;
            }
            if (b == rule.b_star) {
              cell.bob_miss0 += v;
              cell.bob_miss_a += sa * v;
            }
            if (a == rule.a_star && b == rule.b_star) cell.both_miss = v;
          }
      }
  }

  double value(const BlochStrategy& bs) const {
    const double c2 = std::cos(2 * bs.theta), s2 = std::sin(2 * bs.theta);
    const double both = eta_a_ * eta_b_, am = (1 - eta_a_) * eta_b_, bm = eta_a_ * (1 - eta_b_),
                 none = (1 - eta_a_) * (1 - eta_b_);
    double v = constant_;
    for (int x = 0; x < na_; ++x)
      for (int y = 0; y < nb_; ++y) {
        const Cell& k = cells_[x * nb_ + y];
        const double ma = c2 * bs.na[x][2], mb = c2 * bs.nb[y][2];
        const double e = correlator(bs.na[x], bs.nb[y], s2);
        v += both * 0.25 * (k.c0 + k.ca * ma + k.cb * mb + k.cab * e);
        v += am * 0.5 * (k.alice_miss0 + k.alice_miss_b * mb);
        v += bm * 0.5 * (k.bob_miss0 + k.bob_miss_a * ma);
        v += none * k.both_miss;
      }
    return v;
  }

  // Coefficient vector g with value = const + g · n_A[x] (Bob fixed).
  Vec3 alice_gradient(const BlochStrategy& bs, int x) const {
    const double c2 = std::cos(2 * bs.theta), s2 = std::sin(2 * bs.theta);
    Vec3 g{0, 0, 0};
    for (int y = 0; y < nb_; ++y) {
      const Cell& k = cells_[x * nb_ + y];
      const double w = 0.25 * eta_a_ * eta_b_;
      g[0] += w * k.cab * s2 * bs.nb[y][0];
      g[1] -= w * k.cab * s2 * bs.nb[y][1];
      g[2] += w * (k.ca * c2 + k.cab * bs.nb[y][2]) + 0.5 * eta_a_ * (1 - eta_b_) * k.bob_miss_a * c2;
    }
    return g;
  }

  Vec3 bob_gradient(const BlochStrategy& bs, int y) const {
    const double c2 = std::cos(2 * bs.theta), s2 = std::sin(2 * bs.theta);
    Vec3 g{0, 0, 0};
    for (int x = 0; x < na_; ++x) {
      const Cell& k = cells_[x * nb_ + y];
      const double w = 0.25 * eta_a_ * eta_b_;
      g[0] += w * k.cab * s2 * bs.na[x][0];
      g[1] -= w * k.cab * s2 * bs.na[x][1];
      g[2] += w * (k.cb * c2 + k.cab * bs.na[x][2]) + 0.5 * (1 - eta_a_) * eta_b_ * k.alice_miss_b * c2;
    }
    return g;
  }

  int settings_a() const noexcept { return na_; }
  int settings_b() const noexcept { return nb_; }

 private:
  struct Cell {
    double c0 = 0, ca = 0, cb = 0, cab = 0;
    double alice_miss0 = 0, alice_miss_b = 0;  // Σ_b c(a*,b), Σ_b c(a*,b)(-1)^b
    double bob_miss0 = 0, bob_miss_a = 0;      // Σ_a c(a,b*), Σ_a c(a,b*)(-1)^a
    double both_miss = 0;                      // c(a*,b*)
  };

  int na_;
  int nb_;
  double eta_a_;
  double eta_b_;
  double constant_;
  std::vector<Cell> cells_;
};

// Maximizes fn on [lo, hi] assuming unimodality.
template <class Fn>
double golden_section_max(Fn&& fn, double lo, double hi, double tol = 1e-12) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > tol) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    }
  }
  return 0.5 * (a + b);
}

inline Vec3 normalized_or(const Vec3& g, const Vec3& fallback) {
  const double n = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
  if (n < 1e-300) return fallback;
  return {g[0] / n, g[1] / n, g[2] / n};
}

}  // namespace detail

struct SeesawOptions {
  std::optional<double> fixed_theta;  // nullopt: θ is optimized
  int restarts = 20;
  std::uint64_t seed = 0;
  int max_sweeps = 500;
  double tolerance = 1e-10;
  // Assignment post-processing of the quantum behavior (1, 1: none).
  double eta_a = 1.0;
  double eta_b = 1.0;
  AssignmentRule rule{};
  // Used as restart 0 when present; remaining restarts are random.
  std::optional<QuantumStrategy> warm_start;
  bool record_trace = false;
};

struct SeesawResult {
  double value = 0.0;
  QuantumStrategy strategy;
  bool converged = false;  // false: sweep cap hit, best-so-far returned
  int sweeps = 0;
  int best_restart = 0;
  std::vector<double> trace;  // value after each sweep of the best restart
};

namespace detail {

inline BlochStrategy random_strategy(int na, int nb, std::optional<double> theta, SplitMix64& rng) {
  constexpr double pi = std::numbers::pi;
  BlochStrategy bs;
  bs.theta = theta ? *theta : rng.uniform(0.0, pi / 4);
  for (int i = 0; i < na; ++i) bs.na.push_back(to_vector({rng.uniform(0.0, pi), rng.uniform(0.0, 2 * pi)}));
  for (int i = 0; i < nb; ++i) bs.nb.push_back(to_vector({rng.uniform(0.0, pi), rng.uniform(0.0, 2 * pi)}));
  return bs;
}

inline SeesawResult seesaw_single(const AssignedObjective& obj, BlochStrategy bs,
                                  const SeesawOptions& opt) {
  constexpr double pi = std::numbers::pi;
  SeesawResult r;
  double value = obj.value(bs);
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    const double before = value;
    for (int x = 0; x < obj.settings_a(); ++x)
      bs.na[x] = normalized_or(obj.alice_gradient(bs, x), bs.na[x]);
    for (int y = 0; y < obj.settings_b(); ++y)
      bs.nb[y] = normalized_or(obj.bob_gradient(bs, y), bs.nb[y]);
    value = obj.value(bs);
    if (!opt.fixed_theta) {
      BlochStrategy trial = bs;
      auto at = [&](double t) {
        trial.theta = t;
        return obj.value(trial);
      };
      double best_t = golden_section_max(at, 0.0, pi / 4);
      double best_v = at(best_t);
      for (double edge : {0.0, pi / 4})
        if (const double v = at(edge); v > best_v) {
          best_v = v;
          best_t = edge;
        }
      if (best_v > value) {
        bs.theta = best_t;
        value = best_v;
      }
    }
    if (opt.record_trace) r.trace.push_back(value);
    r.sweeps = sweep;
    if (std::fabs(value - before) < opt.tolerance) {
      r.converged = true;
      break;
    }
  }
  r.value = value;
  r.strategy = bs.to_strategy();
  return r;
}

}  // namespace detail

// Alternating ascent over Alice's directions, Bob's directions and (optionally) θ,
// best over restarts. Deterministic for a given seed.
inline SeesawResult seesaw_optimize(const BellFunctional& f, const SeesawOptions& opt = {}) {
  if (!f.is_concrete())
    throw SymbolicFunctional("seesaw_optimize: instantiate the marginal terms first");
  if (opt.restarts < 1) throw InvalidArgument("seesaw_optimize: restarts must be >= 1");
  if (opt.fixed_theta && !(*opt.fixed_theta >= 0 && *opt.fixed_theta <= std::numbers::pi / 4 + 1e-15))
    throw InvalidArgument("theta must lie in [0, pi/4]");
  const detail::AssignedObjective obj(f, opt.eta_a, opt.eta_b, opt.rule);
  const int na = f.scenario().settings_a(), nb = f.scenario().settings_b();

  std::vector<SeesawResult> results(static_cast<std::size_t>(opt.restarts));
  parallel_for(results.size(), [&](std::size_t i) {
    detail::BlochStrategy start;
    if (i == 0 && opt.warm_start) {
      if (static_cast<int>(opt.warm_start->meas_a.size()) != na ||
          static_cast<int>(opt.warm_start->meas_b.size()) != nb)
        throw InvalidArgument("warm start does not match functional settings");
      start = detail::BlochStrategy(*opt.warm_start);
      if (opt.fixed_theta) start.theta = *opt.fixed_theta;
    } else {
      SplitMix64 rng(derive_seed(opt.seed, i));
      start = detail::random_strategy(na, nb, opt.fixed_theta, rng);
    }
    results[i] = detail::seesaw_single(obj, std::move(start), opt);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].value > results[best].value) best = i;
  SeesawResult out = std::move(results[best]);
  out.best_restart = static_cast<int>(best);
  return out;
}

// Value of f on the assignment-processed behavior of a fixed strategy.
inline double assigned_value(const BellFunctional& f, const QuantumStrategy& qs, double eta_a,
                             double eta_b, AssignmentRule rule) {
  qs.validate();
  require_same(f.scenario(), qs.scenario(), "assigned_value");
  return detail::AssignedObjective(f, eta_a, eta_b, rule).value(detail::BlochStrategy(qs));
}

}  // namespace bellpost
