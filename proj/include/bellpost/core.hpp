#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bellpost/errors.hpp"
#include "bellpost/rational.hpp"

namespace bellpost {

inline constexpr double kProbabilityTol = 1e-12;  // normalization / NS checks
inline constexpr double kOptimizationTol = 1e-9;  // comparisons of optimized values

enum class Party { alice, bob };

inline const char* to_string(Party p) { return p == Party::alice ? "A" : "B"; }

enum class OutcomeAlphabet {
  binary,        // {0, 1}
  with_no_click  // {0, 1, ∅}; ∅ is index 2. Only for raw Eberhard data.
};

inline constexpr int kNoClick = 2;

// Input/outcome structure of a bipartite scenario.
class Scenario {
 public:
  Scenario(int settings_a, int settings_b, OutcomeAlphabet alphabet = OutcomeAlphabet::binary)
      : settings_a_(settings_a), settings_b_(settings_b), alphabet_(alphabet) {
    if (settings_a < 1 || settings_b < 1)
      throw InvalidArgument("scenario needs at least one setting per party");
  }

  static Scenario binary(int settings_a, int settings_b) { return {settings_a, settings_b}; }
  static Scenario raw_eberhard(int settings_a, int settings_b) {
    return {settings_a, settings_b, OutcomeAlphabet::with_no_click};
  }

  int settings_a() const noexcept { return settings_a_; }
  int settings_b() const noexcept { return settings_b_; }
  int settings(Party p) const noexcept { return p == Party::alice ? settings_a_ : settings_b_; }
  OutcomeAlphabet alphabet() const noexcept { return alphabet_; }
  int outcomes() const noexcept { return alphabet_ == OutcomeAlphabet::binary ? 2 : 3; }
  bool is_binary() const noexcept { return alphabet_ == OutcomeAlphabet::binary; }

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(settings_a_ * settings_b_ * outcomes() * outcomes());
  }

  // Flat index of P(ab|xy); storage order is [x][y][a][b].
  std::size_t index(int a, int b, int x, int y) const noexcept {
    const int o = outcomes();
    return static_cast<std::size_t>(((x * settings_b_ + y) * o + a) * o + b);
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;

 private:
  int settings_a_;
  int settings_b_;
  OutcomeAlphabet alphabet_;
};

inline void require_same(const Scenario& l, const Scenario& r, const char* what) {
  if (!(l == r)) throw ScenarioMismatch(std::string(what) + ": scenario mismatch");
}

// Table of conditional probabilities P(ab|xy). May be signaling.
class Behavior {
 public:
  Behavior(Scenario scenario, std::vector<double> table)
      : scenario_(scenario), table_(std::move(table)) {
    validate();
  }

  template <class F>
  static Behavior from_function(const Scenario& s, F&& prob) {
    std::vector<double> t(s.size());
    const int o = s.outcomes();
    for (int x = 0; x < s.settings_a(); ++x)
      for (int y = 0; y < s.settings_b(); ++y)
        for (int a = 0; a < o; ++a)
          for (int b = 0; b < o; ++b) t[s.index(a, b, x, y)] = prob(a, b, x, y);
    return Behavior(s, std::move(t));
  }

  const Scenario& scenario() const noexcept { return scenario_; }
  std::span<const double> table() const noexcept { return table_; }

  // P(ab|xy), tiny negative round-off clamped to zero.
  double operator()(int a, int b, int x, int y) const noexcept {
    return std::max(0.0, table_[scenario_.index(a, b, x, y)]);
  }

 private:
  void validate() const {
    if (table_.size() != scenario_.size())
      throw InvalidBehavior("behavior table size does not match scenario");
    const int o = scenario_.outcomes();
    for (int x = 0; x < scenario_.settings_a(); ++x)
      for (int y = 0; y < scenario_.settings_b(); ++y) {
        double sum = 0.0;
        for (int a = 0; a < o; ++a)
          for (int b = 0; b < o; ++b) {
            const double v = table_[scenario_.index(a, b, x, y)];
            if (!(v >= -kProbabilityTol))
              throw InvalidBehavior("negative probability at (x=" + std::to_string(x) +
                                    ", y=" + std::to_string(y) + ")");
            sum += v;
          }
        if (std::fabs(sum - 1.0) > kProbabilityTol)
          throw InvalidBehavior("behavior not normalized at (x=" + std::to_string(x) +
                                ", y=" + std::to_string(y) + ")");
      }
  }

  Scenario scenario_;
  std::vector<double> table_;
};

inline Behavior uniform_behavior(const Scenario& s) {
  const double v = 1.0 / (s.outcomes() * s.outcomes());
  return Behavior(s, std::vector<double>(s.size(), v));
}

// P(ab|xy) = pa[x][a] * pb[y][b].
inline Behavior product_behavior(const Scenario& s, const std::vector<std::vector<double>>& pa,
                                 const std::vector<std::vector<double>>& pb) {
  return Behavior::from_function(
      s, [&](int a, int b, int x, int y) { return pa.at(x).at(a) * pb.at(y).at(b); });
}

inline Behavior mix(std::span<const Behavior> behaviors, std::span<const double> weights) {
  if (behaviors.empty() || behaviors.size() != weights.size())
    throw InvalidArgument("mix: need one weight per behavior");
  const Scenario& s = behaviors.front().scenario();
  std::vector<double> t(s.size(), 0.0);
  for (std::size_t k = 0; k < behaviors.size(); ++k) {
    require_same(s, behaviors[k].scenario(), "mix");
    const auto src = behaviors[k].table();
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += weights[k] * src[i];
  }
  return Behavior(s, std::move(t));
}

// Marginal of one party computed at a given setting of the other party.
struct MarginalSpec {
  Party party = Party::alice;
  int outcome = 0;
  int own_setting = 0;
  int context_setting = 0;

  friend bool operator==(const MarginalSpec&, const MarginalSpec&) = default;
};

inline void validate(const MarginalSpec& m, const Scenario& s) {
  const Party other = m.party == Party::alice ? Party::bob : Party::alice;
  if (m.own_setting < 0 || m.own_setting >= s.settings(m.party) || m.context_setting < 0 ||
      m.context_setting >= s.settings(other) || m.outcome < 0 || m.outcome >= s.outcomes())
    throw InvalidArgument("marginal spec outside scenario ranges");
}

inline double marginal(const Behavior& p, const MarginalSpec& m) {
  const Scenario& s = p.scenario();
  validate(m, s);
  double sum = 0.0;
  for (int o = 0; o < s.outcomes(); ++o)
    sum += m.party == Party::alice ? p(m.outcome, o, m.own_setting, m.context_setting)
                                   : p(o, m.outcome, m.context_setting, m.own_setting);
  return sum;
}

// Largest change of any single-party marginal under a change of the other
// party's setting. Zero (within kProbabilityTol) iff the behavior is non-signaling.
inline double ns_violation(const Behavior& p) {
  const Scenario& s = p.scenario();
  double worst = 0.0;
  for (Party party : {Party::alice, Party::bob}) {
    const Party other = party == Party::alice ? Party::bob : Party::alice;
    for (int own = 0; own < s.settings(party); ++own)
      for (int out = 0; out < s.outcomes(); ++out) {
        double lo = 1e300, hi = -1e300;
        for (int ctx = 0; ctx < s.settings(other); ++ctx) {
          const double m = marginal(p, {party, out, own, ctx});
          lo = std::min(lo, m);
          hi = std::max(hi, m);
        }
        worst = std::max(worst, hi - lo);
      }
  }
  return worst;
}

inline bool is_non_signaling(const Behavior& p) { return ns_violation(p) <= kProbabilityTol; }

// Context-free marginal of a non-signaling behavior (computed at context 0).
inline double ns_marginal(const Behavior& p, Party party, int outcome, int setting) {
  return marginal(p, {party, outcome, setting, 0});
}

// Symbolic marginal term: coeff * P^party(outcome|own_setting), expanded at
// spec.context_setting unless a representation chooses otherwise.
struct MarginalTerm {
  Rational coeff;
  MarginalSpec spec;
};

// Linear form on behaviors plus a constant, with classical bound(s).
class BellFunctional {
 public:
  BellFunctional(Scenario scenario, std::vector<Rational> joint, Rational constant,
                 std::optional<Rational> lower, std::optional<Rational> upper, std::string label,
                 std::vector<MarginalTerm> marginals = {})
      : scenario_(scenario),
        joint_(std::move(joint)),
        constant_(constant),
        lower_(lower),
        upper_(upper),
        label_(std::move(label)),
        marginals_(std::move(marginals)) {
    if (joint_.size() != scenario_.size())
      throw InvalidArgument("functional coefficient tensor does not match scenario");
    if (!lower_ && !upper_) throw InvalidArgument("functional needs at least one bound");
    for (const auto& t : marginals_) bellpost::validate(t.spec, scenario_);
    dense_.assign(scenario_.size(), 0.0);
    const auto expanded = expand_marginals(default_contexts());
    for (std::size_t i = 0; i < dense_.size(); ++i) dense_[i] = expanded[i].to_double();
  }

  const Scenario& scenario() const noexcept { return scenario_; }
  const std::string& label() const noexcept { return label_; }
  const Rational& constant() const noexcept { return constant_; }
  const std::optional<Rational>& lower() const noexcept { return lower_; }
  const std::optional<Rational>& upper() const noexcept { return upper_; }
  const std::vector<Rational>& joint() const noexcept { return joint_; }
  const std::vector<MarginalTerm>& marginals() const noexcept { return marginals_; }
  bool is_concrete() const noexcept { return marginals_.empty(); }

  const Rational& coeff(int a, int b, int x, int y) const {
    return joint_[scenario_.index(a, b, x, y)];
  }

  // Floating coefficients with marginal terms expanded at their default contexts.
  std::span<const double> dense() const noexcept { return dense_; }

  std::vector<int> default_contexts() const {
    std::vector<int> ctx;
    ctx.reserve(marginals_.size());
    for (const auto& t : marginals_) ctx.push_back(t.spec.context_setting);
    return ctx;
  }

  // Exact joint coefficients with every marginal term expanded at the given contexts.
  std::vector<Rational> expand_marginals(const std::vector<int>& contexts) const {
    if (contexts.size() != marginals_.size())
      throw InvalidArgument("representation needs one context per marginal term");
    std::vector<Rational> out = joint_;
    for (std::size_t k = 0; k < marginals_.size(); ++k) {
      MarginalSpec m = marginals_[k].spec;
      m.context_setting = contexts[k];
      bellpost::validate(m, scenario_);
      for (int o = 0; o < scenario_.outcomes(); ++o) {
        const std::size_t i = m.party == Party::alice
                                  ? scenario_.index(m.outcome, o, m.own_setting, m.context_setting)
                                  : scenario_.index(o, m.outcome, m.context_setting, m.own_setting);
        out[i] += marginals_[k].coeff;
      }
    }
    return out;
  }

  // Value on a raw table laid out like Behavior::table(); no validation.
  double evaluate(std::span<const double> table) const noexcept {
    double v = 0.0;
    for (std::size_t i = 0; i < dense_.size(); ++i) v += dense_[i] * table[i];
    return v + constant_.to_double();
  }

 private:
  Scenario scenario_;
  std::vector<Rational> joint_;
  Rational constant_;
  std::optional<Rational> lower_;
  std::optional<Rational> upper_;
  std::string label_;
  std::vector<MarginalTerm> marginals_;
  std::vector<double> dense_;
};

// Σ coeffs·P + constant. Symbolic marginals use their default contexts.
inline double functional_value(const BellFunctional& f, const Behavior& p) {
  require_same(f.scenario(), p.scenario(), "functional_value");
  return f.evaluate(p.table());
}

inline BellFunctional instantiate_representation(const BellFunctional& f,
                                                 const std::vector<int>& contexts) {
  return BellFunctional(f.scenario(), f.expand_marginals(contexts), f.constant(), f.lower(),
                        f.upper(), f.label());
}

inline BellFunctional instantiate_representation(const BellFunctional& f,
                                                 const std::vector<MarginalSpec>& choices) {
  if (choices.size() != f.marginals().size())
    throw InvalidArgument("representation needs one choice per marginal term");
  std::vector<int> ctx;
  for (std::size_t k = 0; k < choices.size(); ++k) {
    const MarginalSpec& want = f.marginals()[k].spec;
    const MarginalSpec& got = choices[k];
    if (got.party != want.party || got.outcome != want.outcome ||
        got.own_setting != want.own_setting)
      throw InvalidArgument("representation choice " + std::to_string(k) +
                            " does not refer to the matching marginal term");
    ctx.push_back(got.context_setting);
  }
  return instantiate_representation(f, ctx);
}

// The default representation of a functional (identity for concrete ones).
inline BellFunctional concrete(const BellFunctional& f) {
  return f.is_concrete() ? f : instantiate_representation(f, f.default_contexts());
}

namespace detail {

class FunctionalBuilder {
 public:
  explicit FunctionalBuilder(Scenario s) : s_(s), joint_(s.size()) {}

  FunctionalBuilder& p(int a, int b, int x, int y, std::int64_t c = 1) {
    joint_[s_.index(a, b, x, y)] += Rational(c);
    return *this;
  }
  FunctionalBuilder& m(Party party, int outcome, int setting, int default_ctx, std::int64_t c = 1) {
    marginals_.push_back({Rational(c), {party, outcome, setting, default_ctx}});
    return *this;
  }
  BellFunctional build(std::string label, std::optional<Rational> lower,
                       std::optional<Rational> upper, Rational constant = 0) const {
    return BellFunctional(s_, joint_, constant, lower, upper, std::move(label), marginals_);
  }

 private:
  Scenario s_;
  std::vector<Rational> joint_;
  std::vector<MarginalTerm> marginals_;
};

}  // namespace detail

// Σ_xy s_xy (-1)^{a⊕b} P(ab|xy), with s_xy = -1 only at (minus_x, minus_y).
inline BellFunctional chsh_variant(int minus_x, int minus_y, std::string label) {
  detail::FunctionalBuilder b(Scenario::binary(2, 2));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const int s = (x == minus_x && y == minus_y) ? -1 : 1;
      for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb) b.p(a, bb, x, y, ((a ^ bb) ? -1 : 1) * s);
    }
  return b.build(std::move(label), Rational(-2), Rational(2));
}

// A CHSH variant rewritten through P(01|xy) = P^A(0|x) - P(00|xy) and
// P(10|xy) = P^B(0|y) - P(00|xy):
//   4 Σ s_xy P(00|xy) - 4 P^A(0|1-minus_x) - 4 P^B(0|1-minus_y) + 2.
// Equal to the correlator form on non-signaling behaviors; differs on signaling ones.
inline BellFunctional chsh_marginal_form(int minus_x, int minus_y, std::string label) {
  detail::FunctionalBuilder b(Scenario::binary(2, 2));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) b.p(0, 0, x, y, (x == minus_x && y == minus_y) ? -4 : 4);
  b.m(Party::alice, 0, 1 - minus_x, 0, -4).m(Party::bob, 0, 1 - minus_y, 0, -4);
  return b.build(std::move(label), Rational(-2), Rational(2), Rational(2));
}

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"CHSH", "CH", "E", "I3322", "I3322_SYM"};
  return names;
}

inline BellFunctional builtin_functional(const std::string& name) {
  using detail::FunctionalBuilder;
  constexpr auto A = Party::alice;
  constexpr auto B = Party::bob;
  if (name == "CHSH") return chsh_variant(1, 1, "CHSH");
  if (name == "CH") {
    FunctionalBuilder b(Scenario::binary(2, 2));
    b.p(0, 0, 0, 0).p(0, 0, 0, 1).p(0, 0, 1, 0).p(0, 0, 1, 1, -1);
    b.m(A, 0, 0, 0, -1).m(B, 0, 0, 0, -1);
    return b.build("CH", Rational(-1), Rational(0));
  }
  if (name == "E") {
    // Outcome index 2 is the no-click symbol.
    FunctionalBuilder b(Scenario::raw_eberhard(2, 2));
    b.p(0, 0, 0, 0).p(0, 0, 1, 1, -1).p(0, 1, 0, 1, -1).p(0, kNoClick, 0, 1, -1);
    b.p(1, 0, 1, 0, -1).p(kNoClick, 0, 1, 0, -1);
    return b.build("E", std::nullopt, Rational(0));
  }
  if (name == "I3322") {
    FunctionalBuilder b(Scenario::binary(3, 3));
    b.m(B, 1, 0, 0, 2).m(B, 1, 1, 0).m(A, 1, 0, 0);
    for (auto [x, y] : {std::pair{2, 1}, std::pair{1, 2}}) b.p(0, 1, x, y).p(1, 0, x, y).p(1, 1, x, y);
    for (auto [x, y] : {std::pair{0, 0}, {1, 0}, {2, 0}, {0, 1}, {0, 2}, {1, 1}}) b.p(0, 0, x, y);
    return b.build("I3322", std::nullopt, Rational(6));
  }
  if (name == "I3322_SYM") {
    FunctionalBuilder b(Scenario::binary(3, 3));
    b.m(A, 1, 0, 0).m(A, 1, 1, 0).m(B, 1, 0, 0).m(B, 1, 1, 0);
    b.p(0, 1, 1, 1).p(1, 0, 1, 1).p(1, 1, 1, 1);
    // P(21|22) read as P(11|22).
    b.p(0, 1, 2, 2).p(1, 0, 2, 2).p(1, 1, 2, 2);
    for (auto [x, y] : {std::pair{1, 0}, {2, 0}, {0, 1}, {0, 2}, {1, 2}, {2, 1}}) b.p(0, 0, x, y);
    return b.build("I3322_SYM", std::nullopt, Rational(6));
  }
  throw InvalidArgument("unknown inequality '" + name + "'");
}

}  // namespace bellpost
