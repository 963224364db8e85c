#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bellpost/core.hpp"
#include "bellpost/geometry.hpp"
#include "bellpost/lhv.hpp"
#include "bellpost/quantum.hpp"

namespace bellpost {

using json = nlohmann::ordered_json;

// Shared by CSV and JSON output so both carry the same digits.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

namespace detail {

inline json rational_to_json(const Rational& r) {
  if (r.is_integer()) return r.num();
  return r.str();
}

inline Rational rational_from_json(const json& j, const char* what) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number()) return Rational::from_double(j.get<double>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    const auto slash = s.find('/');
    try {
      std::size_t used = 0;
      if (slash == std::string::npos) {
        const auto n = std::stoll(s, &used);
        if (used == s.size()) return Rational(n);
      } else {
        const auto n = std::stoll(s.substr(0, slash), &used);
        if (used == slash) {
          const auto d = std::stoll(s.substr(slash + 1), &used);
          if (used == s.size() - slash - 1 && d != 0) return Rational(n, d);
        }
      }
    } catch (const std::exception&) {
    }
  }
  throw InvalidArgument(std::string("malformed rational in '") + what + "'");
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument("malformed JSON: " + msg);
}

}  // namespace detail

// Nested arrays [x][y][a][b].
inline json to_json(const Behavior& p) {
  const Scenario& s = p.scenario();
  json out = json::array();
  for (int x = 0; x < s.settings_a(); ++x) {
    json jx = json::array();
    for (int y = 0; y < s.settings_b(); ++y) {
      json jy = json::array();
      for (int a = 0; a < s.outcomes(); ++a) {
        json ja = json::array();
        for (int b = 0; b < s.outcomes(); ++b) ja.push_back(p(a, b, x, y));
        jy.push_back(std::move(ja));
      }
      jx.push_back(std::move(jy));
    }
    out.push_back(std::move(jx));
  }
  return out;
}

namespace detail {
// Shape of a [x][y][a][b] nest; outcome count 2 or 3.
inline Scenario scenario_of_nest(const json& j, const char* what) {
  require(j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array(),
          std::string(what) + " must be nested arrays [x][y][a][b]");
  const int na = static_cast<int>(j.size()), nb = static_cast<int>(j[0].size());
  const int o = static_cast<int>(j[0][0].size());
  require(o == 2 || o == 3, std::string(what) + ": outcome dimension must be 2 or 3");
  for (const auto& jx : j) {
    require(jx.is_array() && static_cast<int>(jx.size()) == nb, std::string(what) + ": ragged y dimension");
    for (const auto& jy : jx) {
      require(jy.is_array() && static_cast<int>(jy.size()) == o, std::string(what) + ": ragged a dimension");
      for (const auto& ja : jy)
        require(ja.is_array() && static_cast<int>(ja.size()) == o, std::string(what) + ": ragged b dimension");
    }
  }
  return o == 2 ? Scenario::binary(na, nb) : Scenario::raw_eberhard(na, nb);
}
}  // namespace detail

inline Behavior behavior_from_json(const json& j) {
  const Scenario s = detail::scenario_of_nest(j, "behavior");
  return Behavior::from_function(s, [&](int a, int b, int x, int y) {
    const json& v = j[x][y][a][b];
    detail::require(v.is_number(), "behavior entries must be numbers");
    return v.get<double>();
  });
}

inline json to_json(const BellFunctional& f) {
  const Scenario& s = f.scenario();
  json coeffs = json::array();
  for (int x = 0; x < s.settings_a(); ++x) {
    json jx = json::array();
    for (int y = 0; y < s.settings_b(); ++y) {
      json jy = json::array();
      for (int a = 0; a < s.outcomes(); ++a) {
        json ja = json::array();
        for (int b = 0; b < s.outcomes(); ++b) ja.push_back(detail::rational_to_json(f.coeff(a, b, x, y)));
        jy.push_back(std::move(ja));
      }
      jx.push_back(std::move(jy));
    }
    coeffs.push_back(std::move(jx));
  }
  json out;
  out["label"] = f.label();
  out["coeffs"] = std::move(coeffs);
  out["constant"] = detail::rational_to_json(f.constant());
  out["lower"] = f.lower() ? detail::rational_to_json(*f.lower()) : json(nullptr);
  out["upper"] = f.upper() ? detail::rational_to_json(*f.upper()) : json(nullptr);
  if (!f.is_concrete()) {
    json ms = json::array();
    for (const auto& t : f.marginals())
      ms.push_back({{"coeff", detail::rational_to_json(t.coeff)},
                    {"party", to_string(t.spec.party)},
                    {"outcome", t.spec.outcome},
                    {"setting", t.spec.own_setting},
                    {"context", t.spec.context_setting}});
    out["marginals"] = std::move(ms);
  }
  return out;
}

inline BellFunctional functional_from_json(const json& j) {
  using detail::require;
  require(j.is_object(), "functional must be an object");
  require(j.contains("coeffs"), "functional needs 'coeffs'");
  const Scenario s = detail::scenario_of_nest(j["coeffs"], "coeffs");
  std::vector<Rational> joint(s.size());
  for (int x = 0; x < s.settings_a(); ++x)
    for (int y = 0; y < s.settings_b(); ++y)
      for (int a = 0; a < s.outcomes(); ++a)
        for (int b = 0; b < s.outcomes(); ++b)
          joint[s.index(a, b, x, y)] = detail::rational_from_json(j["coeffs"][x][y][a][b], "coeffs");
  auto opt_bound = [&](const char* key) -> std::optional<Rational> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return detail::rational_from_json(j[key], key);
  };
  std::vector<MarginalTerm> marginals;
  if (j.contains("marginals")) {
    require(j["marginals"].is_array(), "'marginals' must be an array");
    for (const auto& m : j["marginals"]) {
      require(m.is_object() && m.contains("party") && m.contains("outcome") && m.contains("setting") &&
                  m.contains("context") && m.contains("coeff"),
              "marginal needs coeff, party, outcome, setting, context");
      const auto party = m["party"].get<std::string>();
      require(party == "A" || party == "B", "marginal party must be 'A' or 'B'");
      marginals.push_back({detail::rational_from_json(m["coeff"], "coeff"),
                           {party == "A" ? Party::alice : Party::bob, m["outcome"].get<int>(),
                            m["setting"].get<int>(), m["context"].get<int>()}});
    }
  }
  const Rational constant = j.contains("constant") ? detail::rational_from_json(j["constant"], "constant") : Rational();
  return BellFunctional(s, std::move(joint), constant, opt_bound("lower"), opt_bound("upper"),
                        j.value("label", std::string("custom")), std::move(marginals));
}

inline json to_json(const QuantumStrategy& qs) {
  auto angles = [](const std::vector<BlochAngles>& v) {
    json out = json::array();
    for (const auto& b : v) out.push_back({b.polar, b.azimuth});
    return out;
  };
  return {{"theta", qs.theta}, {"meas_a", angles(qs.meas_a)}, {"meas_b", angles(qs.meas_b)}};
}

inline QuantumStrategy strategy_from_json(const json& j) {
  using detail::require;
  require(j.is_object() && j.contains("theta") && j.contains("meas_a") && j.contains("meas_b"),
          "strategy needs theta, meas_a, meas_b");
  auto angles = [&](const json& v) {
    require(v.is_array(), "measurement list must be an array");
    std::vector<BlochAngles> out;
    for (const auto& b : v) {
      require(b.is_array() && b.size() == 2, "measurement must be [polar, azimuth]");
      out.push_back({b[0].get<double>(), b[1].get<double>()});
    }
    return out;
  };
  QuantumStrategy qs{j["theta"].get<double>(), angles(j["meas_a"]), angles(j["meas_b"])};
  qs.validate();
  return qs;
}

inline json to_json(const LhvModel& m) {
  json out = json::array();
  for (const auto& c : m.components())
    out.push_back({{"weight", c.weight},
                   {"a_map", c.strategy.a_map},
                   {"b_map", c.strategy.b_map},
                   {"a_click", c.clicks.a_click},
                   {"b_click", c.clicks.b_click}});
  return out;
}

inline LhvModel lhv_model_from_json(const json& j, const Scenario& s) {
  detail::require(j.is_array(), "LHV model must be an array of components");
  std::vector<LhvComponent> comps;
  for (const auto& c : j) {
    detail::require(c.is_object() && c.contains("weight") && c.contains("a_map") && c.contains("b_map"),
                    "component needs weight, a_map, b_map");
    LhvComponent lc;
    lc.weight = c["weight"].get<double>();
    lc.strategy = {c["a_map"].get<std::vector<int>>(), c["b_map"].get<std::vector<int>>()};
    lc.clicks = ClickPattern::always(s);
    if (c.contains("a_click")) lc.clicks.a_click = c["a_click"].get<std::vector<double>>();
    if (c.contains("b_click")) lc.clicks.b_click = c["b_click"].get<std::vector<double>>();
    comps.push_back(std::move(lc));
  }
  return LhvModel(s, std::move(comps));
}

// Two columns, one vertex per row, closing vertex not repeated.
inline std::string hull_csv(const std::vector<Point2>& hull, const std::string& axis1 = "axis1",
                            const std::string& axis2 = "axis2") {
  std::string out = axis1 + "," + axis2 + "\n";
  for (const auto& p : hull) out += format_number(p.x) + "," + format_number(p.y) + "\n";
  return out;
}

inline json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed JSON in '" + path + "': " + e.what());
  }
}

}  // namespace bellpost
