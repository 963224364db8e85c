// bellpost command-line front end.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bellpost/bellpost.hpp"

using namespace bellpost;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitDegenerate = 3;

struct RunConfig {
  std::string command;
  std::string inequality = "CHSH";
  std::string representation;  // comma-separated contexts; empty: defaults
  std::string rule;            // empty: per-command default
  std::string ray = "symmetric";
  std::string theta;  // free | max | <radians>; empty: per-command default
  double grid_step = 0.01;
  std::uint64_t seed = 0;
  int restarts = 0;  // 0: per-command default
  std::string output;
  std::string format = "csv";
  std::string double_no_click = "deterministic";
  std::string method = "restricted";
  double eta_a = 1.0;
  double eta_b = 1.0;
  double lo = 0.0;
  double eta = -1.0;  // discard-bound: single efficiency; polytope-project: 0.88
  bool threshold = false;
  std::string with;
  bool relabel = false;
  double p0 = 0.5;
  std::string model;  // demo-signaling: LHV model file
  bool thresholds = false;
};

// --------------------------------------------------------------------------
// Output assembly

std::string num(double v) { return format_number(v); }
json jnum(double v) { return std::stod(format_number(v)); }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  json data = json::object();
  std::vector<Table> tables;  // CSV: tables separated by a blank line
};

Report key_value(const std::vector<std::pair<std::string, std::string>>& kv, json data) {
  Report r;
  Table t;
  for (const auto& [k, v] : kv) t.rows.push_back({k, v});
  r.tables.push_back(std::move(t));
  r.data = std::move(data);
  return r;
}

std::string csv(const Report& r) {
  std::string out;
  for (std::size_t i = 0; i < r.tables.size(); ++i) {
    if (i) out += "\n";
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t c = 0; c < cells.size(); ++c) out += (c ? "," : "") + cells[c];
      out += "\n";
    };
    if (!r.tables[i].header.empty()) line(r.tables[i].header);
    for (const auto& row : r.tables[i].rows) line(row);
  }
  return out;
}

// --------------------------------------------------------------------------
// Config resolution

BellFunctional load_inequality(const std::string& spec) {
  for (const auto& n : builtin_names())
    if (n == spec) return builtin_functional(spec);
  if (std::filesystem::is_regular_file(spec)) return functional_from_json(parse_json_file(spec));
  throw InvalidArgument("unknown inequality '" + spec + "' (built-in label or JSON file)");
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw InvalidArgument("");
    } catch (...) {
      throw InvalidArgument("malformed representation '" + s + "' (comma-separated contexts)");
    }
  }
  return out;
}

BellFunctional concrete_inequality(const RunConfig& c) {
  const BellFunctional f = load_inequality(c.inequality);
  if (c.representation.empty()) return concrete(f);
  return instantiate_representation(f, parse_int_list(c.representation));
}

std::optional<double> parse_theta(const std::string& s) {
  if (s == "free") return std::nullopt;
  if (s == "max") return std::numbers::pi / 4;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && v >= 0.0 && v <= std::numbers::pi / 4) return v;
  } catch (...) {
  }
  throw InvalidArgument("malformed --theta '" + s + "' (free, max or radians in [0, pi/4])");
}

std::vector<AssignmentRule> parse_rules(const std::string& s) {
  if (s == "all") {
    const auto all = AssignmentRule::all();
    return {all.begin(), all.end()};
  }
  return {AssignmentRule::parse(s)};
}

DoubleNoClick parse_dnc(const std::string& s) {
  if (s == "deterministic") return DoubleNoClick::deterministic_value;
  if (s == "classical") return DoubleNoClick::classical_maximum;
  throw InvalidArgument("malformed --double-no-click '" + s + "' (deterministic, classical)");
}

DiscardMethod parse_method(const std::string& s) {
  if (s == "restricted") return DiscardMethod::restricted;
  if (s == "refined") return DiscardMethod::refined;
  throw InvalidArgument("malformed --method '" + s + "' (restricted, refined)");
}

void apply_command_defaults(RunConfig& c) {
  const bool max_default = c.command == "critical-eta" || c.command == "discard-bound" || c.command == "representations";
  if (c.theta.empty()) c.theta = max_default ? "max" : "free";
  if (c.rule.empty()) c.rule = c.command == "region" ? "all" : "S00";
  if (c.restarts == 0) c.restarts = c.command == "discard-bound" || c.command == "representations" ? 50 : 20;
  if (c.eta < 0.0 && c.command == "polytope-project") c.eta = 0.88;
  if (c.format != "csv" && c.format != "json") throw InvalidArgument("--format must be csv or json");
  if (!(c.grid_step > 0.0 && c.grid_step <= 0.1)) throw InvalidArgument("--grid-step must lie in (0, 0.1]");
  if (c.restarts < 1) throw InvalidArgument("--restarts must be positive");
}

json config_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["inequality"] = c.inequality;
  j["representation"] = c.representation;
  j["rule"] = c.rule;
  j["ray"] = c.ray;
  j["theta"] = c.theta;
  j["grid-step"] = c.grid_step;
  j["seed"] = c.seed;
  j["restarts"] = c.restarts;
  j["format"] = c.format;
  j["double-no-click"] = c.double_no_click;
  j["method"] = c.method;
  j["eta-a"] = c.eta_a;
  j["eta-b"] = c.eta_b;
  j["lo"] = c.lo;
  j["eta"] = c.eta;
  j["threshold"] = c.threshold;
  j["with"] = c.with;
  j["relabel"] = c.relabel;
  j["p0"] = c.p0;
  j["model"] = c.model;
  j["thresholds"] = c.thresholds;
  return j;
}

// --------------------------------------------------------------------------
// Commands

Report cmd_bounds(const RunConfig& c) {
  const auto b = classical_bound(concrete_inequality(c));
  return key_value({{"lower", b.lower.str()}, {"upper", b.upper.str()}},
                   {{"lower", detail::rational_to_json(b.lower)}, {"upper", detail::rational_to_json(b.upper)}});
}

Report strategy_report(const QuantumStrategy& qs, std::vector<std::pair<std::string, std::string>> kv, json data) {
  for (std::size_t i = 0; i < qs.meas_a.size(); ++i) {
    kv.push_back({"a" + std::to_string(i) + "_polar", num(qs.meas_a[i].polar)});
    kv.push_back({"a" + std::to_string(i) + "_azimuth", num(qs.meas_a[i].azimuth)});
  }
  for (std::size_t i = 0; i < qs.meas_b.size(); ++i) {
    kv.push_back({"b" + std::to_string(i) + "_polar", num(qs.meas_b[i].polar)});
    kv.push_back({"b" + std::to_string(i) + "_azimuth", num(qs.meas_b[i].azimuth)});
  }
  json s = to_json(qs);
  s["theta"] = jnum(qs.theta);
  for (auto* key : {"meas_a", "meas_b"})
    for (auto& m : s[key])
      for (auto& v : m) v = jnum(v.get<double>());
  data["strategy"] = std::move(s);
  return key_value(kv, std::move(data));
}

Report cmd_quantum_opt(const RunConfig& c) {
  const auto f = concrete_inequality(c);
  OptimizeThetaOptions o;
  o.seed = c.seed;
  o.restarts = c.restarts;
  o.fixed_theta = parse_theta(c.theta);
  o.double_no_click = parse_dnc(c.double_no_click);
  const auto r = optimize_theta(f, c.eta_a, c.eta_b, AssignmentRule::parse(c.rule), o);
  const double cmax = classical_maximum(f);
  return strategy_report(r.strategy,
                         {{"value", num(r.value)}, {"classical_bound", num(cmax)}, {"theta", num(r.theta)},
                          {"converged", r.converged ? "1" : "0"}},
                         {{"value", jnum(r.value)}, {"classical_bound", jnum(cmax)}, {"theta", jnum(r.theta)},
                          {"converged", r.converged}});
}

Report cmd_critical_eta(const RunConfig& c) {
  const auto f = concrete_inequality(c);
  OptimizedThresholdOptions o;
  o.seed = c.seed;
  o.restarts = c.restarts;
  o.fixed_theta = parse_theta(c.theta);
  o.double_no_click = parse_dnc(c.double_no_click);
  const auto ray = EfficiencyRay::parse(c.ray);
  const auto r = optimized_critical_efficiency(f, AssignmentRule::parse(c.rule), ray, o);
  if (!r) return key_value({{"critical_eta", "none"}}, {{"critical_eta", nullptr}});
  const auto [ea, eb] = ray.point(r->eta);
  return strategy_report(r->strategy,
                         {{"critical_eta", num(r->eta)}, {"eta_a", num(ea)}, {"eta_b", num(eb)},
                          {"theta", num(r->strategy.theta)}, {"iterations", std::to_string(r->iterations)}},
                         {{"critical_eta", jnum(r->eta)}, {"eta_a", jnum(ea)}, {"eta_b", jnum(eb)},
                          {"theta", jnum(r->strategy.theta)}, {"iterations", r->iterations}});
}

Report cmd_region(const RunConfig& c) {
  const auto f = concrete_inequality(c);
  RegionOptions o;
  o.lo = c.lo;
  o.seed = c.seed;
  o.restarts = c.restarts;
  o.fixed_theta = parse_theta(c.theta);
  o.double_no_click = parse_dnc(c.double_no_click);
  const auto g = violation_region(f, parse_rules(c.rule), c.grid_step, o);
  Report rep;
  Table t{{"eta_a", "eta_b", "rule", "violated", "best_theta", "value"}, {}};
  json rows = json::array();
  for (const auto& cell : g.cells)
    for (std::size_t r = 0; r < g.rules.size(); ++r) {
      const auto& out = cell.outcomes[r];
      t.rows.push_back({num(cell.eta_a), num(cell.eta_b), g.rules[r].name(), out.violated ? "1" : "0",
                        num(out.theta), num(out.value)});
      rows.push_back({{"eta_a", jnum(cell.eta_a)}, {"eta_b", jnum(cell.eta_b)}, {"rule", g.rules[r].name()},
                      {"violated", out.violated ? 1 : 0}, {"best_theta", jnum(out.theta)},
                      {"value", jnum(out.value)}});
    }
  rep.tables.push_back(std::move(t));
  rep.data = {{"classical_bound", jnum(g.classical_max)}, {"rows", std::move(rows)}};
  return rep;
}

double quantum_value(const BellFunctional& f, const RunConfig& c) {
  SeesawOptions so;
  so.seed = c.seed;
  so.fixed_theta = parse_theta(c.theta);
  return seesaw_optimize(f, so).value;
}

Report cmd_discard_bound(const RunConfig& c) {
  const auto f = concrete_inequality(c);
  const auto theta = parse_theta(c.theta);
  if (theta && std::fabs(*theta - std::numbers::pi / 4) > 1e-15 && c.threshold)
    throw InvalidArgument("--threshold supports --theta max or free");
  if (c.threshold) {
    DiscardThresholdOptions o;
    o.source = theta ? QuantumSource::maximally_entangled : QuantumSource::optimized;
    o.seed = c.seed;
    o.bound_restarts = c.restarts;
    o.method = parse_method(c.method);
    const auto t = discard_threshold(f, o);
    Report rep;
    rep.tables.push_back({{"eta_t", "quantum_value"},
                          {{t ? num(t->eta_t) : "none", t ? num(t->quantum_value) : "none"}}});
    rep.data = {{"eta_t", t ? jnum(t->eta_t) : json(nullptr)},
                {"quantum_value", t ? jnum(t->quantum_value) : json(nullptr)}};
    return rep;
  }
  DiscardBoundOptions o;
  o.seed = c.seed;
  o.restarts = c.restarts;
  o.method = parse_method(c.method);
  std::vector<double> etas;
  if (c.eta >= 0.0) {
    etas.push_back(c.eta);
  } else {
    const double lo = discard_min_efficiency(f.scenario());
    for (double e : efficiency_grid(lo, c.grid_step))
      if (e > lo + 1e-12) etas.push_back(e);
  }
  const double q = quantum_value(f, c);
  Report rep;
  Table t{{"eta", "classical_bound", "quantum_value"}, {}};
  json rows = json::array();
  for (double e : etas) {
    const double b = discard_classical_bound(f, e, o).value;
    t.rows.push_back({num(e), num(b), num(q)});
    rows.push_back({{"eta", jnum(e)}, {"classical_bound", jnum(b)}, {"quantum_value", jnum(q)}});
  }
  rep.tables.push_back(std::move(t));
  rep.data = {{"rows", std::move(rows)}};
  return rep;
}

Report cmd_polytope_project(const RunConfig& c) {
  const Scenario s = Scenario::binary(2, 2);
  const auto ax1 = concrete(chsh_marginal_form(1, 1, "CHSH"));
  const auto ax2 = concrete(chsh_marginal_form(0, 0, "CHSH'"));
  std::vector<Behavior> local;
  for (const auto& d : enumerate_deterministic(s)) local.push_back(behavior_of(s, d));
  const std::vector<std::pair<std::string, std::vector<Point2>>> hulls{
      {"local", project_2d(local, ax1, ax2)},
      {"non-signaling", project_2d(ns_vertices_222(), ax1, ax2)},
      {"discard", project_2d(discard_family(s, c.eta, parse_method(c.method)), ax1, ax2)}};
  Report rep;
  Table t{{"set", "chsh", "chsh_prime"}, {}};
  json data;
  for (const auto& [name, hull] : hulls) {
    json pts = json::array();
    for (const auto& p : hull) {
      t.rows.push_back({name, num(p.x), num(p.y)});
      pts.push_back({jnum(p.x), jnum(p.y)});
    }
    data[name] = std::move(pts);
  }
  int outside = 0;
  for (const auto& p : hulls[2].second) outside += !hull_contains(hulls[1].second, p);
  data["discard_vertices_outside_ns"] = outside;
  rep.tables.push_back(std::move(t));
  rep.data = std::move(data);
  return rep;
}

Report cmd_equivalence(const RunConfig& c) {
  if (c.with.empty()) throw InvalidArgument("equivalence needs --with");
  const auto f1 = concrete_inequality(c);
  const auto f2 = concrete(load_inequality(c.with));
  EquivalenceOptions o;
  o.allow_relabeling = c.relabel;
  const auto e = equivalence_check(f1, f2, o);
  std::vector<std::pair<std::string, std::string>> kv{{"equivalent", e.equivalent ? "1" : "0"},
                                                      {"residual", num(e.residual)}};
  json data{{"equivalent", e.equivalent}, {"reason", e.reason}, {"residual", jnum(e.residual)}};
  if (e.certificate) {
    const auto& cert = *e.certificate;
    kv.push_back({"alpha", num(cert.alpha)});
    kv.push_back({"beta", num(cert.beta)});
    kv.push_back({"negated", cert.negated ? "1" : "0"});
    data["alpha"] = jnum(cert.alpha);
    data["beta"] = jnum(cert.beta);
    data["negated"] = cert.negated;
    json comb = json::object();
    for (std::size_t i = 0; i < cert.combination.size(); ++i) {
      const double v = std::fabs(cert.combination[i]) < 1e-12 ? 0.0 : cert.combination[i];
      comb[cert.constraints[i]] = jnum(v);
    }
    data["combination"] = std::move(comb);
    if (cert.relabeling) {
      const auto& r = *cert.relabeling;
      data["relabeling"] = {{"swap_parties", r.swap_parties}, {"perm_a", r.perm_a}, {"perm_b", r.perm_b},
                            {"flip_a", r.flip_a}, {"flip_b", r.flip_b}};
    }
  }
  Report rep = key_value(kv, std::move(data));
  rep.tables.back().rows.push_back({"reason", "\"" + e.reason + "\""});
  return rep;
}

LhvModel load_model(const std::string& path) {
  const json j = parse_json_file(path);
  if (!j.is_array() || j.empty() || !j[0].is_object() || !j[0].contains("a_map") || !j[0].contains("b_map"))
    throw InvalidArgument("malformed LHV model in '" + path + "'");
  const auto na = static_cast<int>(j[0]["a_map"].size()), nb = static_cast<int>(j[0]["b_map"].size());
  return lhv_model_from_json(j, Scenario::binary(na, nb));
}

Report cmd_demo_signaling(const RunConfig& c) {
  const LhvModel m = c.model.empty() ? build_signaling_demo(c.p0) : load_model(c.model);
  const Behavior pre = mixture_behavior(m);
  const Behavior post = discard_postselect(m);
  std::vector<std::pair<std::string, std::string>> kv{{"p0", num(c.p0)},
                                                      {"ns_violation_pre", num(ns_violation(pre))},
                                                      {"ns_violation", num(ns_violation(post))}};
  json marg = json::object();
  for (int x = 0; x < post.scenario().settings_a(); ++x)
    for (int y = 0; y < post.scenario().settings_b(); ++y)
      for (int a = 0; a < 2; ++a) {
        const std::string key = "PA(" + std::to_string(a) + "|x=" + std::to_string(x) + ",y=" + std::to_string(y) + ")";
        const double v = marginal(post, {Party::alice, a, x, y});
        kv.push_back({key, num(v)});
        marg[key] = jnum(v);
      }
  return key_value(kv, {{"p0", jnum(c.p0)},
                        {"ns_violation_pre", jnum(ns_violation(pre))},
                        {"ns_violation", jnum(ns_violation(post))},
                        {"postselected_marginals", std::move(marg)},
                        {"postselected", to_json(post)}});
}

Report cmd_representations(const RunConfig& c) {
  const auto f = load_inequality(c.inequality);
  const auto theta = parse_theta(c.theta);
  Report rep;
  Table t{{"index", "contexts", "class_id"}, {}};
  if (c.thresholds) t.header.push_back("discard_threshold");
  json rows = json::array();
  const auto reps = enumerate_representations(f);
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& r = reps[i];
    std::string ctx;
    for (std::size_t k = 0; k < r.contexts.size(); ++k) ctx += (k ? " " : "") + std::to_string(r.contexts[k]);
    std::vector<std::string> row{std::to_string(i), ctx, r.class_id ? std::to_string(*r.class_id) : ""};
    json jr{{"index", i}, {"contexts", r.contexts}, {"class_id", r.class_id ? json(*r.class_id) : json(nullptr)}};
    if (c.thresholds) {
      DiscardThresholdOptions o;
      o.source = theta ? QuantumSource::maximally_entangled : QuantumSource::optimized;
      o.seed = c.seed;
      o.bound_restarts = c.restarts;
      o.method = parse_method(c.method);
      const auto th = discard_threshold(r.functional, o);
      row.push_back(th ? num(th->eta_t) : "none");
      jr["discard_threshold"] = th ? jnum(th->eta_t) : json(nullptr);
    }
    t.rows.push_back(std::move(row));
    rows.push_back(std::move(jr));
  }
  rep.tables.push_back(std::move(t));
  rep.data = {{"representations", std::move(rows)}};
  return rep;
}

// --------------------------------------------------------------------------
// Config file: JSON object keyed by flag names; flags given on the command line win.

struct Binding {
  CLI::Option* option;
  std::function<void(const json&)> set;
};

template <class T>
std::function<void(const json&)> setter(T& field) {
  return [&field](const json& v) { field = v.get<T>(); };
}

void apply_config_file(const std::string& path, const std::map<std::string, Binding>& bindings,
                       const std::string& command) {
  const json j = parse_json_file(path);
  if (!j.is_object()) throw InvalidArgument("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      if (value != command) throw InvalidArgument("config file is for command '" + value.dump() + "'");
      continue;
    }
    const auto it = bindings.find(key);
    if (it == bindings.end()) throw InvalidArgument("unknown config key '" + key + "'");
    if (it->second.option && it->second.option->count() > 0) continue;
    try {
      it->second.set(value);
    } catch (const json::exception&) {
      throw InvalidArgument("config key '" + key + "' has the wrong type");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  std::string config_path;
  CLI::App app{"Bell inequalities under detection post-processing"};
  app.require_subcommand(1);
  app.fallthrough();

  std::map<std::string, Binding> bindings;
  auto bind = [&](const std::string& name, CLI::Option* opt, std::function<void(const json&)> set) {
    bindings[name] = {opt, std::move(set)};
  };
  bind("inequality", app.add_option("--inequality", cfg.inequality, "Built-in label or functional JSON file"),
       setter(cfg.inequality));
  bind("representation",
       app.add_option("--representation", cfg.representation, "Context per marginal term, e.g. 0,0,1"),
       setter(cfg.representation));
  bind("rule", app.add_option("--rule", cfg.rule, "S00, S01, S10, S11 (region: also all)"), setter(cfg.rule));
  bind("ray", app.add_option("--ray", cfg.ray, "symmetric, fixed-alice=<v>, ratio=<r>"), setter(cfg.ray));
  bind("theta", app.add_option("--theta", cfg.theta, "free, max (pi/4) or radians"), setter(cfg.theta));
  bind("grid-step", app.add_option("--grid-step", cfg.grid_step, "Efficiency grid step"), setter(cfg.grid_step));
  bind("seed", app.add_option("--seed", cfg.seed, "Random seed"), setter(cfg.seed));
  bind("restarts", app.add_option("--restarts", cfg.restarts, "Optimizer restarts"), setter(cfg.restarts));
  bind("output", app.add_option("--output", cfg.output, "Output file (default: standard output)"),
       setter(cfg.output));
  bind("format", app.add_option("--format", cfg.format, "csv or json"), setter(cfg.format));
  bind("double-no-click",
       app.add_option("--double-no-click", cfg.double_no_click, "deterministic or classical"),
       setter(cfg.double_no_click));
  app.add_option("--config", config_path, "JSON config file; command-line flags win");

  app.add_subcommand("bounds", "Exact classical bounds");
  auto* qopt = app.add_subcommand("quantum-opt", "Optimize the assigned quantum value");
  bind("eta-a", qopt->add_option("--eta-a", cfg.eta_a, "Alice efficiency"), setter(cfg.eta_a));
  bind("eta-b", qopt->add_option("--eta-b", cfg.eta_b, "Bob efficiency"), setter(cfg.eta_b));
  app.add_subcommand("critical-eta", "Critical efficiency under assignment");
  auto* region = app.add_subcommand("region", "Violation region over (eta_A, eta_B)");
  bind("lo", region->add_option("--lo", cfg.lo, "Lowest efficiency on the grid"), setter(cfg.lo));
  auto* discard = app.add_subcommand("discard-bound", "Classical bound under discarding");
  bind("eta", discard->add_option("--eta", cfg.eta, "Single average efficiency"), setter(cfg.eta));
  bind("threshold", discard->add_flag("--threshold", cfg.threshold, "Report the violation threshold"),
       setter(cfg.threshold));
  auto* poly = app.add_subcommand("polytope-project", "2D projections of local, NS and discard sets");
  CLI::Option* poly_eta = poly->add_option("--eta", cfg.eta, "Average efficiency of the discard models");
  auto* equiv = app.add_subcommand("equivalence", "Equivalence on non-signaling behaviors");
  bind("with", equiv->add_option("--with", cfg.with, "Second inequality"), setter(cfg.with));
  bind("relabel", equiv->add_flag("--relabel", cfg.relabel, "Also try local relabelings"), setter(cfg.relabel));
  auto* demo = app.add_subcommand("demo-signaling", "Signaling produced by discarding");
  bind("p0", demo->add_option("--p0", cfg.p0, "Weight of the first hidden value"), setter(cfg.p0));
  bind("model", demo->add_option("--model", cfg.model, "LHV model JSON to post-select instead"), setter(cfg.model));
  auto* reps = app.add_subcommand("representations", "Context choices of the marginal terms");
  bind("thresholds", reps->add_flag("--thresholds", cfg.thresholds, "Discard threshold per representation"),
       setter(cfg.thresholds));
  for (auto* sub : {discard, poly, reps}) sub->add_option("--method", cfg.method, "restricted or refined");
  bind("method", nullptr, setter(cfg.method));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    if (!config_path.empty()) {
      // Options that appear on several subcommands: only the active one counts.
      auto* active = app.get_subcommands().front();
      bindings["method"].option = active->get_option_no_throw("--method");
      if (cfg.command == "polytope-project") bindings["eta"] = {poly_eta, setter(cfg.eta)};
      apply_config_file(config_path, bindings, cfg.command);
    }
    apply_command_defaults(cfg);

    static const std::map<std::string, std::function<Report(const RunConfig&)>> commands{
        {"bounds", cmd_bounds},
        {"quantum-opt", cmd_quantum_opt},
        {"critical-eta", cmd_critical_eta},
        {"region", cmd_region},
        {"discard-bound", cmd_discard_bound},
        {"polytope-project", cmd_polytope_project},
        {"equivalence", cmd_equivalence},
        {"demo-signaling", cmd_demo_signaling},
        {"representations", cmd_representations}};
    const Report rep = commands.at(cfg.command)(cfg);

    const std::string header = config_json(cfg).dump();
    std::string text = cfg.format == "csv" ? "# bellpost " + header + "\n" + csv(rep)
                                           : "// bellpost " + header + "\n" + rep.data.dump(2) + "\n";
    if (cfg.output.empty()) {
      std::fwrite(text.data(), 1, text.size(), stdout);
    } else {
      std::ofstream out(cfg.output, std::ios::binary);
      if (!out) throw InvalidArgument("cannot write '" + cfg.output + "'");
      out << text;
    }
    return 0;
  } catch (const DegeneratePostselection& e) {
    std::fprintf(stderr, "bellpost: %s\n", e.what());
    return kExitDegenerate;
  } catch (const Error& e) {
    std::fprintf(stderr, "bellpost: %s\n", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bellpost: internal error: %s\n", e.what());
    return 1;
  }
}
