// Copyright 2026 The dpot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPOT_SCENARIO_HPP_
#define DPOT_SCENARIO_HPP_

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <random>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "dpot/admm.hpp"
#include "dpot/errors.hpp"
#include "dpot/network.hpp"
#include "dpot/privacy.hpp"
#include "dpot/utility.hpp"

namespace dpot {

inline constexpr int kScenarioSchemaVersion = 1;

// A complete, reproducible problem instance plus run parameters.
struct Scenario {
  std::uint64_t seed = 0;
  Network network;
  UtilityTable utilities;
  SolveOptions solve;
  PrivacyConfig privacy;
  std::uint64_t noise_seed = 0;
};

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown field '" + it.key() + "' in " + where);
  }
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing field '" + std::string(key) + "' in " + where);
  return obj.at(key);
}

template <class T>
T as(const json& v, const std::string& where) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where + " must be true or false");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where + " must be a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ConfigError(where + " must be a nonnegative integer");
    }
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

// Either hi (lower bound 0) or [lo, hi].
inline Bounds parse_bounds(const json& v, const std::string& where) {
  if (v.is_number()) return {0.0, as<double>(v, where)};
  if (!v.is_array() || v.size() != 2) throw ConfigError(where + " must be hi or [lo, hi]");
  return {as<double>(v[0], where), as<double>(v[1], where)};
}

inline UtilitySpec parse_utility(const json& v, const std::string& where) {
  check_keys(v, {"linear", "quadratic"}, where);
  if (v.size() != 1) throw ConfigError(where + " needs exactly one of linear/quadratic");
  if (v.contains("linear")) return UtilitySpec::linear(as<double>(v["linear"], where));
  const json& q = v["quadratic"];
  if (!q.is_array() || q.size() != 2) throw ConfigError(where + ".quadratic must be [a, b]");
  return UtilitySpec::quadratic(as<double>(q[0], where), as<double>(q[1], where));
}

inline json utility_json(const UtilitySpec& u) {
  if (u.is_linear()) return {{"linear", u.a}};
  return {{"quadratic", {u.a, u.b}}};
}

}  // namespace detail

// Uniform integer (linear) utilities in [low, high] for every edge, target
// slope then source slope, edge by edge.
inline UtilityTable random_linear_utilities(const Network& net, int low, int high,
                                            std::uint64_t seed) {
  if (low < 0 || high < low) throw ConfigError("random utility range is invalid");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> draw(low, high);
  std::vector<double> t(net.n_edges()), s(net.n_edges());
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    t[e] = draw(rng);
    s[e] = draw(rng);
  }
  return linear_utility_table(net, t, s);
}

// 30 targets, 4 sources, complete; target caps uniform in {1..5}, source caps
// in {20..40}, lower bounds 0; integer slopes in {1..5}; eta = 1, rho = 2.
inline Scenario generate_paper_scenario(std::uint64_t seed) {
  constexpr std::size_t kTargets = 30;
  constexpr std::size_t kSources = 4;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> target_cap(1, 5);
  std::uniform_int_distribution<int> source_cap(20, 40);
  std::uniform_int_distribution<int> slope(1, 5);
  std::vector<Bounds> tb, sb;
  for (std::size_t i = 0; i < kTargets; ++i) tb.push_back({0.0, double(target_cap(rng))});
  for (std::size_t i = 0; i < kSources; ++i) sb.push_back({0.0, double(source_cap(rng))});

  Scenario sc;
  sc.seed = seed;
  sc.network = build_network(kTargets, kSources, complete_edges(kTargets, kSources),
                             std::move(tb), std::move(sb));
  std::vector<double> delta(sc.network.n_edges()), gamma(sc.network.n_edges());
  for (std::size_t e = 0; e < sc.network.n_edges(); ++e) {
    delta[e] = slope(rng);
    gamma[e] = slope(rng);
  }
  sc.utilities = linear_utility_table(sc.network, delta, gamma);
  sc.solve = SolveOptions{};
  sc.solve.eta = 1.0;
  sc.privacy = PrivacyConfig::uniform(sc.network, 1.0, 2.0, 1.0, 2000);
  sc.noise_seed = seed;
  return sc;
}

inline Scenario parse_scenario(const std::string& text) {
  using detail::as;
  using detail::json;
  using detail::require;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  detail::check_keys(root, {"schema_version", "seed", "network", "utilities", "admm", "privacy"},
                     "scenario");
  if (as<int>(require(root, "schema_version", "scenario"), "schema_version") !=
      kScenarioSchemaVersion)
    throw ConfigError("unsupported scenario schema_version");

  Scenario sc;
  sc.seed = root.contains("seed") ? as<std::uint64_t>(root["seed"], "seed") : 0;

  const json& nj = require(root, "network", "scenario");
  detail::check_keys(nj, {"n_targets", "n_sources", "complete", "edges", "target_bounds",
                          "source_bounds"},
                     "network");
  const auto nt = as<std::size_t>(require(nj, "n_targets", "network"), "n_targets");
  const auto ns = as<std::size_t>(require(nj, "n_sources", "network"), "n_sources");
  std::vector<EdgeId> edges;
  const bool complete = nj.contains("complete") && as<bool>(nj["complete"], "complete");
  if (complete && nj.contains("edges"))
    throw ConfigError("network sets both complete and edges");
  if (complete) {
    edges = complete_edges(nt, ns);
  } else {
    const json& ej = require(nj, "edges", "network");
    if (!ej.is_array()) throw ConfigError("network.edges must be an array");
    for (const json& e : ej) {
      if (!e.is_array() || e.size() != 2) throw ConfigError("edge must be [target, source]");
      edges.push_back({as<std::size_t>(e[0], "edge"), as<std::size_t>(e[1], "edge")});
    }
  }
  auto bounds_list = [&](const char* key) {
    const json& bj = require(nj, key, "network");
    if (!bj.is_array()) throw ConfigError(std::string("network.") + key + " must be an array");
    std::vector<Bounds> out;
    for (const json& b : bj) out.push_back(detail::parse_bounds(b, key));
    return out;
  };
  sc.network = build_network(nt, ns, std::move(edges), bounds_list("target_bounds"),
                             bounds_list("source_bounds"));

  const json& uj = require(root, "utilities", "scenario");
  detail::check_keys(uj, {"edges", "random"}, "utilities");
  if (uj.size() != 1) throw ConfigError("utilities needs exactly one of edges/random");
  if (uj.contains("random")) {
    const json& rj = uj["random"];
    detail::check_keys(rj, {"distribution", "low", "high", "seed"}, "utilities.random");
    const std::string dist = as<std::string>(require(rj, "distribution", "utilities.random"),
                                             "distribution");
    if (dist != "uniform_int") throw ConfigError("unknown utility distribution " + dist);
    sc.utilities = random_linear_utilities(
        sc.network, as<int>(require(rj, "low", "utilities.random"), "low"),
        as<int>(require(rj, "high", "utilities.random"), "high"),
        as<std::uint64_t>(require(rj, "seed", "utilities.random"), "seed"));
  } else {
    const json& ej = uj["edges"];
    if (!ej.is_array()) throw ConfigError("utilities.edges must be an array");
    std::vector<EdgeUtility> entries;
    for (const json& e : ej) {
      detail::check_keys(e, {"target", "source"}, "utility entry");
      entries.push_back({detail::parse_utility(require(e, "target", "utility entry"), "target"),
                         detail::parse_utility(require(e, "source", "utility entry"), "source")});
    }
    sc.utilities = make_utility_table(sc.network, std::move(entries));
  }

  if (root.contains("admm")) {
    const json& aj = root["admm"];
    detail::check_keys(aj, {"eta", "max_iters", "primal_tol", "dual_tol"}, "admm");
    if (aj.contains("eta")) sc.solve.eta = as<double>(aj["eta"], "eta");
    if (aj.contains("max_iters")) sc.solve.max_iters = as<std::size_t>(aj["max_iters"], "max_iters");
    if (aj.contains("primal_tol")) sc.solve.primal_tol = as<double>(aj["primal_tol"], "primal_tol");
    if (aj.contains("dual_tol")) sc.solve.dual_tol = as<double>(aj["dual_tol"], "dual_tol");
  }
  sc.solve.validate();

  double rho = 2.0;
  double beta = 1.0;
  std::size_t iters = 2000;
  sc.noise_seed = sc.seed;
  std::vector<double> bt, bs;
  if (root.contains("privacy")) {
    const json& pj = root["privacy"];
    detail::check_keys(pj, {"rho", "beta", "beta_targets", "beta_sources", "iters", "seed"},
                       "privacy");
    if (pj.contains("rho")) rho = as<double>(pj["rho"], "rho");
    if (pj.contains("beta")) beta = as<double>(pj["beta"], "beta");
    if (pj.contains("iters")) iters = as<std::size_t>(pj["iters"], "iters");
    if (pj.contains("seed")) sc.noise_seed = as<std::uint64_t>(pj["seed"], "privacy.seed");
    if (pj.contains("beta_targets") != pj.contains("beta_sources"))
      throw ConfigError("beta_targets and beta_sources must be given together");
    if (pj.contains("beta_targets")) {
      if (pj.contains("beta")) throw ConfigError("privacy sets both beta and per-node betas");
      bt = as<std::vector<double>>(pj["beta_targets"], "beta_targets");
      bs = as<std::vector<double>>(pj["beta_sources"], "beta_sources");
    }
  }
  sc.privacy = PrivacyConfig::uniform(sc.network, beta, rho, sc.solve.eta, iters);
  if (!bt.empty() || !bs.empty()) {
    if (bt.size() != sc.network.n_targets() || bs.size() != sc.network.n_sources())
      throw ConfigError("per-node betas must have one entry per node");
    for (std::size_t i = 0; i < bt.size(); ++i) sc.privacy.beta[i] = BetaSchedule::constant(bt[i]);
    for (std::size_t i = 0; i < bs.size(); ++i)
      sc.privacy.beta[bt.size() + i] = BetaSchedule::constant(bs[i]);
  }
  sc.privacy.validate(sc.network);
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// Explicit form: every edge and utility written out.
inline std::string scenario_json(const Scenario& sc) {
  using detail::json;
  json net;
  net["n_targets"] = sc.network.n_targets();
  net["n_sources"] = sc.network.n_sources();
  if (sc.network.edges() == complete_edges(sc.network.n_targets(), sc.network.n_sources())) {
    net["complete"] = true;
  } else {
    json edges = json::array();
    for (const EdgeId& e : sc.network.edges()) edges.push_back({e.target, e.source});
    net["edges"] = edges;
  }
  json tb = json::array(), sb = json::array();
  for (const Bounds& b : sc.network.target_bounds()) tb.push_back({b.lo, b.hi});
  for (const Bounds& b : sc.network.source_bounds()) sb.push_back({b.lo, b.hi});
  net["target_bounds"] = tb;
  net["source_bounds"] = sb;

  json entries = json::array();
  for (const EdgeUtility& u : sc.utilities.entries())
    entries.push_back({{"target", detail::utility_json(u.target)},
                       {"source", detail::utility_json(u.source)}});

  json privacy;
  privacy["rho"] = sc.privacy.rho;
  privacy["iters"] = sc.privacy.iterations;
  privacy["seed"] = sc.noise_seed;
  bool shared = true;
  for (const BetaSchedule& b : sc.privacy.beta)
    shared = shared && b.values.size() == 1 && b.values[0] == sc.privacy.beta[0].values[0];
  if (shared) {
    privacy["beta"] = sc.privacy.beta[0].values[0];
  } else {
    json bt = json::array(), bs = json::array();
    for (std::size_t i = 0; i < sc.network.n_targets(); ++i)
      bt.push_back(sc.privacy.beta[i].values[0]);
    for (std::size_t i = 0; i < sc.network.n_sources(); ++i)
      bs.push_back(sc.privacy.beta[sc.network.n_targets() + i].values[0]);
    privacy["beta_targets"] = bt;
    privacy["beta_sources"] = bs;
  }

  json root;
  root["schema_version"] = kScenarioSchemaVersion;
  root["seed"] = sc.seed;
  root["network"] = net;
  root["utilities"] = {{"edges", entries}};
  root["admm"] = {{"eta", sc.solve.eta},
                  {"max_iters", sc.solve.max_iters},
                  {"primal_tol", sc.solve.primal_tol},
                  {"dual_tol", sc.solve.dual_tol}};
  root["privacy"] = privacy;
  return root.dump(2) + "\n";
}

}  // namespace dpot

#endif  // DPOT_SCENARIO_HPP_
