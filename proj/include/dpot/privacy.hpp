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

#ifndef DPOT_PRIVACY_HPP_
#define DPOT_PRIVACY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dpot/admm.hpp"
#include "dpot/errors.hpp"
#include "dpot/local_solver.hpp"
#include "dpot/network.hpp"
#include "dpot/utility.hpp"

namespace dpot {

using NoiseEngine = std::mt19937_64;

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of `node`'s private noise stream under `master`.
inline std::uint64_t node_stream_seed(std::uint64_t master, NodeId node) {
  const std::uint64_t tag =
      (node.kind == NodeKind::kTarget ? 0x7461ULL : 0x7372ULL) << 48;
  return mix64(mix64(master) ^ (tag | static_cast<std::uint64_t>(node.index)));
}

// Privacy level of one node across iterations. A single value is constant;
// a schedule shorter than the run repeats its last entry.
struct BetaSchedule {
  std::vector<double> values;

  static BetaSchedule constant(double beta) { return {{beta}}; }

  double at(std::size_t k) const {
    return k < values.size() ? values[k] : values.back();
  }
};

struct PrivacyConfig {
  std::vector<BetaSchedule> beta;  // indexed by Network::flat_index
  double rho = 1.0;
  double eta = 1.0;
  std::size_t iterations = 1;

  static PrivacyConfig uniform(const Network& net, double beta, double rho, double eta,
                               std::size_t iterations) {
    PrivacyConfig c;
    c.beta.assign(net.n_nodes(), BetaSchedule::constant(beta));
    c.rho = rho;
    c.eta = eta;
    c.iterations = iterations;
    return c;
  }

  const BetaSchedule& schedule(const Network& net, NodeId node) const {
    return beta[net.flat_index(node)];
  }

  void validate(const Network& net) const {
    if (beta.size() != net.n_nodes())
      throw ConfigError("privacy schedule needs one entry per node");
    for (const BetaSchedule& b : beta) {
      if (b.values.empty()) throw ConfigError("empty beta schedule");
      for (double v : b.values)
        if (!(v > 0.0)) throw ConfigError("beta must be positive");
    }
    (void)GradBound(rho);
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
    if (iterations < 1) throw ConfigError("privacy run needs at least one iteration");
  }
};

// Noise rate calibrated to the local sensitivity rho/eta:
// xi * (rho/eta) = beta. beta = +inf gives xi = +inf (no noise).
inline double xi_from_beta(double rho, double eta, double beta) {
  if (!(rho > 0.0) || !(eta > 0.0) || !(beta > 0.0))
    throw ConfigError("xi needs positive rho, eta and beta");
  return (eta / rho) * beta;
}

struct NoiseDraw {
  std::vector<double> values;
  double norm = 0.0;
};

// Draws eps in R^d with density proportional to exp(-xi * ||eps||). The norm
// of such a vector is Gamma(d, rate xi) and its direction is uniform, so the
// draw is a Gamma radius times a normalized Gaussian vector. For xi = +inf
// the draw is exactly zero and consumes nothing from the engine.
template <class Engine>
NoiseDraw sample_noise(std::size_t d, double xi, Engine& rng) {
  if (d < 1) throw ConfigError("noise dimension must be >= 1");
  if (!(xi > 0.0)) throw ConfigError("noise rate xi must be positive");
  NoiseDraw draw;
  draw.values.assign(d, 0.0);
  if (std::isinf(xi)) return draw;

  std::gamma_distribution<double> radius(static_cast<double>(d), 1.0 / xi);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double r = radius(rng);
  double len2 = 0.0;
  do {
    len2 = 0.0;
    for (double& v : draw.values) {
      v = normal(rng);
      len2 += v * v;
    }
  } while (len2 == 0.0);
  const double scale = r / std::sqrt(len2);
  for (double& v : draw.values) v *= scale;
  draw.norm = std::sqrt(std::inner_product(draw.values.begin(), draw.values.end(),
                                           draw.values.begin(), 0.0));
  return draw;
}

// Adds the noise to a solved proposal. No clipping: the released value may
// leave the feasible set or go negative.
inline std::vector<double> perturb(std::span<const double> plan, const NoiseDraw& draw) {
  if (plan.size() != draw.values.size())
    throw ConfigError("noise dimension does not match plan");
  std::vector<double> out(plan.begin(), plan.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += draw.values[i];
  return out;
}

struct DpIterate {
  std::vector<double> pi;     // consensus of the perturbed proposals
  std::vector<double> alpha;
  double social_utility = 0.0;

  bool operator==(const DpIterate&) const = default;
};

struct DpResult {
  std::vector<DpIterate> trace;
  // Tail average of the consensus over the final 10% of iterations (at least
  // one). A point estimate, not an iterate of the algorithm.
  std::vector<double> summary_plan;
  std::size_t tail_begin = 0;
  double summary_utility = 0.0;
  double tail_mean_utility = 0.0;
  double tail_std_utility = 0.0;
  std::vector<std::uint64_t> node_seeds;  // by Network::flat_index
  TransportState final_state;
};

namespace detail {

inline void summarize_tail(DpResult& r, const UtilityTable& utilities, const Network& net) {
  const std::size_t k = r.trace.size();
  const std::size_t tail = std::max<std::size_t>(1, k / 10);
  r.tail_begin = k - tail;
  r.summary_plan.assign(net.n_edges(), 0.0);
  double mean = 0.0;
  for (std::size_t i = r.tail_begin; i < k; ++i) {
    for (std::size_t e = 0; e < net.n_edges(); ++e) r.summary_plan[e] += r.trace[i].pi[e];
    mean += r.trace[i].social_utility;
  }
  for (double& v : r.summary_plan) v /= static_cast<double>(tail);
  mean /= static_cast<double>(tail);
  double var = 0.0;
  for (std::size_t i = r.tail_begin; i < k; ++i) {
    const double d = r.trace[i].social_utility - mean;
    var += d * d;
  }
  r.tail_mean_utility = mean;
  r.tail_std_utility = tail > 1 ? std::sqrt(var / static_cast<double>(tail - 1)) : 0.0;
  r.summary_utility = social_utility(r.summary_plan, utilities, net);
}

}  // namespace detail

// Output-perturbed iteration run for exactly privacy.iterations rounds. Each
// node adds its own noise to its solved proposal before the proposal is
// shared; consensus and dual updates only ever see perturbed values.
inline DpResult dp_run(const Network& net, const UtilityTable& utilities,
                       const PrivacyConfig& privacy, const SolveOptions& opts,
                       std::uint64_t seed) {
  opts.validate();
  privacy.validate(net);
  if (opts.eta != privacy.eta)
    throw ConfigError("solver eta and privacy eta differ");
  if (utilities.size() != net.n_edges())
    throw ConfigError("utility table does not match network");
  if (!check_feasibility(net))
    throw InfeasibleError("network bounds admit no feasible transport plan");

  DpResult result;
  std::vector<NoiseEngine> engines;
  engines.reserve(net.n_nodes());
  for (const NodeId node : net.nodes()) {
    result.node_seeds.push_back(node_stream_seed(seed, node));
    engines.emplace_back(result.node_seeds.back());
  }

  TransportState state = TransportState::zeros(net.n_edges());
  result.trace.reserve(privacy.iterations);
  for (std::size_t k = 0; k < privacy.iterations; ++k) {
    auto add_noise = [&](NodeId node, std::vector<double>& plan) {
      const double xi = xi_from_beta(privacy.rho, privacy.eta,
                                     privacy.schedule(net, node).at(k));
      const NoiseDraw draw = sample_noise(plan.size(), xi, engines[net.flat_index(node)]);
      for (std::size_t i = 0; i < plan.size(); ++i) plan[i] += draw.values[i];
    };
    state = detail::advance_short(state, net, utilities, opts.eta, add_noise);
    result.trace.push_back(
        {state.pi, state.alpha, social_utility(state.pi, utilities, net)});
  }
  result.final_state = std::move(state);
  detail::summarize_tail(result, utilities, net);
  return result;
}

// Two private datasets of one node, differing in exactly one entry.
struct NeighborPair {
  std::vector<double> base;
  std::vector<double> altered;
  std::size_t changed_index = 0;
};

inline std::size_t hamming_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("datasets differ in size");
  std::size_t h = 0;
  for (std::size_t i = 0; i < a.size(); ++i) h += a[i] != b[i] ? 1 : 0;
  return h;
}

// When `max_change` is set, |new_value - old| must not exceed it (the
// gradient-change hypothesis of the sensitivity bound).
inline NeighborPair make_neighbor(std::span<const double> dataset, std::size_t index,
                                  double new_value,
                                  std::optional<double> max_change = std::nullopt) {
  if (index >= dataset.size()) throw ConfigError("neighbor index out of range");
  if (!std::isfinite(new_value)) throw ConfigError("neighbor value is not finite");
  if (dataset[index] == new_value)
    throw ConfigError("neighbor value equals the original entry");
  if (max_change && std::abs(new_value - dataset[index]) > *max_change)
    throw ConfigError("neighbor change exceeds the gradient bound");
  NeighborPair pair;
  pair.base.assign(dataset.begin(), dataset.end());
  pair.altered = pair.base;
  pair.altered[index] = new_value;
  pair.changed_index = index;
  return pair;
}

// A node's private dataset: the linear coefficient of its utility on each
// incident edge.
inline std::vector<double> node_dataset(const LocalProblem& p) {
  std::vector<double> d;
  d.reserve(p.size());
  for (const UtilitySpec& u : p.utilities) d.push_back(u.a);
  return d;
}

inline LocalProblem with_dataset(LocalProblem p, std::span<const double> dataset) {
  if (dataset.size() != p.size()) throw ConfigError("dataset does not match problem");
  for (std::size_t i = 0; i < p.size(); ++i) p.utilities[i].a = dataset[i];
  return p;
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

struct SensitivityReport {
  double max_distance = 0.0;
  double bound = 0.0;  // rho / eta
  std::size_t trials = 0;
  std::size_t worst_trial = 0;

  bool within_bound(double slack = 1e-9) const { return max_distance <= bound + slack; }
};

// Empirical sensitivity of `node`'s subproblem solution to a one-entry change
// of its dataset of size at most rho. Each trial draws a fresh iteration
// context (consensus in [0, hi], duals in [-2 rho, 2 rho]).
template <class Engine>
SensitivityReport sensitivity_audit(const Network& net, const UtilityTable& utilities,
                                    NodeId node, std::size_t trials, Engine& rng,
                                    double rho, double eta) {
  if (trials < 1) throw ConfigError("sensitivity audit needs at least one trial");
  (void)GradBound(rho);
  const auto incident = net.incident(node);
  const double hi = std::max(1.0, net.bounds(node).hi);
  std::uniform_real_distribution<double> consensus(0.0, hi);
  std::uniform_real_distribution<double> dual(-2.0 * rho, 2.0 * rho);
  std::uniform_real_distribution<double> change(0.0, rho);
  std::uniform_int_distribution<std::size_t> pick(0, incident.size() - 1);
  std::bernoulli_distribution coin(0.5);

  SensitivityReport report;
  report.bound = rho / eta;
  report.trials = trials;
  std::vector<double> pi(net.n_edges(), 0.0), alpha(net.n_edges(), 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t e : incident) {
      pi[e] = consensus(rng);
      alpha[e] = dual(rng);
    }
    const LocalProblem base = make_local_problem(net, utilities, node, pi, alpha, eta);
    const std::vector<double> data = node_dataset(base);
    const std::size_t i = pick(rng);
    double delta = change(rng);
    if (delta == 0.0) delta = rho;
    const bool up = coin(rng) || data[i] - delta < 0.0;
    const NeighborPair pair =
        make_neighbor(data, i, up ? data[i] + delta : data[i] - delta, rho);
    const LocalSolution w = solve_subproblem(base);
    const LocalSolution w2 = solve_subproblem(with_dataset(base, pair.altered));
    const double dist = euclidean_distance(w.plan, w2.plan);
    if (dist > report.max_distance) {
      report.max_distance = dist;
      report.worst_trial = t;
    }
  }
  return report;
}

struct DensityRatioCheck {
  bool holds = true;
  double log_ratio = 0.0;    // xi * s
  double worst_ratio = 1.0;  // exp(xi * s)
};

// Scalar release o = W + eps with density ~ exp(-xi |eps|). For two
// solutions |W - W'| <= s the supremum over o of
// exp(-xi |o - W|) / exp(-xi |o - W'|) is exp(xi s), attained for o beyond
// both; the mechanism is beta-private iff xi * s <= beta.
inline DensityRatioCheck density_ratio_check_1d(double xi, double sensitivity, double beta) {
  if (!(xi > 0.0) || !(sensitivity >= 0.0) || !(beta > 0.0))
    throw ConfigError("density ratio check needs xi > 0, s >= 0, beta > 0");
  DensityRatioCheck c;
  c.log_ratio = xi * sensitivity;
  c.worst_ratio = std::exp(c.log_ratio);
  c.holds = c.log_ratio <= beta * (1.0 + 1e-12);
  return c;
}

}  // namespace dpot

#endif  // DPOT_PRIVACY_HPP_
