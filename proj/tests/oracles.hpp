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

// Independent reference computations used by the tests. Nothing here calls
// into the solver code paths it is used to check.

#ifndef DPOT_TESTS_ORACLES_HPP_
#define DPOT_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include "dpot/dpot.hpp"

namespace dpot::testing {

// Euclidean projection onto {z >= 0, lo <= sum z <= hi} by bisection on the
// shift, independent of the sort-based routine.
inline std::vector<double> bisection_project(const std::vector<double>& v, double lo,
                                             double hi) {
  auto sum_at = [&](double t) {
    double s = 0.0;
    for (double x : v) s += std::max(x - t, 0.0);
    return s;
  };
  double t = 0.0;
  const double s0 = sum_at(0.0);
  if (s0 > hi || s0 < lo) {
    const double target = s0 > hi ? hi : lo;
    double a = -1e6, b = 1e6;
    for (int i = 0; i < 200; ++i) {
      const double m = 0.5 * (a + b);
      (sum_at(m) > target ? a : b) = m;
    }
    t = 0.5 * (a + b);
  }
  std::vector<double> z(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) z[i] = std::max(v[i] - t, 0.0);
  return z;
}

// Per-coordinate term of a local objective.
inline double local_term(const LocalProblem& p, std::size_t i, double z) {
  const double c = p.side == NodeKind::kTarget ? -p.duals[i] : p.duals[i];
  const double u = p.utilities[i].a * z - 0.5 * p.utilities[i].b * z * z;
  const double d = z - p.consensus[i];
  return -u - c * z + 0.5 * p.eta * d * d;
}

// Minimum of the local objective over plans on the grid {0, step, ...} with
// lo <= sum <= hi. Bounds must be multiples of step. All but the last
// coordinate are enumerated; the last is the best admissible grid index of a
// convex sequence, which is the clamp of its unconstrained grid argmin.
inline double grid_local_minimum(const LocalProblem& p, double step) {
  const std::size_t d = p.size();
  const auto max_k = static_cast<long>(std::llround(p.sum_bounds.hi / step));
  const auto lo_k = static_cast<long>(std::llround(p.sum_bounds.lo / step));
  std::vector<std::vector<double>> g(d, std::vector<double>(static_cast<std::size_t>(max_k) + 1));
  for (std::size_t i = 0; i < d; ++i)
    for (long k = 0; k <= max_k; ++k)
      g[i][static_cast<std::size_t>(k)] = local_term(p, i, static_cast<double>(k) * step);
  const std::vector<double>& last = g[d - 1];
  const long argmin = static_cast<long>(std::min_element(last.begin(), last.end()) - last.begin());

  double best = std::numeric_limits<double>::infinity();
  auto finish = [&](long used, double partial) {
    const long kmin = std::max(0L, lo_k - used), kmax = max_k - used;
    if (kmin > kmax) return;
    const long k = std::clamp(argmin, kmin, kmax);
    best = std::min(best, partial + last[static_cast<std::size_t>(k)]);
  };
  if (d == 1) {
    finish(0, 0.0);
  } else if (d == 2) {
    for (long a = 0; a <= max_k; ++a) finish(a, g[0][static_cast<std::size_t>(a)]);
  } else if (d == 3) {
    for (long a = 0; a <= max_k; ++a)
      for (long b = 0; a + b <= max_k; ++b)
        finish(a + b, g[0][static_cast<std::size_t>(a)] + g[1][static_cast<std::size_t>(b)]);
  }
  return best;
}

// Largest violation of the KKT conditions of a local solution.
inline double kkt_violation(const LocalProblem& p, const LocalSolution& s) {
  double worst = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double z = s.plan[i];
    sum += z;
    if (z < 0.0) worst = std::max(worst, -z);
    const double c = p.side == NodeKind::kTarget ? -p.duals[i] : p.duals[i];
    const double g = -(p.utilities[i].a - p.utilities[i].b * z) - c +
                     p.eta * (z - p.consensus[i]) + s.multiplier;
    worst = std::max(worst, z > 0.0 ? std::abs(g) : std::max(0.0, -g));
  }
  const double scale = std::max(1.0, p.sum_bounds.hi);
  if (s.multiplier > 0.0) worst = std::max(worst, std::abs(sum - p.sum_bounds.hi) / scale);
  if (s.multiplier < 0.0) worst = std::max(worst, std::abs(sum - p.sum_bounds.lo) / scale);
  worst = std::max(worst, (p.sum_bounds.lo - sum) / scale);
  worst = std::max(worst, (sum - p.sum_bounds.hi) / scale);
  return worst;
}

// LP feasibility of integer bounds by enumeration of integer plans; integral
// bounds make the transport polytope integral, so this is exact.
inline bool brute_feasible(const Network& net) {
  const std::size_t n = net.n_edges();
  std::vector<int> cap(n), idx(n, 0);
  for (std::size_t e = 0; e < n; ++e)
    cap[e] = static_cast<int>(std::min(net.target_bounds()[net.edge(e).target].hi,
                                       net.source_bounds()[net.edge(e).source].hi));
  while (true) {
    std::vector<double> in(net.n_targets(), 0.0), out(net.n_sources(), 0.0);
    for (std::size_t e = 0; e < n; ++e) {
      in[net.edge(e).target] += idx[e];
      out[net.edge(e).source] += idx[e];
    }
    bool ok = true;
    for (std::size_t x = 0; x < in.size(); ++x)
      ok = ok && in[x] >= net.target_bounds()[x].lo && in[x] <= net.target_bounds()[x].hi;
    for (std::size_t y = 0; y < out.size(); ++y)
      ok = ok && out[y] >= net.source_bounds()[y].lo && out[y] <= net.source_bounds()[y].hi;
    if (ok) return true;
    std::size_t e = 0;
    while (e < n && ++idx[e] > cap[e]) idx[e++] = 0;
    if (e == n) return false;
  }
}

// CDF of Gamma(d, rate xi) for integer shape d:
// 1 - exp(-x) sum_{k<d} x^k/k! with x = xi*r.
inline double gamma_cdf_integer(std::size_t d, double xi, double r) {
  if (r <= 0.0) return 0.0;
  const double x = xi * r;
  double term = 1.0, sum = 1.0;
  for (std::size_t k = 1; k < d; ++k) {
    term *= x / static_cast<double>(k);
    sum += term;
  }
  return 1.0 - std::exp(-x) * sum;
}

// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Random network with every node covered by at least one edge.
inline Network random_network(std::mt19937_64& rng, std::size_t nt, std::size_t ns,
                              double density, double hi_t, double hi_s, bool integer,
                              double lo_fraction = 0.0) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<EdgeId> edges;
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t s = 0; s < ns; ++s)
      if (u01(rng) < density) edges.push_back({t, s});
  for (std::size_t t = 0; t < nt; ++t)
    if (std::none_of(edges.begin(), edges.end(), [&](const EdgeId& e) { return e.target == t; }))
      edges.push_back({t, std::uniform_int_distribution<std::size_t>(0, ns - 1)(rng)});
  for (std::size_t s = 0; s < ns; ++s)
    if (std::none_of(edges.begin(), edges.end(), [&](const EdgeId& e) { return e.source == s; }))
      edges.push_back({std::uniform_int_distribution<std::size_t>(0, nt - 1)(rng), s});
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  auto draw = [&](double hi) {
    double h = integer ? std::floor(u01(rng) * (hi + 1.0)) : u01(rng) * hi;
    h = std::min(h, hi);
    double l = integer ? std::floor(u01(rng) * (h + 1.0) * lo_fraction) : u01(rng) * h * lo_fraction;
    l = std::min(l, h);
    return Bounds{l, h};
  };
  std::vector<Bounds> tb(nt), sb(ns);
  for (Bounds& b : tb) b = draw(hi_t);
  for (Bounds& b : sb) b = draw(hi_s);
  return build_network(nt, ns, std::move(edges), std::move(tb), std::move(sb));
}

inline UtilityTable random_linear(std::mt19937_64& rng, const Network& net, int low, int high) {
  std::uniform_int_distribution<int> d(low, high);
  std::vector<double> t(net.n_edges()), s(net.n_edges());
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    t[e] = d(rng);
    s[e] = d(rng);
  }
  return linear_utility_table(net, t, s);
}

// Negative-control agent: emits its raw utility coefficients instead of
// perturbed proposals.
class LeakyAgent : public ProposalAgent {
 public:
  using ProposalAgent::ProposalAgent;
  std::vector<RoundMessage> propose(std::size_t round) override {
    std::vector<double> raw;
    for (const UtilitySpec& u : utilities()) raw.push_back(u.a);
    return emit(round, raw);
  }
};

// Replaces `node`'s agent with a LeakyAgent holding the same data.
inline void install_leaky_agent(std::vector<std::unique_ptr<NodeAgent>>& agents,
                                const Network& net, const UtilityTable& u,
                                const PrivacyConfig& privacy, NodeId node) {
  const auto incident = net.incident(node);
  std::vector<UtilitySpec> own;
  for (std::size_t e : incident) own.push_back(u.side(e, node.kind));
  agents[net.flat_index(node)] = std::make_unique<LeakyAgent>(
      node, std::vector<std::size_t>(incident.begin(), incident.end()), own, net.bounds(node),
      privacy.schedule(net, node), privacy.rho, privacy.eta, 0);
}

}  // namespace dpot::testing

#endif  // DPOT_TESTS_ORACLES_HPP_
