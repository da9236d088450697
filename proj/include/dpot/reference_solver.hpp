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

#ifndef DPOT_REFERENCE_SOLVER_HPP_
#define DPOT_REFERENCE_SOLVER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "dpot/admm.hpp"
#include "dpot/errors.hpp"
#include "dpot/network.hpp"
#include "dpot/utility.hpp"

namespace dpot {

// Centralized solution: a plan and its social utility.
struct CentralSolution {
  std::vector<double> plan;
  double objective = 0.0;
};

namespace detail {

// Smallest q <= cap with x*q integral (to 1e-9 relative), from the continued
// fraction convergents of x; 0 when no such q exists.
inline std::int64_t rational_denominator(double x, std::int64_t cap) {
  const auto integral = [](double v) {
    return std::abs(v - std::round(v)) <= 1e-9 * std::max(1.0, std::abs(v));
  };
  if (integral(x)) return 1;
  double frac = std::abs(x);
  std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(frac));
  std::int64_t k_prev = 0, k = 1;
  double rem = frac - std::floor(frac);
  for (int i = 0; i < 64 && rem > 0.0; ++i) {
    const double inv = 1.0 / rem;
    const auto a = static_cast<std::int64_t>(std::floor(inv));
    rem = inv - std::floor(inv);
    const std::int64_t h_next = a * h + h_prev;
    const std::int64_t k_next = a * k + k_prev;
    if (k_next > cap || k_next <= 0) return 0;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
    if (integral(std::abs(x) * static_cast<double>(k))) return k;
  }
  return 0;
}

inline std::int64_t scale_for(const std::vector<double>& values, std::int64_t cap) {
  std::int64_t scale = 1;
  for (double v : values) {
    const std::int64_t q = rational_denominator(v, cap);
    if (q == 0) throw ConfigError("value has no rational form within the scaling cap");
    scale = std::lcm(scale, q);
    if (scale > cap) throw ConfigError("integer scaling factor exceeds its cap");
  }
  return scale;
}

inline std::int64_t to_scaled(double v, std::int64_t scale) {
  return static_cast<std::int64_t>(std::llround(v * static_cast<double>(scale)));
}

// Successive shortest paths with potentials on integer data.
class MinCostFlow {
 public:
  struct Arc {
    std::size_t to;
    std::int64_t cap;
    std::int64_t cost;
    std::int64_t flow;
  };

  explicit MinCostFlow(std::size_t n) : adj_(n) {}

  std::size_t add_arc(std::size_t from, std::size_t to, std::int64_t cap,
                      std::int64_t cost) {
    const std::size_t id = arcs_.size();
    arcs_.push_back({to, cap, cost, 0});
    arcs_.push_back({from, 0, -cost, 0});
    adj_[from].push_back(id);
    adj_[to].push_back(id + 1);
    return id;
  }

  // Forces `amount` units onto `arc` without routing them.
  void preset_flow(std::size_t arc, std::int64_t amount) {
    arcs_[arc].flow += amount;
    arcs_[arc ^ 1].flow -= amount;
  }

  // Routes up to `limit` units s -> t at minimum cost. Residual arcs must have
  // nonnegative cost on entry.
  std::int64_t solve(std::size_t s, std::size_t t, std::int64_t limit) {
    const std::size_t n = adj_.size();
    std::vector<std::int64_t> potential(n, 0);
    std::int64_t sent = 0;
    constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
    while (sent < limit) {
      std::vector<std::int64_t> dist(n, kInf);
      std::vector<std::size_t> via(n, arcs_.size());
      using Item = std::pair<std::int64_t, std::size_t>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      dist[s] = 0;
      heap.push({0, s});
      while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d != dist[v]) continue;
        for (std::size_t id : adj_[v]) {
          const Arc& a = arcs_[id];
          if (a.cap - a.flow <= 0) continue;
          const std::int64_t nd = d + a.cost + potential[v] - potential[a.to];
          if (nd < dist[a.to]) {
            dist[a.to] = nd;
            via[a.to] = id;
            heap.push({nd, a.to});
          }
        }
      }
      if (dist[t] == kInf) break;
      for (std::size_t v = 0; v < n; ++v)
        if (dist[v] != kInf) potential[v] += dist[v];
      std::int64_t push = limit - sent;
      for (std::size_t v = t; v != s; v = arcs_[via[v] ^ 1].to)
        push = std::min(push, arcs_[via[v]].cap - arcs_[via[v]].flow);
      for (std::size_t v = t; v != s; v = arcs_[via[v] ^ 1].to) {
        arcs_[via[v]].flow += push;
        arcs_[via[v] ^ 1].flow -= push;
      }
      sent += push;
    }
    return sent;
  }

  // Bellman-Ford over the residual graph: a flow is cost-optimal among flows
  // with the same node balances iff no residual cycle has negative cost.
  bool has_negative_residual_cycle() const {
    const std::size_t n = adj_.size();
    std::vector<std::int64_t> dist(n, 0);
    for (std::size_t round = 0; round <= n; ++round) {
      bool changed = false;
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t id : adj_[v]) {
          const Arc& a = arcs_[id];
          if (a.cap - a.flow <= 0) continue;
          if (dist[v] + a.cost < dist[a.to]) {
            dist[a.to] = dist[v] + a.cost;
            changed = true;
          }
        }
      if (!changed) return false;
    }
    return true;
  }

  const Arc& arc(std::size_t id) const { return arcs_[id]; }

 private:
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> adj_;
};

}  // namespace detail

// Integer circulation equivalent of the centralized linear problem:
//   S* -> y [q_lo, q_hi] cost 0,  y -> x [0, min(p_hi, q_hi)] cost -(delta+gamma),
//   x -> T* [p_lo, p_hi] cost 0,  T* -> S* [0, sum q_hi] cost 0,
// with amounts multiplied by flow_scale and costs by cost_scale.
struct FlowInstance {
  struct Arc {
    std::size_t from;
    std::size_t to;
    std::int64_t lo;
    std::int64_t hi;
    std::int64_t cost;
  };

  std::size_t n_nodes = 0;
  std::size_t super_source = 0;  // S*
  std::size_t super_sink = 0;    // T*
  std::vector<Arc> arcs;
  std::vector<std::size_t> edge_arcs;  // arc index of each network edge
  std::int64_t flow_scale = 1;
  std::int64_t cost_scale = 1;
};

inline constexpr std::int64_t kMaxScale = 1'000'000'000;

inline FlowInstance build_flow_instance(const Network& net, const UtilityTable& utilities) {
  if (utilities.size() != net.n_edges())
    throw ConfigError("utility table does not match network");
  if (!utilities.all_linear())
    throw ConfigError("the flow oracle accepts linear utilities only");

  std::vector<double> amounts;
  for (const Bounds& b : net.target_bounds()) amounts.insert(amounts.end(), {b.lo, b.hi});
  for (const Bounds& b : net.source_bounds()) amounts.insert(amounts.end(), {b.lo, b.hi});
  std::vector<double> slopes;
  for (const EdgeUtility& u : utilities.entries())
    slopes.insert(slopes.end(), {u.target.a, u.source.a});

  FlowInstance inst;
  inst.flow_scale = detail::scale_for(amounts, kMaxScale);
  inst.cost_scale = detail::scale_for(slopes, kMaxScale);

  const std::size_t nt = net.n_targets();
  const std::size_t ns = net.n_sources();
  inst.n_nodes = nt + ns + 2;
  inst.super_source = nt + ns;
  inst.super_sink = nt + ns + 1;

  const auto fs = inst.flow_scale;
  const auto cs = inst.cost_scale;
  // Largest scaled amount times largest scaled cost, summed over edges, must
  // fit in int64 with headroom.
  double total_flow = 0.0, max_cost = 0.0;
  for (const Bounds& b : net.source_bounds()) total_flow += b.hi * static_cast<double>(fs);
  for (const EdgeUtility& u : utilities.entries())
    max_cost = std::max(max_cost, (u.target.a + u.source.a) * static_cast<double>(cs));
  if (total_flow * std::max(1.0, max_cost) > 1e17)
    throw ConfigError("scaled flow instance would overflow 64-bit costs");

  std::int64_t total_supply = 0;
  for (std::size_t y = 0; y < ns; ++y) {
    const Bounds& b = net.source_bounds()[y];
    inst.arcs.push_back({inst.super_source, nt + y, detail::to_scaled(b.lo, fs),
                         detail::to_scaled(b.hi, fs), 0});
    total_supply += detail::to_scaled(b.hi, fs);
  }
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    const EdgeId& edge = net.edge(e);
    const double cap = std::min(net.target_bounds()[edge.target].hi,
                                net.source_bounds()[edge.source].hi);
    // Integer slopes scaled separately so the sum stays exact.
    const std::int64_t cost = -(detail::to_scaled(utilities[e].target.a, cs) +
                                detail::to_scaled(utilities[e].source.a, cs));
    inst.edge_arcs.push_back(inst.arcs.size());
    inst.arcs.push_back({nt + edge.source, edge.target, 0, detail::to_scaled(cap, fs), cost});
  }
  for (std::size_t x = 0; x < nt; ++x) {
    const Bounds& b = net.target_bounds()[x];
    inst.arcs.push_back({x, inst.super_sink, detail::to_scaled(b.lo, fs),
                         detail::to_scaled(b.hi, fs), 0});
  }
  inst.arcs.push_back({inst.super_sink, inst.super_source, 0, total_supply, 0});
  return inst;
}

// Exact maximizer of sum (delta + gamma) * pi under the interval bounds, via a
// minimum-cost circulation. Lower bounds become fixed offsets and
// negative-cost arcs are saturated; the resulting imbalances are then repaired by successive
// shortest paths from a fresh source/sink pair.
inline CentralSolution solve_centralized_linear(const Network& net,
                                                const UtilityTable& utilities) {
  const FlowInstance inst = build_flow_instance(net, utilities);
  const std::size_t ss = inst.n_nodes;
  const std::size_t tt = inst.n_nodes + 1;
  detail::MinCostFlow mcf(inst.n_nodes + 2);
  std::vector<std::int64_t> excess(inst.n_nodes, 0);
  std::vector<std::size_t> ids;
  ids.reserve(inst.arcs.size());
  // Each arc carries lo as a fixed offset and (hi - lo) as free capacity,
  // so no residual arc can take the flow below its lower bound.
  for (const FlowInstance::Arc& a : inst.arcs) {
    const std::size_t id = mcf.add_arc(a.from, a.to, a.hi - a.lo, a.cost);
    ids.push_back(id);
    const std::int64_t free = a.cost < 0 ? a.hi - a.lo : 0;
    if (free != 0) mcf.preset_flow(id, free);
    excess[a.to] += a.lo + free;
    excess[a.from] -= a.lo + free;
  }
  std::int64_t demand = 0;
  for (std::size_t v = 0; v < inst.n_nodes; ++v) {
    if (excess[v] > 0) {
      mcf.add_arc(ss, v, excess[v], 0);
      demand += excess[v];
    } else if (excess[v] < 0) {
      mcf.add_arc(v, tt, -excess[v], 0);
    }
  }
  const std::int64_t routed = demand > 0 ? mcf.solve(ss, tt, demand) : 0;
  if (routed < demand)
    throw InfeasibleError("network bounds admit no feasible transport plan");
  if (mcf.has_negative_residual_cycle())
    throw std::logic_error("min-cost flow finished without an optimality certificate");

  CentralSolution sol;
  sol.plan.resize(net.n_edges());
  __int128 cost = 0;
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    const std::size_t a = inst.edge_arcs[e];
    const std::int64_t flow = mcf.arc(ids[a]).flow + inst.arcs[a].lo;
    sol.plan[e] = static_cast<double>(flow) / static_cast<double>(inst.flow_scale);
    cost += static_cast<__int128>(flow) * inst.arcs[a].cost;
  }
  sol.objective = -static_cast<double>(cost) /
                  (static_cast<double>(inst.flow_scale) *
                   static_cast<double>(inst.cost_scale));
  return sol;
}

// Exhaustive search over plans whose entries lie on {0, step, 2 step, ...}
// plus each edge's capacity min(p_hi, q_hi). Any concave utilities.
inline CentralSolution solve_bruteforce_grid(const Network& net,
                                             const UtilityTable& utilities, double step) {
  if (!(step > 0.0)) throw ConfigError("grid step must be positive");
  if (net.n_edges() > 4) throw ConfigError("grid oracle is limited to 4 edges");
  for (const Bounds& b : net.target_bounds())
    if (b.hi > 5.0) throw ConfigError("grid oracle is limited to bounds <= 5");
  for (const Bounds& b : net.source_bounds())
    if (b.hi > 5.0) throw ConfigError("grid oracle is limited to bounds <= 5");

  const std::size_t n = net.n_edges();
  std::vector<std::vector<double>> axes(n);
  double points = 1.0;
  for (std::size_t e = 0; e < n; ++e) {
    const EdgeId& edge = net.edge(e);
    const double cap = std::min(net.target_bounds()[edge.target].hi,
                                net.source_bounds()[edge.source].hi);
    for (std::size_t i = 0;; ++i) {
      const double v = static_cast<double>(i) * step;
      if (v >= cap - 1e-12) break;
      axes[e].push_back(v);
    }
    axes[e].push_back(cap);
    points *= static_cast<double>(axes[e].size());
  }
  if (points > 2e8) throw ConfigError("grid is too fine for exhaustive search");

  const double tol = 1e-9;
  auto feasible = [&](const std::vector<double>& plan) {
    std::vector<double> in(net.n_targets(), 0.0), out(net.n_sources(), 0.0);
    for (std::size_t e = 0; e < n; ++e) {
      in[net.edge(e).target] += plan[e];
      out[net.edge(e).source] += plan[e];
    }
    for (std::size_t x = 0; x < in.size(); ++x) {
      const Bounds& b = net.target_bounds()[x];
      if (in[x] < b.lo - tol || in[x] > b.hi + tol) return false;
    }
    for (std::size_t y = 0; y < out.size(); ++y) {
      const Bounds& b = net.source_bounds()[y];
      if (out[y] < b.lo - tol || out[y] > b.hi + tol) return false;
    }
    return true;
  };

  CentralSolution best;
  bool found = false;
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> plan(n, 0.0);
  while (true) {
    for (std::size_t e = 0; e < n; ++e) plan[e] = axes[e][idx[e]];
    if (feasible(plan)) {
      const double value = social_utility(plan, utilities, net);
      if (!found || value > best.objective) {
        best.plan = plan;
        best.objective = value;
        found = true;
      }
    }
    std::size_t e = 0;
    while (e < n && ++idx[e] == axes[e].size()) idx[e++] = 0;
    if (e == n) break;
  }
  if (!found) throw InfeasibleError("no grid point satisfies the bounds");
  return best;
}

}  // namespace dpot

#endif  // DPOT_REFERENCE_SOLVER_HPP_
