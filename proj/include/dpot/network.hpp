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

#ifndef DPOT_NETWORK_HPP_
#define DPOT_NETWORK_HPP_

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpot/detail/max_flow.hpp"
#include "dpot/errors.hpp"

namespace dpot {

enum class NodeKind { kTarget, kSource };

struct NodeId {
  NodeKind kind = NodeKind::kTarget;
  std::size_t index = 0;

  static constexpr NodeId target(std::size_t i) { return {NodeKind::kTarget, i}; }
  static constexpr NodeId source(std::size_t i) { return {NodeKind::kSource, i}; }

  auto operator<=>(const NodeId&) const = default;
};

// "t3", "s0".
inline std::string to_string(const NodeId& id) {
  return (id.kind == NodeKind::kTarget ? "t" : "s") + std::to_string(id.index);
}

struct EdgeId {
  std::size_t target = 0;
  std::size_t source = 0;

  auto operator<=>(const EdgeId&) const = default;
};

// Closed interval [lo, hi] on the total amount a node sends or receives.
struct Bounds {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const Bounds&) const = default;
};

// Bipartite transport network. Immutable once built; the edge list order is
// the canonical order of every per-edge vector in the library.
class Network {
 public:
  std::size_t n_targets() const { return target_bounds_.size(); }
  std::size_t n_sources() const { return source_bounds_.size(); }
  std::size_t n_edges() const { return edges_.size(); }
  std::size_t n_nodes() const { return n_targets() + n_sources(); }

  const std::vector<EdgeId>& edges() const { return edges_; }
  const EdgeId& edge(std::size_t e) const { return edges_[e]; }

  const std::vector<Bounds>& target_bounds() const { return target_bounds_; }
  const std::vector<Bounds>& source_bounds() const { return source_bounds_; }

  const Bounds& bounds(NodeId node) const {
    return node.kind == NodeKind::kTarget ? target_bounds_[node.index]
                                          : source_bounds_[node.index];
  }

  // Positions (into edges()) of the edges incident to `node`, ascending.
  std::span<const std::size_t> incident(NodeId node) const {
    return node.kind == NodeKind::kTarget ? target_adj_[node.index]
                                          : source_adj_[node.index];
  }

  // All nodes, targets first.
  std::vector<NodeId> nodes() const {
    std::vector<NodeId> out;
    out.reserve(n_nodes());
    for (std::size_t i = 0; i < n_targets(); ++i) out.push_back(NodeId::target(i));
    for (std::size_t i = 0; i < n_sources(); ++i) out.push_back(NodeId::source(i));
    return out;
  }

  // Dense index over nodes(): targets [0, |X|), sources [|X|, |X|+|Y|).
  std::size_t flat_index(NodeId node) const {
    return node.kind == NodeKind::kTarget ? node.index : n_targets() + node.index;
  }

  bool is_complete() const { return n_edges() == n_targets() * n_sources(); }

 private:
  friend Network build_network(std::size_t, std::size_t, std::vector<EdgeId>,
                               std::vector<Bounds>, std::vector<Bounds>);

  std::vector<EdgeId> edges_;
  std::vector<Bounds> target_bounds_;
  std::vector<Bounds> source_bounds_;
  std::vector<std::vector<std::size_t>> target_adj_;
  std::vector<std::vector<std::size_t>> source_adj_;
};

// Edges of the complete bipartite graph, target-major:
// (t0,s0), (t0,s1), ..., (t1,s0), ...
inline std::vector<EdgeId> complete_edges(std::size_t n_targets,
                                          std::size_t n_sources) {
  std::vector<EdgeId> edges;
  edges.reserve(n_targets * n_sources);
  for (std::size_t t = 0; t < n_targets; ++t)
    for (std::size_t s = 0; s < n_sources; ++s) edges.push_back({t, s});
  return edges;
}

namespace detail {

inline void validate_bounds(std::span<const Bounds> bounds, const char* side) {
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const Bounds& b = bounds[i];
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi))
      throw ConfigError(std::string(side) + " " + std::to_string(i) +
                        ": non-finite bound");
    if (b.lo < 0.0)
      throw ConfigError(std::string(side) + " " + std::to_string(i) +
                        ": negative lower bound");
    if (b.lo > b.hi)
      throw ConfigError(std::string(side) + " " + std::to_string(i) +
                        ": inverted bounds");
  }
}

}  // namespace detail

inline Network build_network(std::size_t n_targets, std::size_t n_sources,
                             std::vector<EdgeId> edges,
                             std::vector<Bounds> target_bounds,
                             std::vector<Bounds> source_bounds) {
  if (n_targets == 0 || n_sources == 0)
    throw ConfigError("network needs at least one target and one source");
  if (target_bounds.size() != n_targets)
    throw ConfigError("expected " + std::to_string(n_targets) +
                      " target bounds, got " +
                      std::to_string(target_bounds.size()));
  if (source_bounds.size() != n_sources)
    throw ConfigError("expected " + std::to_string(n_sources) +
                      " source bounds, got " +
                      std::to_string(source_bounds.size()));
  detail::validate_bounds(target_bounds, "target");
  detail::validate_bounds(source_bounds, "source");

  Network net;
  net.target_adj_.resize(n_targets);
  net.source_adj_.resize(n_sources);
  std::set<EdgeId> seen;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const EdgeId& edge = edges[e];
    if (edge.target >= n_targets || edge.source >= n_sources)
      throw ConfigError("edge (t" + std::to_string(edge.target) + ",s" +
                        std::to_string(edge.source) + ") has a dangling endpoint");
    if (!seen.insert(edge).second)
      throw ConfigError("duplicate edge (t" + std::to_string(edge.target) +
                        ",s" + std::to_string(edge.source) + ")");
    net.target_adj_[edge.target].push_back(e);
    net.source_adj_[edge.source].push_back(e);
  }
  for (std::size_t t = 0; t < n_targets; ++t)
    if (net.target_adj_[t].empty())
      throw ConfigError("target " + std::to_string(t) + " has no incident edge");
  for (std::size_t s = 0; s < n_sources; ++s)
    if (net.source_adj_[s].empty())
      throw ConfigError("source " + std::to_string(s) + " has no incident edge");

  net.edges_ = std::move(edges);
  net.target_bounds_ = std::move(target_bounds);
  net.source_bounds_ = std::move(source_bounds);
  return net;
}

// Outcome of the lower-bounded circulation test. When infeasible, `witness`
// lists the nodes whose bound arcs cross the minimum cut: together their
// bounds certify that the required flow cannot be routed.
struct FeasibilityReport {
  bool feasible = true;
  double required = 0.0;
  double routed = 0.0;
  std::vector<NodeId> witness;

  explicit operator bool() const { return feasible; }
};

// Decides whether some pi >= 0 meets every interval bound. The network is
// modelled as the circulation S* -> y [q_lo, q_hi], y -> x [0, inf),
// x -> T* [p_lo, p_hi], T* -> S* [0, inf); lower bounds are moved into
// per-node demand arcs on a fresh super source/sink pair.
inline FeasibilityReport check_feasibility(const Network& net) {
  const std::size_t nt = net.n_targets();
  const std::size_t ns = net.n_sources();
  // Layout: targets, sources, S*, T*, SS, TT.
  const std::size_t s_star = nt + ns;
  const std::size_t t_star = s_star + 1;
  const std::size_t ss = s_star + 2;
  const std::size_t tt = s_star + 3;

  double scale = 1.0;
  for (const Bounds& b : net.target_bounds()) scale += b.hi;
  for (const Bounds& b : net.source_bounds()) scale += b.hi;
  const double inf = 2.0 * scale;

  detail::MaxFlow flow(nt + ns + 4, 1e-12 * scale);
  struct Tagged {
    std::size_t arc;
    NodeId node;
  };
  std::vector<Tagged> tagged;
  double required = 0.0;

  for (std::size_t y = 0; y < ns; ++y) {
    const Bounds& b = net.source_bounds()[y];
    const NodeId id = NodeId::source(y);
    tagged.push_back({flow.add_arc(s_star, nt + y, b.hi - b.lo), id});
    if (b.lo > 0.0) {
      tagged.push_back({flow.add_arc(ss, nt + y, b.lo), id});
      tagged.push_back({flow.add_arc(s_star, tt, b.lo), id});
      required += b.lo;
    }
  }
  for (std::size_t x = 0; x < nt; ++x) {
    const Bounds& b = net.target_bounds()[x];
    const NodeId id = NodeId::target(x);
    tagged.push_back({flow.add_arc(x, t_star, b.hi - b.lo), id});
    if (b.lo > 0.0) {
      tagged.push_back({flow.add_arc(ss, t_star, b.lo), id});
      tagged.push_back({flow.add_arc(x, tt, b.lo), id});
      required += b.lo;
    }
  }
  for (const EdgeId& e : net.edges()) flow.add_arc(nt + e.source, e.target, inf);
  flow.add_arc(t_star, s_star, inf);

  FeasibilityReport report;
  report.required = required;
  report.routed = required > 0.0 ? flow.solve(ss, tt) : 0.0;
  report.feasible =
      report.routed >= required - 1e-9 * std::max(1.0, required);
  if (report.feasible) return report;

  const std::vector<bool> side = flow.reachable_from(ss);
  std::set<NodeId> witness;
  for (const Tagged& t : tagged)
    if (side[flow.tail(t.arc)] && !side[flow.head(t.arc)]) witness.insert(t.node);
  report.witness.assign(witness.begin(), witness.end());
  return report;
}

}  // namespace dpot

#endif  // DPOT_NETWORK_HPP_
