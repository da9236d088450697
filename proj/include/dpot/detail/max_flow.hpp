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

#ifndef DPOT_DETAIL_MAX_FLOW_HPP_
#define DPOT_DETAIL_MAX_FLOW_HPP_

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace dpot::detail {

// Dinic's algorithm on real capacities. Residual capacities at or below
// `epsilon` are treated as saturated.
class MaxFlow {
 public:
  struct Arc {
    std::size_t to;
    double cap;
    double flow;
  };

  explicit MaxFlow(std::size_t n, double epsilon = 1e-12)
      : adj_(n), level_(n), next_(n), epsilon_(epsilon) {}

  std::size_t add_arc(std::size_t from, std::size_t to, double cap) {
    const std::size_t id = arcs_.size();
    arcs_.push_back({to, cap, 0.0});
    arcs_.push_back({from, 0.0, 0.0});
    adj_[from].push_back(id);
    adj_[to].push_back(id + 1);
    return id;
  }

  double solve(std::size_t s, std::size_t t) {
    double total = 0.0;
    while (build_levels(s, t)) {
      std::fill(next_.begin(), next_.end(), 0);
      while (true) {
        const double pushed =
            augment(s, t, std::numeric_limits<double>::infinity());
        if (pushed <= epsilon_) break;
        total += pushed;
      }
    }
    return total;
  }

  // Nodes reachable from `s` through arcs with positive residual capacity.
  std::vector<bool> reachable_from(std::size_t s) const {
    std::vector<bool> seen(adj_.size(), false);
    std::vector<std::size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t id : adj_[v]) {
        const Arc& a = arcs_[id];
        if (!seen[a.to] && residual(id) > epsilon_) {
          seen[a.to] = true;
          stack.push_back(a.to);
        }
      }
    }
    return seen;
  }

  double flow(std::size_t arc) const { return arcs_[arc].flow; }
  std::size_t tail(std::size_t arc) const { return arcs_[arc ^ 1].to; }
  std::size_t head(std::size_t arc) const { return arcs_[arc].to; }

 private:
  double residual(std::size_t id) const {
    return arcs_[id].cap - arcs_[id].flow;
  }

  bool build_levels(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      for (std::size_t id : adj_[v]) {
        const Arc& a = arcs_[id];
        if (level_[a.to] < 0 && residual(id) > epsilon_) {
          level_[a.to] = level_[v] + 1;
          q.push(a.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double augment(std::size_t v, std::size_t t, double limit) {
    if (v == t) return limit;
    for (std::size_t& i = next_[v]; i < adj_[v].size(); ++i) {
      const std::size_t id = adj_[v][i];
      const Arc& a = arcs_[id];
      if (level_[a.to] != level_[v] + 1 || residual(id) <= epsilon_) continue;
      const double pushed = augment(a.to, t, std::min(limit, residual(id)));
      if (pushed > epsilon_) {
        arcs_[id].flow += pushed;
        arcs_[id ^ 1].flow -= pushed;
        return pushed;
      }
    }
    return 0.0;
  }

  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
  double epsilon_;
};

}  // namespace dpot::detail

#endif  // DPOT_DETAIL_MAX_FLOW_HPP_
