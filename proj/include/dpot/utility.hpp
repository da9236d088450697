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

#ifndef DPOT_UTILITY_HPP_
#define DPOT_UTILITY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpot/errors.hpp"
#include "dpot/network.hpp"

namespace dpot {

enum class UtilityForm { kLinear, kQuadratic };

// Concave per-edge utility u(pi) = a*pi - (b/2)*pi^2. The linear family is
// the b = 0 case and is tagged separately so the local solver can take its
// exact path.
struct UtilitySpec {
  UtilityForm form = UtilityForm::kLinear;
  double a = 0.0;
  double b = 0.0;

  static UtilitySpec linear(double slope) {
    return {UtilityForm::kLinear, slope, 0.0};
  }
  static UtilitySpec quadratic(double a, double b) {
    return {UtilityForm::kQuadratic, a, b};
  }

  bool is_linear() const { return form == UtilityForm::kLinear; }

  // Unchecked evaluation; also used for perturbed plans whose entries may be
  // negative.
  double value(double pi) const { return a * pi - 0.5 * b * pi * pi; }
  double derivative(double pi) const { return a - b * pi; }

  bool operator==(const UtilitySpec&) const = default;
};

inline double eval(const UtilitySpec& u, double pi) {
  if (!(pi >= 0.0)) throw std::domain_error("utility evaluated at negative amount");
  return u.value(pi);
}

inline double grad(const UtilitySpec& u, double pi) {
  if (!(pi >= 0.0)) throw std::domain_error("utility gradient at negative amount");
  return u.derivative(pi);
}

// Throws unless `u` is concave and nondecreasing on [0, pi_max].
inline void validate_utility(const UtilitySpec& u, double pi_max) {
  if (!std::isfinite(u.a) || !std::isfinite(u.b))
    throw ConfigError("utility coefficients must be finite");
  if (u.is_linear()) {
    if (u.b != 0.0) throw ConfigError("linear utility carries curvature");
    if (u.a < 0.0) throw ConfigError("linear utility slope must be >= 0");
    return;
  }
  if (u.a < 0.0 || u.b < 0.0)
    throw ConfigError("quadratic utility needs a >= 0 and b >= 0");
  if (u.a - u.b * pi_max < 0.0)
    throw ConfigError("quadratic utility decreases before the node's upper bound");
}

struct EdgeUtility {
  UtilitySpec target;
  UtilitySpec source;

  bool operator==(const EdgeUtility&) const = default;
};

// One (target, source) utility pair per edge, canonical edge order.
class UtilityTable {
 public:
  UtilityTable() = default;

  std::size_t size() const { return entries_.size(); }
  const EdgeUtility& operator[](std::size_t e) const { return entries_[e]; }
  const std::vector<EdgeUtility>& entries() const { return entries_; }

  const UtilitySpec& side(std::size_t e, NodeKind kind) const {
    return kind == NodeKind::kTarget ? entries_[e].target : entries_[e].source;
  }

  bool all_linear() const {
    for (const EdgeUtility& u : entries_)
      if (!u.target.is_linear() || !u.source.is_linear()) return false;
    return true;
  }

  bool operator==(const UtilityTable&) const = default;

 private:
  friend UtilityTable make_utility_table(const Network&, std::vector<EdgeUtility>);
  std::vector<EdgeUtility> entries_;
};

inline UtilityTable make_utility_table(const Network& net,
                                       std::vector<EdgeUtility> entries) {
  if (entries.size() != net.n_edges())
    throw ConfigError("utility table has " + std::to_string(entries.size()) +
                      " entries for " + std::to_string(net.n_edges()) + " edges");
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const EdgeId& edge = net.edge(e);
    validate_utility(entries[e].target, net.target_bounds()[edge.target].hi);
    validate_utility(entries[e].source, net.source_bounds()[edge.source].hi);
  }
  UtilityTable table;
  table.entries_ = std::move(entries);
  return table;
}

inline UtilityTable linear_utility_table(const Network& net,
                                         const std::vector<double>& target_slopes,
                                         const std::vector<double>& source_slopes) {
  if (target_slopes.size() != net.n_edges() || source_slopes.size() != net.n_edges())
    throw ConfigError("slope vectors must have one entry per edge");
  std::vector<EdgeUtility> entries;
  entries.reserve(net.n_edges());
  for (std::size_t e = 0; e < net.n_edges(); ++e)
    entries.push_back({UtilitySpec::linear(target_slopes[e]),
                       UtilitySpec::linear(source_slopes[e])});
  return make_utility_table(net, std::move(entries));
}

// Upper bound on every utility derivative over the feasible set.
struct GradBound {
  double rho;

  explicit GradBound(double value) : rho(value) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw ConfigError("gradient bound rho must be positive and finite");
  }
};

struct SlopeViolation {
  std::size_t edge;
  NodeKind side;
  double max_derivative;
};

// Every (edge, side) whose derivative somewhere on pi >= 0 exceeds rho. The
// largest derivative of a*pi - (b/2)pi^2 over pi >= 0 is a for both families.
inline std::vector<SlopeViolation> check_slope_bound(const UtilityTable& table,
                                                     GradBound rho,
                                                     const Network& net) {
  if (table.size() != net.n_edges())
    throw ConfigError("utility table does not match network");
  std::vector<SlopeViolation> out;
  for (std::size_t e = 0; e < table.size(); ++e) {
    if (table[e].target.a > rho.rho)
      out.push_back({e, NodeKind::kTarget, table[e].target.a});
    if (table[e].source.a > rho.rho)
      out.push_back({e, NodeKind::kSource, table[e].source.a});
  }
  return out;
}

inline double max_slope(const UtilityTable& table) {
  double m = 0.0;
  for (const EdgeUtility& u : table.entries())
    m = std::max({m, u.target.a, u.source.a});
  return m;
}

}  // namespace dpot

#endif  // DPOT_UTILITY_HPP_
