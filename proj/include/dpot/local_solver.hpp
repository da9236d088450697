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

#ifndef DPOT_LOCAL_SOLVER_HPP_
#define DPOT_LOCAL_SOLVER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "dpot/errors.hpp"
#include "dpot/network.hpp"
#include "dpot/utility.hpp"

namespace dpot {

// One node's per-round subproblem over its incident edges:
//
//   target:  min  -sum t(z) + sum alpha*z + (eta/2) sum (z - pi)^2
//   source:  min  -sum s(z) - sum alpha*z + (eta/2) sum (pi - z)^2
//
// subject to z >= 0 and lo <= sum z <= hi.
struct LocalProblem {
  NodeKind side = NodeKind::kTarget;
  std::vector<UtilitySpec> utilities;
  std::vector<double> duals;
  std::vector<double> consensus;
  double eta = 1.0;
  Bounds sum_bounds;

  std::size_t size() const { return utilities.size(); }

  // Coefficient c in the "-c*z" dual term: -alpha for targets, +alpha for
  // sources.
  double dual_shift(std::size_t i) const {
    return side == NodeKind::kTarget ? -duals[i] : duals[i];
  }
};

struct LocalSolution {
  std::vector<double> plan;
  // Multiplier of the sum constraint in objective units: positive when the
  // upper bound binds, negative when the lower bound binds, zero otherwise.
  double multiplier = 0.0;
  double objective = 0.0;
};

inline double local_objective(const LocalProblem& p, std::span<const double> z) {
  double f = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = z[i] - p.consensus[i];
    f += -p.utilities[i].value(z[i]) - p.dual_shift(i) * z[i] +
         0.5 * p.eta * d * d;
  }
  return f;
}

// max(v - shift, 0) is the projection; `shift` is its scalar multiplier.
struct BoxSumProjection {
  std::vector<double> point;
  double shift = 0.0;
};

namespace detail {

inline double clipped_sum(std::span<const double> v, double shift) {
  double s = 0.0;
  for (double x : v) s += std::max(x - shift, 0.0);
  return s;
}

inline double sum_tolerance(double hi) { return 1e-12 * std::max(1.0, hi); }

}  // namespace detail

// Euclidean projection of v onto {z >= 0, lo <= sum z <= hi}. The shift is
// found exactly from the sorted breakpoints.
inline BoxSumProjection project_box_sum_shifted(std::span<const double> v,
                                                double lo, double hi) {
  if (!(lo <= hi)) throw ConfigError("projection bounds are inverted");
  for (double x : v)
    if (!std::isfinite(x)) throw ConfigError("projection input is not finite");

  BoxSumProjection out;
  out.point.resize(v.size());
  const double s0 = detail::clipped_sum(v, 0.0);
  const double tol = detail::sum_tolerance(hi);
  if (s0 >= lo - tol && s0 <= hi + tol) {
    for (std::size_t i = 0; i < v.size(); ++i) out.point[i] = std::max(v[i], 0.0);
    return out;
  }
  if (v.empty()) throw ConfigError("empty projection with positive lower bound");

  const double target = s0 > hi ? hi : lo;
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  if (target <= 0.0) {
    out.shift = sorted.front();
  } else {
    // Largest k with sorted[k-1] > (prefix_k - target) / k.
    double prefix = 0.0;
    double shift = 0.0;
    for (std::size_t k = 1; k <= sorted.size(); ++k) {
      prefix += sorted[k - 1];
      const double candidate = (prefix - target) / static_cast<double>(k);
      if (sorted[k - 1] > candidate) shift = candidate;
    }
    out.shift = shift;
  }
  for (std::size_t i = 0; i < v.size(); ++i)
    out.point[i] = std::max(v[i] - out.shift, 0.0);
  return out;
}

inline std::vector<double> project_box_sum(std::span<const double> v, double lo,
                                           double hi) {
  return project_box_sum_shifted(v, lo, hi).point;
}

namespace detail {

inline void validate_local_problem(const LocalProblem& p, NodeKind expected) {
  if (p.side != expected) throw ConfigError("local problem has the wrong side");
  if (!(p.eta > 0.0) || !std::isfinite(p.eta))
    throw ConfigError("penalty eta must be positive");
  if (p.duals.size() != p.size() || p.consensus.size() != p.size())
    throw ConfigError("local problem vectors differ in length");
  if (!(p.sum_bounds.lo <= p.sum_bounds.hi))
    throw ConfigError("local problem has infeasible sum bounds");
  if (p.sum_bounds.lo < 0.0) throw ConfigError("negative lower sum bound");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!std::isfinite(p.duals[i]) || !std::isfinite(p.consensus[i]) ||
        !std::isfinite(p.utilities[i].a) || !std::isfinite(p.utilities[i].b))
      throw ConfigError("local problem input is not finite");
}

// Linear utilities: the subproblem is a projection of
// v = pi + (a + c) / eta, solved exactly.
inline LocalSolution solve_linear(const LocalProblem& p) {
  std::vector<double> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    v[i] = p.consensus[i] + (p.utilities[i].a + p.dual_shift(i)) / p.eta;
  BoxSumProjection proj = project_box_sum_shifted(v, p.sum_bounds.lo, p.sum_bounds.hi);
  LocalSolution sol;
  sol.plan = std::move(proj.point);
  sol.multiplier = p.eta * proj.shift;
  sol.objective = local_objective(p, sol.plan);
  return sol;
}

// General concave quadratics: coordinate response
// z(lambda) = max((a + c + eta*pi - lambda) / (b + eta), 0), with lambda
// bisected until the sum lands on the violated bound.
inline LocalSolution solve_quadratic(const LocalProblem& p) {
  const std::size_t n = p.size();
  std::vector<double> w(n), d(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = p.utilities[i].a + p.dual_shift(i) + p.eta * p.consensus[i];
    d[i] = p.utilities[i].b + p.eta;
  }
  auto respond = [&](double lambda, std::vector<double>& z) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = std::max((w[i] - lambda) / d[i], 0.0);
      s += z[i];
    }
    return s;
  };

  const double lo = p.sum_bounds.lo;
  const double hi = p.sum_bounds.hi;
  LocalSolution sol;
  sol.plan.resize(n);
  const double s0 = respond(0.0, sol.plan);
  const double tol = sum_tolerance(hi);
  if (!(s0 >= lo - tol && s0 <= hi + tol)) {
    if (n == 0) throw ConfigError("empty local problem with positive lower bound");
    const double target = s0 > hi ? hi : lo;
    const double w_max = *std::max_element(w.begin(), w.end());
    const double w_min = *std::min_element(w.begin(), w.end());
    const double d_max = *std::max_element(d.begin(), d.end());
    // sum(z) is nonincreasing in lambda; bracket it on the correct side of 0.
    double left = s0 > hi ? 0.0 : std::min(w_min, 0.0) - lo * d_max - 1.0;
    double right = s0 > hi ? std::max(w_max, 0.0) : 0.0;
    const double stop = 1e-10 * std::max(1.0, hi);
    double lambda = 0.5 * (left + right);
    for (int iter = 0; iter < 400; ++iter) {
      lambda = 0.5 * (left + right);
      const double s = respond(lambda, sol.plan);
      if (std::abs(s - target) <= stop) break;
      if (s > target)
        left = lambda;
      else
        right = lambda;
    }
    // Closed-form lambda on the bisection's active set; kept if it lands
    // closer to the bound.
    double sw = 0.0, sinv = 0.0;
    const double s_bis = respond(lambda, sol.plan);
    for (std::size_t i = 0; i < n; ++i)
      if (sol.plan[i] > 0.0) {
        sw += w[i] / d[i];
        sinv += 1.0 / d[i];
      }
    if (sinv > 0.0) {
      const double exact = (sw - target) / sinv;
      std::vector<double> z(n);
      if (std::abs(respond(exact, z) - target) < std::abs(s_bis - target)) lambda = exact;
    }
    respond(lambda, sol.plan);
    sol.multiplier = lambda;
  }
  sol.objective = local_objective(p, sol.plan);
  return sol;
}

inline LocalSolution solve_local(const LocalProblem& p) {
  bool linear = true;
  for (const UtilitySpec& u : p.utilities) linear = linear && u.is_linear();
  return linear ? solve_linear(p) : solve_quadratic(p);
}

}  // namespace detail

inline LocalSolution solve_target_subproblem(const LocalProblem& p) {
  detail::validate_local_problem(p, NodeKind::kTarget);
  return detail::solve_local(p);
}

inline LocalSolution solve_source_subproblem(const LocalProblem& p) {
  detail::validate_local_problem(p, NodeKind::kSource);
  return detail::solve_local(p);
}

inline LocalSolution solve_subproblem(const LocalProblem& p) {
  return p.side == NodeKind::kTarget ? solve_target_subproblem(p)
                                     : solve_source_subproblem(p);
}

}  // namespace dpot

#endif  // DPOT_LOCAL_SOLVER_HPP_
