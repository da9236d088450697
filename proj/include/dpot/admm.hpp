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

#ifndef DPOT_ADMM_HPP_
#define DPOT_ADMM_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpot/errors.hpp"
#include "dpot/local_solver.hpp"
#include "dpot/network.hpp"
#include "dpot/utility.hpp"

namespace dpot {

// Iterate of the distributed scheme. `alpha` is the single per-edge dual of
// the simplified iteration; `alpha_t`/`alpha_s` are only advanced by the
// two-dual verification stepper.
struct TransportState {
  std::vector<double> pi_t;
  std::vector<double> pi_s;
  std::vector<double> pi;
  std::vector<double> alpha;
  std::vector<double> alpha_t;
  std::vector<double> alpha_s;
  std::size_t iteration = 0;

  static TransportState zeros(std::size_t n_edges) {
    TransportState s;
    s.pi_t.assign(n_edges, 0.0);
    s.pi_s.assign(n_edges, 0.0);
    s.pi.assign(n_edges, 0.0);
    s.alpha.assign(n_edges, 0.0);
    s.alpha_t.assign(n_edges, 0.0);
    s.alpha_s.assign(n_edges, 0.0);
    return s;
  }

  bool operator==(const TransportState&) const = default;
};

struct SolveOptions {
  double eta = 1.0;
  std::size_t max_iters = 5000;
  double primal_tol = 1e-6;
  double dual_tol = 1e-6;
  bool record_trace = true;
  bool record_states = false;

  void validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
    if (!(primal_tol >= 0.0) || !(dual_tol >= 0.0))
      throw ConfigError("tolerances must be nonnegative");
  }
};

struct IterationRecord {
  std::size_t iteration = 0;
  double social_utility = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;

  bool operator==(const IterationRecord&) const = default;
};

struct RunTrace {
  std::vector<IterationRecord> records;
  std::vector<TransportState> states;  // filled only with record_states

  bool operator==(const RunTrace&) const = default;
};

enum class RunStatus { kConverged, kMaxIterations };

inline std::string to_string(RunStatus s) {
  return s == RunStatus::kConverged ? "converged" : "max_iters";
}

struct RunResult {
  std::vector<double> plan;
  RunTrace trace;
  RunStatus status = RunStatus::kMaxIterations;
  std::size_t iterations = 0;
  TransportState final_state;
};

// Sum over edges of target plus source utility.
inline double social_utility(std::span<const double> plan, const UtilityTable& utilities,
                             const Network& net) {
  if (plan.size() != net.n_edges() || utilities.size() != net.n_edges())
    throw ConfigError("plan length does not match network");
  double total = 0.0;
  for (std::size_t e = 0; e < plan.size(); ++e)
    total += utilities[e].target.value(plan[e]) + utilities[e].source.value(plan[e]);
  return total;
}

// Gathers `node`'s subproblem from edge-indexed consensus and dual vectors.
inline LocalProblem make_local_problem(const Network& net, const UtilityTable& utilities,
                                       NodeId node, std::span<const double> consensus,
                                       std::span<const double> duals, double eta) {
  LocalProblem p;
  p.side = node.kind;
  p.eta = eta;
  p.sum_bounds = net.bounds(node);
  const auto incident = net.incident(node);
  p.utilities.reserve(incident.size());
  p.duals.reserve(incident.size());
  p.consensus.reserve(incident.size());
  for (std::size_t e : incident) {
    p.utilities.push_back(utilities.side(e, node.kind));
    p.duals.push_back(duals[e]);
    p.consensus.push_back(consensus[e]);
  }
  return p;
}

// Per-edge update shared by every driver: average the two (possibly perturbed)
// proposals and move the dual by half the disagreement.
inline void consensus_update(double proposal_t, double proposal_s, double eta,
                             double& pi, double& alpha) {
  pi = 0.5 * (proposal_t + proposal_s);
  alpha += 0.5 * eta * (proposal_t - proposal_s);
}

namespace detail {

inline void check_state(const TransportState& s, const Network& net) {
  const std::size_t n = net.n_edges();
  if (s.pi_t.size() != n || s.pi_s.size() != n || s.pi.size() != n ||
      s.alpha.size() != n)
    throw ConfigError("transport state does not match network");
}

// Solves every node's subproblem against iteration-k values (Jacobi) and
// writes the proposals in canonical edge order. `perturb(node, plan)` may
// rewrite a node's proposal before it is shared.
template <class Perturb>
void propose_all(const Network& net, const UtilityTable& utilities,
                 std::span<const double> consensus, std::span<const double> duals_t,
                 std::span<const double> duals_s, double eta, std::vector<double>& pi_t,
                 std::vector<double>& pi_s, Perturb&& perturb) {
  for (std::size_t x = 0; x < net.n_targets(); ++x) {
    const NodeId node = NodeId::target(x);
    LocalSolution sol = solve_target_subproblem(
        make_local_problem(net, utilities, node, consensus, duals_t, eta));
    perturb(node, sol.plan);
    const auto incident = net.incident(node);
    for (std::size_t i = 0; i < incident.size(); ++i) pi_t[incident[i]] = sol.plan[i];
  }
  for (std::size_t y = 0; y < net.n_sources(); ++y) {
    const NodeId node = NodeId::source(y);
    LocalSolution sol = solve_source_subproblem(
        make_local_problem(net, utilities, node, consensus, duals_s, eta));
    perturb(node, sol.plan);
    const auto incident = net.incident(node);
    for (std::size_t i = 0; i < incident.size(); ++i) pi_s[incident[i]] = sol.plan[i];
  }
}

struct NoPerturbation {
  void operator()(NodeId, std::vector<double>&) const {}
};

template <class Perturb>
TransportState advance_short(const TransportState& state, const Network& net,
                             const UtilityTable& utilities, double eta,
                             Perturb&& perturb) {
  check_state(state, net);
  TransportState next = state;
  propose_all(net, utilities, state.pi, state.alpha, state.alpha, eta, next.pi_t,
              next.pi_s, perturb);
  for (std::size_t e = 0; e < net.n_edges(); ++e)
    consensus_update(next.pi_t[e], next.pi_s[e], eta, next.pi[e], next.alpha[e]);
  next.iteration = state.iteration + 1;
  return next;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace detail

// One round of the simplified iteration: target and source subproblems,
// consensus average, single-dual update.
inline TransportState step_short(const TransportState& state, const Network& net,
                                 const UtilityTable& utilities, const SolveOptions& opts) {
  return detail::advance_short(state, net, utilities, opts.eta,
                               detail::NoPerturbation{});
}

// One round of the two-dual iteration: subproblems against alpha_t/alpha_s,
// closed-form consensus minimization
//   pi = (pi_t + pi_s)/2 + (alpha_t - alpha_s)/(2 eta),
// then linear-residual dual steps on both multipliers.
inline TransportState step_long(const TransportState& state, const Network& net,
                                const UtilityTable& utilities, const SolveOptions& opts) {
  detail::check_state(state, net);
  if (state.alpha_t.size() != net.n_edges() || state.alpha_s.size() != net.n_edges())
    throw ConfigError("two-dual state does not match network");
  const double eta = opts.eta;
  TransportState next = state;
  detail::propose_all(net, utilities, state.pi, state.alpha_t, state.alpha_s, eta,
                      next.pi_t, next.pi_s, detail::NoPerturbation{});
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    next.pi[e] = 0.5 * (next.pi_t[e] + next.pi_s[e]) +
                 (state.alpha_t[e] - state.alpha_s[e]) / (2.0 * eta);
    next.alpha_t[e] = state.alpha_t[e] + eta * (next.pi_t[e] - next.pi[e]);
    next.alpha_s[e] = state.alpha_s[e] + eta * (next.pi[e] - next.pi_s[e]);
  }
  next.iteration = state.iteration + 1;
  return next;
}

// Augmented Lagrangian of the consensus problem evaluated at a two-dual state.
inline double eval_lagrangian(const TransportState& s, const Network& net,
                              const UtilityTable& utilities, double eta) {
  detail::check_state(s, net);
  double l = 0.0;
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    const double rt = s.pi_t[e] - s.pi[e];
    const double rs = s.pi[e] - s.pi_s[e];
    l += -utilities[e].target.value(s.pi_t[e]) - utilities[e].source.value(s.pi_s[e]) +
         s.alpha_t[e] * rt + s.alpha_s[e] * rs + 0.5 * eta * rt * rt +
         0.5 * eta * rs * rs;
  }
  return l;
}

// Iterates step_short until ||pi_t - pi_s||_inf <= primal_tol and
// ||pi(k+1) - pi(k)||_inf <= dual_tol, or max_iters rounds.
inline RunResult run(const Network& net, const UtilityTable& utilities,
                     const SolveOptions& opts,
                     std::optional<TransportState> initial = std::nullopt) {
  opts.validate();
  if (utilities.size() != net.n_edges())
    throw ConfigError("utility table does not match network");
  const FeasibilityReport feasible = check_feasibility(net);
  if (!feasible)
    throw InfeasibleError("network bounds admit no feasible transport plan");

  TransportState state = initial ? *initial : TransportState::zeros(net.n_edges());
  RunResult result;
  result.status = RunStatus::kMaxIterations;
  for (std::size_t k = 0; k < opts.max_iters; ++k) {
    TransportState next = step_short(state, net, utilities, opts);
    const double primal = detail::max_abs_diff(next.pi_t, next.pi_s);
    const double dual = detail::max_abs_diff(next.pi, state.pi);
    if (opts.record_trace)
      result.trace.records.push_back(
          {next.iteration, social_utility(next.pi, utilities, net), primal, dual});
    if (opts.record_states) result.trace.states.push_back(next);
    state = std::move(next);
    ++result.iterations;
    if (primal <= opts.primal_tol && dual <= opts.dual_tol) {
      result.status = RunStatus::kConverged;
      break;
    }
  }
  result.plan = state.pi;
  result.final_state = std::move(state);
  return result;
}

}  // namespace dpot

#endif  // DPOT_ADMM_HPP_
