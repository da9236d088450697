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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dpot/admm.hpp"
#include "dpot/reference_solver.hpp"
#include "dpot/scenario.hpp"
#include "oracles.hpp"

namespace dpot {
namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST(ConsensusUpdate, AgreementLeavesDualUnchanged) {
  double pi = 9, alpha = 0.75;
  consensus_update(2.5, 2.5, 3.0, pi, alpha);
  EXPECT_EQ(pi, 2.5);
  EXPECT_EQ(alpha, 0.75);
}

TEST(StepShort, OneByOneConvergesToOne) {
  const Network net = build_network(1, 1, {{0, 0}}, {{0, 1}}, {{0, 1}});
  const UtilityTable u = linear_utility_table(net, {1}, {1});
  TransportState s = TransportState::zeros(1);
  for (int k = 0; k < 200; ++k) s = step_short(s, net, u, {});
  EXPECT_NEAR(s.pi[0], 1.0, 1e-9);
  EXPECT_NEAR(s.pi[0], solve_centralized_linear(net, u).plan[0], 1e-9);
}

// Straight-line version of one simplified round on an arbitrary network.
TransportState reference_step(const TransportState& s, const Network& net,
                              const std::vector<double>& delta, const std::vector<double>& gamma,
                              double eta) {
  TransportState n = s;
  for (std::size_t x = 0; x < net.n_targets(); ++x) {
    std::vector<std::size_t> es;
    std::vector<double> v;
    for (std::size_t e = 0; e < net.n_edges(); ++e)
      if (net.edge(e).target == x) {
        es.push_back(e);
        v.push_back(s.pi[e] + (delta[e] - s.alpha[e]) / eta);
      }
    const auto z = testing::bisection_project(v, net.target_bounds()[x].lo, net.target_bounds()[x].hi);
    for (std::size_t i = 0; i < es.size(); ++i) n.pi_t[es[i]] = z[i];
  }
  for (std::size_t y = 0; y < net.n_sources(); ++y) {
    std::vector<std::size_t> es;
    std::vector<double> v;
    for (std::size_t e = 0; e < net.n_edges(); ++e)
      if (net.edge(e).source == y) {
        es.push_back(e);
        v.push_back(s.pi[e] + (gamma[e] + s.alpha[e]) / eta);
      }
    const auto z = testing::bisection_project(v, net.source_bounds()[y].lo, net.source_bounds()[y].hi);
    for (std::size_t i = 0; i < es.size(); ++i) n.pi_s[es[i]] = z[i];
  }
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    n.pi[e] = 0.5 * (n.pi_t[e] + n.pi_s[e]);
    n.alpha[e] = s.alpha[e] + 0.5 * eta * (n.pi_t[e] - n.pi_s[e]);
  }
  return n;
}

TEST(StepShort, MatchesStraightLineImplementation) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 3);
  const Network net = build_network(2, 2, complete_edges(2, 2), {{0.5, 3}, {0, 2}}, {{0, 2.5}, {1, 4}});
  const std::vector<double> delta{1, 4, 2.5, 3}, gamma{2, 0.5, 5, 1};
  const UtilityTable ut = linear_utility_table(net, delta, gamma);
  for (int t = 0; t < 20; ++t) {
    TransportState s = TransportState::zeros(4);
    for (std::size_t e = 0; e < 4; ++e) {
      s.pi[e] = u(rng);
      s.alpha[e] = u(rng) - 1.5;
    }
    const double eta = 0.5 + u(rng);
    SolveOptions o;
    o.eta = eta;
    const TransportState a = step_short(s, net, ut, o);
    const TransportState b = reference_step(s, net, delta, gamma, eta);
    EXPECT_LE(max_diff(a.pi_t, b.pi_t), 1e-12);
    EXPECT_LE(max_diff(a.pi_s, b.pi_s), 1e-12);
    EXPECT_LE(max_diff(a.pi, b.pi), 1e-12);
    EXPECT_LE(max_diff(a.alpha, b.alpha), 1e-12);
    EXPECT_EQ(a.iteration, 1u);
  }
}

TEST(StepLong, EqualDualsGiveAverage) {
  const Network net = build_network(2, 2, complete_edges(2, 2), {{0, 3}, {0, 2}}, {{0, 2.5}, {0, 4}});
  const UtilityTable ut = linear_utility_table(net, {1, 4, 2.5, 3}, {2, 0.5, 5, 1});
  TransportState s = TransportState::zeros(4);
  s.alpha = s.alpha_t = s.alpha_s = {0.3, -0.2, 1.0, 0.0};
  const TransportState l = step_long(s, net, ut, {});
  for (std::size_t e = 0; e < 4; ++e) EXPECT_EQ(l.pi[e], 0.5 * (l.pi_t[e] + l.pi_s[e]));
  const TransportState sh = step_short(s, net, ut, {});
  EXPECT_EQ(l.pi, sh.pi);
}

TEST(StepLong, HundredIterationsMatchShortForm) {
  std::mt19937_64 rng(22);
  for (int inst = 0; inst < 10; ++inst) {
    const Network net = testing::random_network(rng, 2 + rng() % 4, 2 + rng() % 3, 0.6, 6, 10, false, 0.3);
    if (!check_feasibility(net)) continue;
    const UtilityTable ut = testing::random_linear(rng, net, 0, 5);
    TransportState a = TransportState::zeros(net.n_edges()), b = a;
    for (int k = 0; k < 100; ++k) {
      a = step_short(a, net, ut, {});
      b = step_long(b, net, ut, {});
      ASSERT_LE(max_diff(a.pi, b.pi), 1e-9);
      ASSERT_LE(max_diff(a.pi_t, b.pi_t), 1e-9);
      ASSERT_LE(max_diff(a.pi_s, b.pi_s), 1e-9);
    }
  }
}

TEST(StepLong, ZeroUtilityFixedPoint) {
  const Network net = build_network(2, 1, complete_edges(2, 1), {{0, 3}, {0, 2}}, {{0, 4}});
  const UtilityTable ut = linear_utility_table(net, {0, 0}, {0, 0});
  const TransportState z = TransportState::zeros(2);
  EXPECT_EQ(step_long(z, net, ut, {}).pi, z.pi);
  EXPECT_EQ(step_short(z, net, ut, {}).alpha, z.alpha);
}

TEST(Run, PaperScaleConvergesToOracle) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Scenario sc = generate_paper_scenario(seed);
    const RunResult r = run(sc.network, sc.utilities, sc.solve);
    ASSERT_EQ(r.status, RunStatus::kConverged);
    EXPECT_LT(r.iterations, 2000u);
    EXPECT_LE(r.trace.records.back().primal_residual, sc.solve.primal_tol);
    EXPECT_LE(r.trace.records.back().dual_residual, sc.solve.dual_tol);
    EXPECT_EQ(r.trace.records.size(), r.iterations);
    const double oracle = solve_centralized_linear(sc.network, sc.utilities).objective;
    const double got = social_utility(r.plan, sc.utilities, sc.network);
    EXPECT_NEAR(got, oracle, 1e-4 * oracle);
    EXPECT_GE(got, oracle - 1e-4 * oracle);
  }
}

TEST(Run, LimitIsFeasible) {
  std::mt19937_64 rng(23);
  int checked = 0;
  for (int inst = 0; inst < 40; ++inst) {
    const Network net = testing::random_network(rng, 2 + rng() % 5, 2 + rng() % 3, 0.7, 5, 12, true, 0.5);
    if (!check_feasibility(net)) continue;
    const UtilityTable ut = testing::random_linear(rng, net, 0, 5);
    SolveOptions o;
    o.max_iters = 20000;
    o.primal_tol = o.dual_tol = 1e-9;
    const RunResult r = run(net, ut, o);
    if (r.status != RunStatus::kConverged) continue;
    ++checked;
    std::vector<double> in(net.n_targets()), out(net.n_sources());
    for (std::size_t e = 0; e < net.n_edges(); ++e) {
      EXPECT_GE(r.plan[e], -1e-6);
      in[net.edge(e).target] += r.plan[e];
      out[net.edge(e).source] += r.plan[e];
    }
    for (std::size_t x = 0; x < in.size(); ++x) {
      EXPECT_GE(in[x], net.target_bounds()[x].lo - 1e-6);
      EXPECT_LE(in[x], net.target_bounds()[x].hi + 1e-6);
    }
    for (std::size_t y = 0; y < out.size(); ++y) {
      EXPECT_GE(out[y], net.source_bounds()[y].lo - 1e-6);
      EXPECT_LE(out[y], net.source_bounds()[y].hi + 1e-6);
    }
  }
  EXPECT_GT(checked, 10);
}

TEST(Run, Deterministic) {
  const Scenario sc = generate_paper_scenario(3);
  SolveOptions o = sc.solve;
  o.record_states = true;
  const RunResult a = run(sc.network, sc.utilities, o), b = run(sc.network, sc.utilities, o);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.plan, b.plan);
}

TEST(Run, ResidualTrendsDown) {
  std::mt19937_64 rng(24);
  int pairs = 0, decreasing = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const Network net = testing::random_network(rng, 3 + rng() % 4, 2 + rng() % 3, 0.7, 5, 10, true);
    const UtilityTable ut = testing::random_linear(rng, net, 1, 5);
    SolveOptions o;
    o.max_iters = 100;
    o.primal_tol = o.dual_tol = 0;
    const RunResult r = run(net, ut, o);
    auto res = [&](std::size_t k) {
      return k <= r.trace.records.size() ? r.trace.records[k - 1].primal_residual : 0.0;
    };
    for (std::size_t k : {1, 2, 5, 10}) {
      ++pairs;
      decreasing += res(10 * k) <= res(k);
    }
  }
  EXPECT_GE(decreasing, pairs * 9 / 10);
}

TEST(Run, StatusAndErrors) {
  const Scenario sc = generate_paper_scenario(2);
  SolveOptions o = sc.solve;
  o.max_iters = 3;
  const RunResult r = run(sc.network, sc.utilities, o);
  EXPECT_EQ(r.status, RunStatus::kMaxIterations);
  EXPECT_EQ(r.iterations, 3u);
  const Network bad = build_network(1, 1, {{0, 0}}, {{4, 10}}, {{0, 3}});
  EXPECT_THROW(run(bad, linear_utility_table(bad, {1}, {1}), {}), InfeasibleError);
  o.eta = -1;
  EXPECT_THROW(run(sc.network, sc.utilities, o), ConfigError);
}

TEST(Lagrangian, ConsensusStateIsNegativeUtility) {
  const Network net = build_network(1, 2, {{0, 0}, {0, 1}}, {{0, 5}}, {{0, 5}, {0, 5}});
  const UtilityTable ut = linear_utility_table(net, {3, 1}, {2, 4});
  TransportState s = TransportState::zeros(2);
  s.pi = s.pi_t = s.pi_s = {1.5, 2};
  s.alpha_t = {0.7, -3};
  s.alpha_s = {-1, 2};
  EXPECT_DOUBLE_EQ(eval_lagrangian(s, net, ut, 1.0), -social_utility(s.pi, ut, net));
}

TEST(Lagrangian, PenaltyScalesWithEta) {
  const Network net = build_network(1, 2, {{0, 0}, {0, 1}}, {{0, 5}}, {{0, 5}, {0, 5}});
  const UtilityTable ut = linear_utility_table(net, {3, 1}, {2, 4});
  TransportState s = TransportState::zeros(2);
  s.pi_t = {1, 2};
  s.pi_s = {2, 0.5};
  s.pi = {1.5, 1};
  s.alpha_t = {0.5, -1};
  s.alpha_s = {1, 1};
  const double l1 = eval_lagrangian(s, net, ut, 1), l2 = eval_lagrangian(s, net, ut, 2),
               l3 = eval_lagrangian(s, net, ut, 3);
  EXPECT_NEAR(l3 - l2, l2 - l1, 1e-12);
  // By hand: utilities -(3*1 + 1*2) - (2*2 + 4*0.5) = -11; multiplier terms
  // 0.5*(1-1.5) + (-1)*(2-1) + 1*(1.5-2) + 1*(1-0.5) = -1.25; penalty at
  // eta = 1: 0.5*(0.25 + 1 + 0.25 + 0.25) = 0.875.
  EXPECT_NEAR(l1, -11 - 1.25 + 0.875, 1e-12);
}

TEST(SocialUtility, Examples) {
  const Network net = build_network(1, 1, {{0, 0}}, {{0, 5}}, {{0, 5}});
  const UtilityTable ut = linear_utility_table(net, {3}, {2});
  EXPECT_EQ(social_utility(std::vector<double>{0}, ut, net), 0.0);
  EXPECT_EQ(social_utility(std::vector<double>{2}, ut, net), 10.0);
  const Scenario sc = generate_paper_scenario(4);
  std::vector<double> plan(sc.network.n_edges());
  double loop = 0, closed = 0;
  for (std::size_t e = 0; e < plan.size(); ++e) {
    plan[e] = 0.01 * static_cast<double>(e);
    loop += eval(sc.utilities[e].target, plan[e]) + eval(sc.utilities[e].source, plan[e]);
    closed += (sc.utilities[e].target.a + sc.utilities[e].source.a) * plan[e];
  }
  EXPECT_NEAR(social_utility(plan, sc.utilities, sc.network), loop, 1e-9);
  EXPECT_NEAR(loop, closed, 1e-9);
}

}  // namespace
}  // namespace dpot
