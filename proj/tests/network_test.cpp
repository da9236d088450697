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

#include <random>

#include <gtest/gtest.h>

#include "dpot/network.hpp"
#include "oracles.hpp"

namespace dpot {
namespace {

TEST(BuildNetwork, SmallestNetwork) {
  const Network net = build_network(1, 1, {{0, 0}}, {{0, 5}}, {{0, 3}});
  EXPECT_EQ(net.n_edges(), 1u);
  EXPECT_EQ(net.n_nodes(), 2u);
  EXPECT_TRUE(net.is_complete());
}

TEST(BuildNetwork, CompleteThirtyByFour) {
  const Network net = build_network(30, 4, complete_edges(30, 4),
                                    std::vector<Bounds>(30, {0, 5}),
                                    std::vector<Bounds>(4, {0, 30}));
  EXPECT_EQ(net.n_edges(), 120u);
  EXPECT_EQ(net.edge(0), (EdgeId{0, 0}));
  EXPECT_EQ(net.edge(5), (EdgeId{1, 1}));
}

TEST(BuildNetwork, RejectsDuplicateEdge) {
  EXPECT_THROW(build_network(1, 1, {{0, 0}, {0, 0}}, {{0, 5}}, {{0, 3}}), ConfigError);
}

TEST(BuildNetwork, RejectsMalformedInput) {
  EXPECT_THROW(build_network(0, 1, {}, {}, {{0, 1}}), ConfigError);
  EXPECT_THROW(build_network(1, 1, {{0, 1}}, {{0, 5}}, {{0, 3}}), ConfigError);
  EXPECT_THROW(build_network(1, 1, {{0, 0}}, {{3, 2}}, {{0, 3}}), ConfigError);
  EXPECT_THROW(build_network(1, 1, {{0, 0}}, {{-1, 2}}, {{0, 3}}), ConfigError);
  EXPECT_THROW(build_network(1, 2, {{0, 0}}, {{0, 2}}, {{0, 3}, {0, 3}}), ConfigError);
  EXPECT_THROW(build_network(1, 1, {{0, 0}}, {{0, 5}, {0, 1}}, {{0, 3}}), ConfigError);
}

TEST(Adjacency, MatchesBruteScan) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Network net = testing::random_network(rng, 1 + rng() % 6, 1 + rng() % 5, 0.5, 5, 5, true);
    for (const NodeId node : net.nodes()) {
      std::vector<std::size_t> expect;
      for (std::size_t e = 0; e < net.n_edges(); ++e) {
        const bool hit = node.kind == NodeKind::kTarget ? net.edge(e).target == node.index
                                                        : net.edge(e).source == node.index;
        if (hit) expect.push_back(e);
      }
      const auto got = net.incident(node);
      EXPECT_EQ(std::vector<std::size_t>(got.begin(), got.end()), expect);
    }
  }
}

TEST(Feasibility, ZeroLowerBoundsAreFeasible) {
  const Network net = build_network(3, 2, complete_edges(3, 2),
                                    std::vector<Bounds>(3, {0, 1}),
                                    std::vector<Bounds>(2, {0, 1}));
  EXPECT_TRUE(check_feasibility(net));
}

TEST(Feasibility, TargetDemandExceedsSupply) {
  const Network net = build_network(1, 1, {{0, 0}}, {{4, 10}}, {{0, 3}});
  const FeasibilityReport r = check_feasibility(net);
  EXPECT_FALSE(r);
  EXPECT_DOUBLE_EQ(r.required, 4.0);
  EXPECT_DOUBLE_EQ(r.routed, 3.0);
  EXPECT_FALSE(r.witness.empty());
}

TEST(Feasibility, TwoByTwoWitnessIsTheSources) {
  const Network net = build_network(2, 2, complete_edges(2, 2), {{2, 10}, {2, 10}},
                                    {{0, 1}, {0, 1}});
  const FeasibilityReport r = check_feasibility(net);
  ASSERT_FALSE(r);
  EXPECT_EQ(r.witness, (std::vector<NodeId>{NodeId::source(0), NodeId::source(1)}));
}

TEST(Feasibility, AgreesWithIntegerEnumeration) {
  std::mt19937_64 rng(11);
  int infeasible = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t nt = 1 + rng() % 3, ns = 1 + rng() % 3;
    Network net = testing::random_network(rng, nt, ns, 0.5, 5, 5, true, 1.0);
    if (net.n_edges() > 4) continue;
    const bool expect = testing::brute_feasible(net);
    infeasible += !expect;
    EXPECT_EQ(static_cast<bool>(check_feasibility(net)), expect) << "trial " << trial;
  }
  EXPECT_GT(infeasible, 10);
}

}  // namespace
}  // namespace dpot
