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
#include "dpot/utility.hpp"

namespace dpot {
namespace {

TEST(Utility, Examples) {
  EXPECT_DOUBLE_EQ(eval(UtilitySpec::linear(3), 2), 6.0);
  EXPECT_DOUBLE_EQ(eval(UtilitySpec::quadratic(4, 1), 2), 6.0);
  EXPECT_DOUBLE_EQ(eval(UtilitySpec::linear(0), 17.5), 0.0);
  EXPECT_DOUBLE_EQ(grad(UtilitySpec::linear(5), 7), 5.0);
  EXPECT_DOUBLE_EQ(grad(UtilitySpec::quadratic(4, 1), 2), 2.0);
}

TEST(Utility, RejectsNegativeAmount) {
  EXPECT_THROW(eval(UtilitySpec::linear(1), -0.5), std::domain_error);
  EXPECT_THROW(grad(UtilitySpec::linear(1), -0.5), std::domain_error);
}

TEST(Utility, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(0, 5), b(0, 2), x(0.01, 2);
  for (int i = 0; i < 1000; ++i) {
    const UtilitySpec u = i % 2 ? UtilitySpec::linear(a(rng)) : UtilitySpec::quadratic(a(rng), b(rng));
    const double pi = x(rng), h = 1e-5;
    const double fd = (eval(u, pi + h) - eval(u, pi - h)) / (2 * h);
    EXPECT_NEAR(grad(u, pi), fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Utility, ConcaveAndNonincreasingGradient) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> a(0, 5), b(0, 2), x(0, 3), l(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const UtilitySpec u = i % 2 ? UtilitySpec::linear(a(rng)) : UtilitySpec::quadratic(a(rng), b(rng));
    double p1 = x(rng), p2 = x(rng);
    const double lam = l(rng);
    EXPECT_GE(eval(u, lam * p1 + (1 - lam) * p2),
              lam * eval(u, p1) + (1 - lam) * eval(u, p2) - 1e-9);
    if (p1 > p2) std::swap(p1, p2);
    EXPECT_GE(grad(u, p1), grad(u, p2));
  }
}

TEST(Utility, Validation) {
  EXPECT_NO_THROW(validate_utility(UtilitySpec::quadratic(4, 1), 4));
  EXPECT_THROW(validate_utility(UtilitySpec::quadratic(4, 1), 5), ConfigError);
  EXPECT_THROW(validate_utility(UtilitySpec::linear(-1), 5), ConfigError);
  EXPECT_THROW(validate_utility(UtilitySpec::linear(std::nan("")), 5), ConfigError);
  EXPECT_THROW(GradBound(0.0), ConfigError);
}

class SlopeBound : public ::testing::Test {
 protected:
  Network net = build_network(1, 2, {{0, 0}, {0, 1}}, {{0, 3}}, {{0, 3}, {0, 3}});
};

TEST_F(SlopeBound, EqualityAllowed) {
  const UtilityTable t = linear_utility_table(net, {2, 1}, {2, 0.5});
  EXPECT_TRUE(check_slope_bound(t, GradBound(2), net).empty());
}

TEST_F(SlopeBound, SlopeFiveAgainstRhoTwo) {
  const UtilityTable t = linear_utility_table(net, {5, 1}, {2, 0.5});
  const auto v = check_slope_bound(t, GradBound(2), net);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].edge, 0u);
  EXPECT_EQ(v[0].side, NodeKind::kTarget);
  EXPECT_DOUBLE_EQ(v[0].max_derivative, 5.0);
  EXPECT_DOUBLE_EQ(max_slope(t), 5.0);
}

TEST_F(SlopeBound, QuadraticUsesIntercept) {
  const UtilityTable t = make_utility_table(
      net, {{UtilitySpec::quadratic(3, 1), UtilitySpec::linear(1)},
            {UtilitySpec::linear(1), UtilitySpec::quadratic(3, 1)}});
  EXPECT_TRUE(check_slope_bound(t, GradBound(3), net).empty());
  EXPECT_EQ(check_slope_bound(t, GradBound(2.9), net).size(), 2u);
}

TEST_F(SlopeBound, TableSizeMismatch) {
  const Network other = build_network(1, 1, {{0, 0}}, {{0, 3}}, {{0, 3}});
  const UtilityTable t = linear_utility_table(other, {1}, {1});
  EXPECT_THROW(check_slope_bound(t, GradBound(1), net), ConfigError);
}

}  // namespace
}  // namespace dpot
