// Copyright 2026 The hdtest Authors
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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "hdtest/error.hpp"
#include "hdtest/exact.hpp"
#include "hdtest/permutation.hpp"
#include "hdtest/rng.hpp"
#include "oracles.hpp"

using namespace hdtest;

namespace {

RowMatrix gaussian(std::mt19937_64& g, std::size_t rows, std::size_t p, double shift = 0.0) {
  std::normal_distribution<double> z(shift, 1.0);
  RowMatrix x(rows, p);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = z(g);
  return x;
}

KernelMatrix random_matrix(std::mt19937_64& g, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  const std::size_t t = n + m;
  std::vector<double> lower(t * (t - 1) / 2);
  for (auto& v : lower) v = u(g);
  return KernelMatrix(n, m, std::move(lower));
}

RandomizationDistribution one_to_hundred() {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  return RandomizationDistribution(v, std::vector<std::uint64_t>(100, 1), PermutationMode::kMonteCarlo,
                                   0, {});
}

}  // namespace

TEST(NOfGamma, Examples) {
  const std::vector<std::size_t> id{0, 1, 2, 3, 4, 5};
  EXPECT_EQ(n_of_gamma(id, 3, 3), 0u);
  const std::vector<std::size_t> swap{3, 4, 5, 0, 1, 2};
  EXPECT_EQ(n_of_gamma(swap, 3, 3), 3u);
  const std::vector<std::size_t> mixed{3, 1, 0, 2, 4};
  EXPECT_EQ(n_of_gamma(mixed, 2, 3), 1u);
}

TEST(SwCardinality, Examples) {
  EXPECT_EQ(s_w_cardinality(2, 2, 0), BigInt(4));
  EXPECT_EQ(s_w_cardinality(2, 2, 1), BigInt(16));
  EXPECT_EQ(s_w_cardinality(2, 2, 2), BigInt(4));
  EXPECT_EQ(s_w_cardinality(2, 3, 1), BigInt(72));
  EXPECT_EQ(s_w_cardinality(5, 7, 0), factorial(5) * factorial(7));
  EXPECT_THROW(s_w_cardinality(2, 3, 3), ArgumentError);
}

TEST(SwCardinality, SumsToFactorial) {
  for (std::size_t n = 2; n <= 8; ++n)
    for (std::size_t m = 2; m <= 8; ++m) {
      BigInt sum = 0;
      for (std::size_t w = 0; w <= std::min(n, m); ++w) sum += s_w_cardinality(n, m, w);
      EXPECT_EQ(sum, factorial(n + m));
    }
}

TEST(SwCardinality, MatchesLiteralEnumeration) {
  for (std::size_t n = 2; n <= 4; ++n)
    for (std::size_t m = 2; n + m <= 7; ++m) {
      std::map<std::size_t, std::uint64_t> counts;
      oracle::for_each_permutation(n + m, [&](const std::vector<std::size_t>& p) {
        const std::size_t w = oracle::crossings(p, n);
        EXPECT_EQ(n_of_gamma(p, n, m), w);
        ++counts[w];
      });
      for (std::size_t w = 0; w <= std::min(n, m); ++w)
        EXPECT_EQ(BigInt(counts[w]), s_w_cardinality(n, m, w)) << n << "," << m << "," << w;
    }
}

TEST(Randomization, ExactHistogramMatchesCardinalities) {
  std::mt19937_64 g(1);
  for (std::size_t n = 2; n <= 4; ++n)
    for (std::size_t m = 2; n + m <= 7; ++m) {
      const auto dist = randomization_distribution(random_matrix(g, n, m), PermutationPlan::exact());
      EXPECT_EQ(BigInt(dist.count()), factorial(n + m));
      for (std::size_t w = 0; w <= std::min(n, m); ++w)
        EXPECT_EQ(BigInt(dist.w_histogram()[w]), s_w_cardinality(n, m, w));
    }
}

TEST(Randomization, ExactMatchesLiteralEnumeration) {
  std::mt19937_64 g(2);
  const KernelMatrix km = random_matrix(g, 3, 3);
  std::vector<double> literal;
  oracle::for_each_permutation(6, [&](const std::vector<std::size_t>& p) {
    literal.push_back(ed_statistic_permuted(km, p));
  });
  std::sort(literal.begin(), literal.end());
  const auto mine = randomization_distribution(km, PermutationPlan::exact()).expanded();
  ASSERT_EQ(mine.size(), literal.size());
  for (std::size_t i = 0; i < mine.size(); ++i) EXPECT_NEAR(mine[i], literal[i], 1e-14);
}

TEST(Randomization, ConstantMatrix) {
  const KernelMatrix km(3, 3, std::vector<double>(15, 2.0));
  const auto dist = randomization_distribution(km, PermutationPlan::exact());
  for (double v : dist.values()) EXPECT_NEAR(v, 0.0, 1e-15);
  EXPECT_EQ(dist.cdf(1e-12), 1.0);
  const auto r = permutation_test(km, 0.05, PermutationPlan::exact());
  EXPECT_FALSE(r.reject);
}

TEST(Randomization, HandCaseMeanZero) {
  RowMatrix d(4, 1);
  d << 0, 1, 2, 3;
  const KernelMatrix km = build_kernel_matrix(LabeledSample(d, 2), KernelSpec(KernelFamily::kL1));
  const auto dist = randomization_distribution(km, PermutationPlan::exact());
  EXPECT_EQ(dist.count(), 24u);
  EXPECT_NEAR(dist.mean(), 0.0, 1e-15);
}

TEST(Randomization, ExactMeanZeroOnRandomMatrices) {
  std::mt19937_64 g(3);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + rep % 4, m = 2 + (rep / 4) % 4;
    const auto dist = randomization_distribution(random_matrix(g, n, m), PermutationPlan::exact());
    EXPECT_NEAR(dist.mean(), 0.0, 1e-12);
  }
}

TEST(Randomization, MonteCarloDeterministic) {
  std::mt19937_64 g(4);
  const KernelMatrix km = random_matrix(g, 8, 9);
  const auto plan = PermutationPlan::monte_carlo(200, 77);
  const auto a = randomization_distribution(km, plan), b = randomization_distribution(km, plan);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_EQ(a.count(), 200u);
  const auto c = randomization_distribution(km, PermutationPlan::monte_carlo(200, 78));
  EXPECT_NE(a.values(), c.values());
}

TEST(Randomization, MonteCarloIncludesIdentity) {
  std::mt19937_64 g(5);
  const KernelMatrix km = random_matrix(g, 6, 6);
  const auto dist = randomization_distribution(km, PermutationPlan::monte_carlo(50, 1));
  EXPECT_GE(dist.count_at_least(ed_statistic(km)), 1u);
  EXPECT_GE(dist.w_histogram()[0], 1u);
}

TEST(Randomization, ExactCapRefused) {
  const KernelMatrix km(6, 5, std::vector<double>(55, 1.0));
  EXPECT_THROW(randomization_distribution(km, PermutationPlan::exact()), StateError);
  EXPECT_EQ(exact_permutation_count(10, kDefaultExactCap), 3628800u);
  EXPECT_EQ(exact_permutation_count(11, kDefaultExactCap), 0u);
}

TEST(CriticalValue, Examples) {
  const auto d = one_to_hundred();
  EXPECT_EQ(critical_value(d, 0.05), 95.0);
  EXPECT_EQ(critical_value(d, 0.049), 96.0);
  EXPECT_DOUBLE_EQ(d.cdf(95.0), 0.95);
  const RandomizationDistribution point({0.0}, {1}, PermutationMode::kExact, 0, {});
  EXPECT_EQ(critical_value(point, 0.05), 0.0);
  EXPECT_THROW(critical_value(d, 0.0), ArgumentError);
  EXPECT_THROW(critical_value(d, 1.0), ArgumentError);
  const RandomizationDistribution empty({}, {}, PermutationMode::kExact, 0, {});
  EXPECT_THROW(critical_value(empty, 0.05), StateError);
}

TEST(CriticalValue, CdfRightContinuous) {
  const RandomizationDistribution d({1.0, 2.0, 2.0, 3.0}, {1, 1, 1, 1}, PermutationMode::kMonteCarlo, 0, {});
  EXPECT_EQ(d.cdf(0.999), 0.0);
  EXPECT_EQ(d.cdf(1.0), 0.25);
  EXPECT_EQ(d.cdf(2.0), 0.75);
  EXPECT_EQ(d.count_at_least(2.0), 3u);
  EXPECT_EQ(d.values().size(), 3u);
}

TEST(PermutationTest, ConstantData) {
  const LabeledSample s(RowMatrix::Constant(8, 3, 2.0), 4);
  for (auto f : {KernelFamily::kL2, KernelFamily::kL1, KernelFamily::kGaussian, KernelFamily::kLaplacian}) {
    const auto r = permutation_test(s, KernelSpec(f), 0.05, PermutationPlan::monte_carlo(100, 1));
    EXPECT_EQ(r.statistic, 0.0);
    EXPECT_EQ(r.critical_value, 0.0);
    EXPECT_FALSE(r.reject);
    EXPECT_EQ(r.p_value, 1.0);
  }
}

TEST(PermutationTest, PValueBoundsAndRescaling) {
  std::mt19937_64 g(6);
  for (int rep = 0; rep < 20; ++rep) {
    const LabeledSample s(gaussian(g, 10, 20), gaussian(g, 12, 20, rep % 2 ? 0.8 : 0.0));
    const KernelMatrix km = build_kernel_matrix(s, KernelSpec(KernelFamily::kL2));
    const auto plan = PermutationPlan::monte_carlo(99, rep);
    const auto a = permutation_test(km, 0.05, plan);
    const auto b = permutation_test(km.scaled(17.0), 0.05, plan);
    EXPECT_GE(a.p_value, 1.0 / 99.0);
    EXPECT_LE(a.p_value, 1.0);
    EXPECT_EQ(a.reject, b.reject);
    EXPECT_EQ(a.p_value, b.p_value);
    EXPECT_EQ(a.reject, a.statistic > a.critical_value);
  }
}

TEST(PermutationTest, WithoutIdentityPValueStaysPositive) {
  std::mt19937_64 g(7);
  const LabeledSample s(gaussian(g, 10, 30, 3.0), gaussian(g, 10, 30));
  auto plan = PermutationPlan::monte_carlo(40, 3);
  plan.include_identity = false;
  const auto r = permutation_test(s, KernelSpec(KernelFamily::kL2), 0.05, plan);
  EXPECT_GT(r.p_value, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 41.0);
  EXPECT_TRUE(r.reject);
}

TEST(PermutationTest, Deterministic) {
  std::mt19937_64 g(8);
  const LabeledSample s(gaussian(g, 15, 40), gaussian(g, 11, 40, 0.2));
  const auto plan = PermutationPlan::monte_carlo(300, 99);
  const auto a = permutation_test(s, KernelSpec(KernelFamily::kLaplacian), 0.05, plan);
  const auto b = permutation_test(s, KernelSpec(KernelFamily::kLaplacian), 0.05, plan);
  EXPECT_EQ(a.statistic, b.statistic);
  EXPECT_EQ(a.critical_value, b.critical_value);
  EXPECT_EQ(a.p_value, b.p_value);
  EXPECT_EQ(a.w_histogram, b.w_histogram);
}

TEST(PermutationTest, ExactLevelUnderNull) {
  // n=4, m=3: 35 distinct labellings, so the test rejects exactly when the
  // observed value is the strict maximum, probability 1/35.
  std::mt19937_64 g(9);
  int rejections = 0;
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    const LabeledSample s(gaussian(g, 4, 5), gaussian(g, 3, 5));
    rejections += permutation_test(s, KernelSpec(KernelFamily::kL2), 0.05, PermutationPlan::exact()).reject;
  }
  const double rate = double(rejections) / draws;
  EXPECT_LE(rate, 0.05);
  EXPECT_NEAR(rate, 1.0 / 35.0, 4 * std::sqrt((1.0 / 35) * (34.0 / 35) / draws));
}

TEST(PermutationTest, DetectsMarginalDifferenceWithL1) {
  std::mt19937_64 g(10);
  std::bernoulli_distribution coin;
  RowMatrix y(30, 200);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = coin(g) ? 1.0 : -1.0;
  const LabeledSample s(gaussian(g, 70, 200), y);
  const auto r = permutation_test(s, KernelSpec(KernelFamily::kL1), 0.05, PermutationPlan::monte_carlo(300, 1));
  EXPECT_TRUE(r.reject);
}
