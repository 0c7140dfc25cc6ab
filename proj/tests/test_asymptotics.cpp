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
#include <random>

#include "hdtest/asymptotics.hpp"
#include "hdtest/error.hpp"
#include "hdtest/exact.hpp"
#include "oracles.hpp"

using namespace hdtest;

namespace {

const KernelFamily kAll[] = {KernelFamily::kL2, KernelFamily::kL1, KernelFamily::kGaussian,
                             KernelFamily::kLaplacian};

MomentConstants random_constants(std::mt19937_64& g) {
  std::uniform_real_distribution<double> e(0.2, 3.0), v(0.0, 5.0);
  MomentConstants c;
  c.e_x = e(g);
  c.e_y = e(g);
  c.e_xy = e(g);
  c.v_x = v(g);
  c.v_y = v(g);
  c.v_xy = v(g);
  return c;
}

MomentConstants equal_means(double e, double vx, double vy, double vxy) {
  return MomentConstants{e, e, e, vx, vy, vxy};
}

}  // namespace

TEST(FW, Examples) {
  for (std::size_t n = 2; n <= 20; ++n)
    for (std::size_t m = 2; m <= 20; ++m) EXPECT_EQ(f_w(n, m, 0), 1.0);
  for (std::size_t n = 2; n <= 30; ++n) {
    EXPECT_NEAR(f_w(n, n, n), 1.0, 1e-13);
    EXPECT_EQ(f_w_exact(n, n, n), Rational(1));
  }
  EXPECT_THROW(f_w(3, 4, 4), ArgumentError);
  EXPECT_THROW(f_w(1, 4, 0), ArgumentError);
}

TEST(FW, HypergeometricMeanIsZeroExactly) {
  for (std::size_t n = 2; n <= 12; ++n)
    for (std::size_t m = 2; m <= 12; ++m) {
      const HypergeometricLaw law(n, m);
      Rational sum = 0;
      for (std::size_t w = 0; w <= law.max_w(); ++w) sum += law.pmf(w) * f_w_exact(n, m, w);
      EXPECT_EQ(sum, Rational(0)) << n << "," << m;
    }
}

TEST(FW, NeverExceedsOne) {
  for (std::size_t n = 2; n <= 50; ++n)
    for (std::size_t m = 2; m <= 50; ++m)
      for (std::size_t w = 0; w <= std::min(n, m); ++w) EXPECT_LE(f_w(n, m, w), 1.0 + 1e-12);
}

TEST(FW, DoubleMatchesRational) {
  for (std::size_t n = 2; n <= 25; n += 3)
    for (std::size_t m = 2; m <= 25; m += 2)
      for (std::size_t w = 0; w <= std::min(n, m); ++w)
        EXPECT_NEAR(f_w(n, m, w), static_cast<double>(f_w_exact(n, m, w)), 1e-13);
}

TEST(Hypergeometric, Examples) {
  const HypergeometricLaw one(1, 1);
  EXPECT_EQ(one.pmf(0), Rational(1, 2));
  EXPECT_EQ(one.pmf(1), Rational(1, 2));
  const HypergeometricLaw two(2, 2);
  EXPECT_EQ(two.pmf(1), Rational(2, 3));
  EXPECT_EQ(hypergeom_pmf(two, 3), Rational(0));
  EXPECT_THROW(HypergeometricLaw(0, 3), ArgumentError);
}

TEST(Hypergeometric, MatchesCardinalitiesExactly) {
  for (std::size_t n = 1; n <= 8; ++n)
    for (std::size_t m = 1; m <= 8; ++m) {
      const HypergeometricLaw law(n, m);
      Rational total = 0;
      for (std::size_t w = 0; w <= law.max_w(); ++w) {
        total += law.pmf(w);
        // |S_w| = C(m,w) C(n,n-w) n! m!, counted here from binomials directly
        const BigInt sw = binomial(m, w) * binomial(n, n - w) * factorial(n) * factorial(m);
        EXPECT_EQ(law.pmf(w) * Rational(factorial(n + m)), Rational(sw));
      }
      EXPECT_EQ(total, Rational(1));
    }
}

TEST(Mu, Examples) {
  const KernelSpec l1(KernelFamily::kL1);
  const MomentConstants flat = equal_means(1.7, 1, 1, 1);
  for (std::size_t w = 0; w <= 5; ++w) EXPECT_EQ(mu_nw(5, 5, w, flat, l1), 0.0);
  const MomentConstants c{1.0, 1.0, 2.0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(mu_nw(5, 5, 0, c, l1), 2.0);
  EXPECT_NEAR(mu_nw(5, 5, 2, c, l1), 2.0 * f_w(5, 5, 2), 1e-15);
  EXPECT_NEAR(mu_nw(5, 5, 2, c, l1), oracle::mu(5, 5, 2, c, KernelFamily::kL1, 1.0), 1e-14);
  MomentConstants neg = c;
  neg.e_x = -1.0;
  EXPECT_THROW(mu_nw(5, 5, 0, neg, l1), DomainError);
}

TEST(Mu, MatchesPreCollectionForm) {
  std::mt19937_64 g(1);
  for (int rep = 0; rep < 200; ++rep) {
    const MomentConstants c = random_constants(g);
    const std::size_t n = 2 + rep % 15, m = 2 + (rep * 7) % 19;
    for (auto f : kAll)
      for (std::size_t w = 0; w <= std::min(n, m); ++w) {
        const double got = mu_nw(n, m, w, c, KernelSpec(f, 0.8));
        const double want = oracle::mu(n, m, w, c, f, 0.8);
        EXPECT_NEAR(got, want, 1e-12 * (1.0 + std::abs(want)));
      }
  }
}

TEST(Sigma2, WZeroExample) {
  std::mt19937_64 g(2);
  for (auto f : kAll) {
    const MomentConstants c = random_constants(g);
    const KernelSpec s(f);
    const double gx = phi_prime(s, c.e_x), gy = phi_prime(s, c.e_y), gxy = phi_prime(s, c.e_xy);
    const double n = 7, m = 9;
    const double want = 4.0 / (n * m) * c.v_xy * gxy * gxy + 2.0 / (n * (n - 1)) * c.v_x * gx * gx +
                        2.0 / (m * (m - 1)) * c.v_y * gy * gy;
    EXPECT_NEAR(sigma2_nw(7, 9, 0, c, s), want, 1e-14 * want);
  }
}

TEST(Sigma2, ZeroVariances) {
  const MomentConstants c{0.0, 0.0, 0.0, 0, 0, 0};
  // e = 0 sits on the singularity of phi' for L2, but no derivative is needed
  for (auto f : kAll)
    for (std::size_t w = 0; w <= 4; ++w) EXPECT_EQ(sigma2_nw(4, 6, w, c, KernelSpec(f)), 0.0);
}

TEST(Sigma2, MatchesGroupedForm) {
  std::mt19937_64 g(3);
  for (std::size_t n = 2; n <= 30; ++n)
    for (std::size_t m = 2; m <= 30; ++m) {
      const MomentConstants c = random_constants(g);
      const KernelFamily f = kAll[(n + m) % 4];
      for (std::size_t w = 0; w <= std::min(n, m); ++w) {
        const double got = sigma2_nw(n, m, w, c, KernelSpec(f));
        const double want = oracle::sigma2(n, m, w, c, f, 1.0);
        EXPECT_LE(std::abs(got - want), 1e-10 * want) << n << "," << m << "," << w;
      }
    }
}

TEST(Sigma2, NonNegativeOnScan) {
  std::mt19937_64 g(4);
  for (int rep = 0; rep < 300; ++rep) {
    MomentConstants c = random_constants(g);
    if (rep % 3 == 0) c.v_xy = 0.0;
    if (rep % 5 == 0) c.v_x = 0.0;
    const std::size_t n = 2 + rep % 40, m = 2 + (rep * 11) % 40;
    for (std::size_t w = 0; w <= std::min(n, m); ++w)
      EXPECT_GE(sigma2_nw(n, m, w, c, KernelSpec(kAll[rep % 4])), 0.0);
  }
}

TEST(Sigma2, DomainAndArgumentErrors) {
  const MomentConstants zero_e{0.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  EXPECT_THROW(sigma2_nw(4, 4, 0, zero_e, KernelSpec(KernelFamily::kL2)), DomainError);
  const MomentConstants neg_v{1.0, 1.0, 1.0, -1.0, 1.0, 1.0};
  EXPECT_THROW(sigma2_nw(4, 4, 0, neg_v, KernelSpec(KernelFamily::kL1)), ArgumentError);
  EXPECT_THROW(sigma2_nw(4, 4, 5, equal_means(1, 1, 1, 1), KernelSpec(KernelFamily::kL1)), ArgumentError);
}

TEST(Sigma2Hdmss, Examples) {
  const KernelSpec l2(KernelFamily::kL2);
  const MomentConstants c = equal_means(2.0, 3.0, 3.0, 3.0);
  const double g = phi_prime(l2, 2.0);
  EXPECT_NEAR(sigma2_hdmss(1.0, c, l2), 8 * 3.0 * g * g, 1e-14);
  EXPECT_THROW(sigma2_hdmss(0.0, c, l2), ArgumentError);
  EXPECT_THROW(sigma2_hdmss(-1.0, c, l2), ArgumentError);

  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 50; ++rep) {
    const MomentConstants a = random_constants(gen);
    MomentConstants b = a;
    std::swap(b.e_x, b.e_y);
    std::swap(b.v_x, b.v_y);
    const double rho = 0.1 + rep * 0.07;
    for (auto f : kAll)
      EXPECT_NEAR(sigma2_hdmss(rho, a, KernelSpec(f)), sigma2_hdmss(1.0 / rho, b, KernelSpec(f)),
                  1e-12 * sigma2_hdmss(rho, a, KernelSpec(f)));
  }
}

TEST(Sigma2Hdmss, IsTheLimitOfScaledSigma2) {
  std::mt19937_64 g(6);
  for (int rep = 0; rep < 10; ++rep) {
    const MomentConstants c = random_constants(g);
    const KernelSpec s(kAll[rep % 4]);
    const std::size_t n = 200, m = 200;
    const auto w = static_cast<std::size_t>(std::lround(double(n * m) / double(n + m)));
    const double scaled = double(n * m) * sigma2_nw(n, m, w, c, s);
    const double limit = sigma2_hdmss(1.0, c, s);
    EXPECT_LT(std::abs(scaled - limit) / limit, 0.02);
  }
}

TEST(Mixture, Examples) {
  const KernelSpec l1(KernelFamily::kL1);
  const MomentConstants c = equal_means(1.0, 1.0, 1.0, 2.0);
  EXPECT_NEAR(mixture_normal_cdf(1e6, 3, 3, c, l1), 1.0, 1e-14);
  EXPECT_NEAR(mixture_normal_cdf(0.0, 3, 3, c, l1), 0.5, 1e-15);
  const double oracle_value = oracle::mixture_cdf_mc(0.5, 3, 3, c, KernelFamily::kL1, 1.0, 400000, 17);
  EXPECT_NEAR(mixture_normal_cdf(0.5, 3, 3, c, l1), oracle_value, 0.005);
}

TEST(Mixture, PointMassComponents) {
  const KernelSpec l1(KernelFamily::kL1);
  const MomentConstants c = equal_means(1.0, 0.0, 0.0, 0.0);
  EXPECT_NEAR(mixture_normal_cdf(0.0, 4, 5, c, l1), 1.0, 1e-14);
  EXPECT_EQ(mixture_normal_cdf(-1e-9, 4, 5, c, l1), 0.0);
}

TEST(GaussianProcess, MatrixLayout) {
  const GaussianProcessSpec gp{3, 2, 1.0, 0.0, 0.0};
  const KernelMatrix km = gaussian_process_matrix(gp, 4);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const bool cross = (i < 3) != (j < 3);
      if (!cross) EXPECT_EQ(km.at(i, j), 0.0);
      else EXPECT_NE(km.at(i, j), 0.0);
    }
}

TEST(PowerLimit, ZeroVariancesNeverReject) {
  const GaussianProcessSpec gp{4, 4, 0.0, 0.0, 0.0};
  const auto r = power_limit_mc(gp, 0.05, PermutationPlan::monte_carlo(50, 1), 1000);
  EXPECT_EQ(r.estimate, 0.0);
}

TEST(PowerLimit, NeedsEnoughDraws) {
  const GaussianProcessSpec gp{3, 3, 1.0, 1.0, 1.0};
  EXPECT_THROW(power_limit_mc(gp, 0.05, PermutationPlan::exact(), 999), ArgumentError);
  const GaussianProcessSpec bad{3, 3, -1.0, 1.0, 1.0};
  EXPECT_THROW(power_limit_mc(bad, 0.05, PermutationPlan::exact(), 1000), ArgumentError);
}

TEST(PowerLimit, EqualVariancesExactLevel) {
  // With equal variances all 35 labellings of 4 + 3 rows are exchangeable.
  const GaussianProcessSpec gp{4, 3, 1.0, 1.0, 1.0};
  const auto r = power_limit_mc(gp, 0.05, PermutationPlan::exact(), 20000);
  EXPECT_NEAR(r.estimate, 1.0 / 35.0, 4 * r.standard_error);
  EXPECT_LE(r.estimate, 0.05 + 3 * r.standard_error);
}

TEST(PowerLimit, AgreesWithIndependentLoop) {
  const GaussianProcessSpec gp{3, 3, 4.0, 1.0, 1.0};
  auto plan = PermutationPlan::exact();
  plan.seed = 2024;
  const auto a = power_limit_mc(gp, 0.05, plan, 20000);
  const auto b = power_limit_mc(gp, 0.05, plan, 20000, 4);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_LT(a.standard_error, 0.005);
  const double ref = oracle::power_limit(3, 3, 4.0, 1.0, 1.0, 0.05, 20000, 99);
  const double se = std::sqrt(a.standard_error * a.standard_error + ref * (1 - ref) / 20000);
  EXPECT_NEAR(a.estimate, ref, 4 * se);
}

TEST(PowerLimit, AgreesWithIndependentLoopUnbalanced) {
  // 4 + 3 rows have 35 distinct labellings, so the power is not pinned at 0.
  const GaussianProcessSpec gp{4, 3, 4.0, 1.0, 1.0};
  auto plan = PermutationPlan::exact();
  plan.seed = 7;
  const auto a = power_limit_mc(gp, 0.05, plan, 20000);
  const double ref = oracle::power_limit(4, 3, 4.0, 1.0, 1.0, 0.05, 4000, 123);
  EXPECT_GT(a.estimate, 0.0);
  const double se = std::sqrt(a.standard_error * a.standard_error + ref * (1 - ref) / 4000);
  EXPECT_NEAR(a.estimate, ref, 4 * se);
}

TEST(PowerLimit, UnequalVariancesOnLargerGroups) {
  auto plan = PermutationPlan::monte_carlo(100, 8);
  const GaussianProcessSpec gp{5, 4, 4.0, 1.0, 1.0};
  const auto a = power_limit_mc(gp, 0.05, plan, 2000);
  EXPECT_GE(a.estimate, 0.0);
  EXPECT_LE(a.estimate, 1.0);
  EXPECT_NEAR(a.standard_error, std::sqrt(a.estimate * (1 - a.estimate) / 2000), 1e-12);
}
