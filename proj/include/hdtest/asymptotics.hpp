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

// Closed-form limits of the permuted statistic as the dimension grows.
//
// For a permutation that sends w first-group rows into the second group,
// the statistic concentrates at
//
//   mu_{n,w} = (2 phi(e_xy) - phi(e_x) - phi(e_y)) f(w),
//   f(w) = 1 - ((2m-1)/(m(m-1)) + (2n-1)/(n(n-1))) w
//            + (2/(mn) + 1/(n(n-1)) + 1/(m(m-1))) w^2,
//
// with Gaussian fluctuations of variance sigma^2_{n,w} / p. Under a uniform
// random permutation, w is hypergeometric, so the randomization
// distribution is a Gaussian mixture. When n, m grow with n/m -> rho the
// scaled variance nm sigma^2_{n,W} settles at
//
//   sigma^2 = 4 v_xy phi'(e_xy)^2 + 2 rho v_x phi'(e_x)^2 + (2/rho) v_y phi'(e_y)^2.

#pragma once

#include <cstddef>
#include <cstdint>

#include "hdtest/exact.hpp"
#include "hdtest/kernels.hpp"
#include "hdtest/permutation.hpp"

namespace hdtest {

// Limiting means (e_*) of psi-bar and limiting variances (v_*) of the
// double-centered pair term, within X, within Y and across groups.
struct MomentConstants {
  double e_x = 0.0;
  double e_y = 0.0;
  double e_xy = 0.0;
  double v_x = 0.0;
  double v_y = 0.0;
  double v_xy = 0.0;

  // Throws ArgumentError on negative or non-finite entries.
  void validate() const;
};

// W = N(Gamma) for a uniformly random permutation of n + m rows.
class HypergeometricLaw {
 public:
  HypergeometricLaw(std::size_t n, std::size_t m);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t max_w() const noexcept { return n_ < m_ ? n_ : m_; }

  // C(m, w) C(n, n-w) / C(n+m, n); zero outside the support.
  Rational pmf(std::size_t w) const;
  double pmf_double(std::size_t w) const;

 private:
  std::size_t n_;
  std::size_t m_;
};

Rational hypergeom_pmf(const HypergeometricLaw& law, std::size_t w);

double f_w(std::size_t n, std::size_t m, std::size_t w);
Rational f_w_exact(std::size_t n, std::size_t m, std::size_t w);

double mu_nw(std::size_t n, std::size_t m, std::size_t w, const MomentConstants& c,
             const KernelSpec& spec);

// phi'(e_*) is only evaluated for terms whose variance is positive, so a
// degenerate term never triggers the derivative's singularity at 0.
double sigma2_nw(std::size_t n, std::size_t m, std::size_t w, const MomentConstants& c,
                 const KernelSpec& spec);

double sigma2_hdmss(double rho, const MomentConstants& c, const KernelSpec& spec);

// sum_w P(W = w) Phi(a / sigma_{n,w}); a zero-variance component is a point
// mass at 0 and contributes 1{a >= 0}.
double mixture_normal_cdf(double a, std::size_t n, std::size_t m, const MomentConstants& c,
                          const KernelSpec& spec);

// Variances of the independent Gaussian pair families b (cross), c (within
// X) and d (within Y) that the double-centered pair terms converge to.
struct GaussianProcessSpec {
  std::size_t n = 0;
  std::size_t m = 0;
  double v_xy = 0.0;
  double v_x = 0.0;
  double v_y = 0.0;
};

struct PowerLimitEstimate {
  double estimate;
  double standard_error;
  std::size_t draws;
};

// One draw of the limiting pair process arranged as a kernel matrix: cross
// pairs hold b, within-group pairs hold -c and -d, so the permuted
// statistic of this matrix is V(Gamma) = sum Pi b - sum Pi c - sum Pi d.
KernelMatrix gaussian_process_matrix(const GaussianProcessSpec& gp, std::uint64_t seed);

// Monte Carlo estimate of P(V(Gamma_0) > Q_{1-alpha}), where Q is the
// quantile of {V(Gamma)} over the plan's permutations. Draw d uses
// derive_seed(plan.seed, {d, 0}) for the Gaussians and
// derive_seed(plan.seed, {d, 1}) for its permutations.
PowerLimitEstimate power_limit_mc(const GaussianProcessSpec& gp, double alpha,
                                  const PermutationPlan& plan, std::size_t draws,
                                  int jobs = 1);

}  // namespace hdtest
