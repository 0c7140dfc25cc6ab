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

// Empirical discrepancy measures and moment-constant estimators.
//
// The measures mirror the regimes that govern the permutation test's power:
// per-coordinate mean and variance differences (which every kernel picks
// up), per-coordinate distributional differences (which only the L1 kernel
// picks up) and covariance differences.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "hdtest/asymptotics.hpp"
#include "hdtest/kernels.hpp"
#include "hdtest/sample.hpp"

namespace hdtest {

struct MeanVarianceGaps {
  double mean_gap;  // (1/p) sum_u (mean_x,u - mean_y,u)^2
  double var_gap;   // |(1/p) sum_u (var_x,u - var_y,u)|, unbiased variances
};

MeanVarianceGaps mean_variance_gaps(const LabeledSample& sample);

// Average over coordinates of the univariate unbiased energy-distance
// statistic. Identical to ed_statistic with the L1 kernel.
double marginal_energy_sum(const LabeledSample& sample);

// (1/p) ||S_x - S_y||_F^2 for the unbiased group covariance matrices.
double cov_gap(const LabeledSample& sample);

// Plug-in estimates of the moment constants. The e's average psi-bar over
// distinct pairs. Each v is the variance of sqrt(p) times the double-
// centered pair value, where the conditional means are replaced by
// leave-pair averages (no average uses either index of the pair it
// centers). The residual variance is then rescaled by (n-1)(m-1)/(nm)
// across groups and (n-3)/(n-1) within a group, which makes the estimate
// unbiased when pair terms are uncorrelated. Needs n, m >= 4.
MomentConstants estimate_moment_constants(const LabeledSample& sample, const KernelSpec& spec);

// (4/p) sum_{u,v} cov_x(u,v) cov_y(u,v): the cross-group v for psi = (a-b)^2.
double analytic_vxy_quadratic(const Eigen::MatrixXd& cov_x, const Eigen::MatrixXd& cov_y);

struct L2MomentEstimates {
  double alpha2_x;
  double alpha2_y;
  double alpha2_xy;
  double sqrt_p_alpha2_x;
  double sqrt_p_alpha2_y;
  double sqrt_p_alpha2_xy;
};

// Mean squares of psi-bar minus its group-wise pair average.
L2MomentEstimates l2_moment_estimates(const LabeledSample& sample, const KernelSpec& spec);

struct DiagnoseOptions {
  std::size_t permutations = 100;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

struct DiscrepancyReport {
  double mean_gap = 0.0;
  double var_gap = 0.0;
  double marginal_ed_sum = 0.0;
  double cov_gap = 0.0;
  // Upper (1 - alpha) quantiles of each measure under random relabelling.
  double mean_gap_null = 0.0;
  double var_gap_null = 0.0;
  double marginal_ed_sum_null = 0.0;
  double cov_gap_null = 0.0;
  std::string regime_hint;
};

// The regime hint only compares each measure with its relabelling spread;
// rate conditions in p cannot be checked from one data set, so the label is
// advisory.
DiscrepancyReport discrepancy_report(const LabeledSample& sample,
                                     const DiagnoseOptions& options = {});

}  // namespace hdtest
