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

// Permutation calibration of the two-sample statistic.
//
// The randomization distribution is the law of the statistic over
// relabellings of the pooled rows. Exact mode covers all (n+m)! permutations;
// since a permuted statistic only depends on which rows end up in the first
// group, each of the C(n+m, n) group assignments is evaluated once and
// carries multiplicity n! m!. Monte Carlo mode keeps the observed statistic
// and adds S - 1 uniformly drawn permutations (with replacement).

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdtest/exact.hpp"
#include "hdtest/kernels.hpp"
#include "hdtest/sample.hpp"
#include "hdtest/statistic.hpp"

namespace hdtest {

enum class PermutationMode { kExact, kMonteCarlo };

inline constexpr std::uint64_t kDefaultExactCap = 3'628'800;  // 10!

struct PermutationPlan {
  PermutationMode mode = PermutationMode::kMonteCarlo;
  std::size_t count = 300;  // S, Monte Carlo only
  std::uint64_t seed = 0;
  bool include_identity = true;
  std::uint64_t exact_cap = kDefaultExactCap;

  static PermutationPlan exact(std::uint64_t cap = kDefaultExactCap) {
    PermutationPlan p;
    p.mode = PermutationMode::kExact;
    p.exact_cap = cap;
    return p;
  }
  static PermutationPlan monte_carlo(std::size_t count, std::uint64_t seed) {
    PermutationPlan p;
    p.mode = PermutationMode::kMonteCarlo;
    p.count = count;
    p.seed = seed;
    return p;
  }
};

// (n+m)! if it does not exceed `cap`, otherwise 0.
std::uint64_t exact_permutation_count(std::size_t total, std::uint64_t cap);

class RandomizationDistribution {
 public:
  // values need not be sorted; weights are multiplicities (same length).
  RandomizationDistribution(std::vector<double> values, std::vector<std::uint64_t> weights,
                            PermutationMode mode, std::uint64_t seed,
                            std::vector<std::uint64_t> w_histogram);

  // Distinct evaluations, ascending, with their multiplicities.
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::uint64_t>& weights() const noexcept { return weights_; }
  std::uint64_t count() const noexcept { return count_; }
  PermutationMode mode() const noexcept { return mode_; }
  std::uint64_t seed() const noexcept { return seed_; }
  // Entry w counts evaluated permutations with N(Gamma) = w.
  const std::vector<std::uint64_t>& w_histogram() const noexcept { return w_histogram_; }

  // #{values <= t} / count.
  double cdf(double t) const;
  // #{values >= t}.
  std::uint64_t count_at_least(double t) const;
  // Weighted mean of the stored values.
  double mean() const;

  // Every value repeated by its multiplicity. Only sensible for small counts.
  std::vector<double> expanded() const;

 private:
  std::vector<double> values_;
  std::vector<std::uint64_t> weights_;
  std::uint64_t count_ = 0;
  PermutationMode mode_;
  std::uint64_t seed_;
  std::vector<std::uint64_t> w_histogram_;
};

struct PlanSummary {
  PermutationMode mode;
  std::uint64_t count;
  std::uint64_t seed;
};

struct TestResult {
  double statistic;
  double critical_value;
  double p_value;
  bool reject;
  double alpha;
  PlanSummary plan;
  std::vector<std::uint64_t> w_histogram;
};

// Number of first-group rows sent into the second group: #{j < n : perm[j] >= n}.
std::size_t n_of_gamma(std::span<const std::size_t> perm, std::size_t n, std::size_t m);

// |S_w| = C(m, w) C(n, n-w) n! m!. Throws ArgumentError unless 0 <= w <= min(n, m).
BigInt s_w_cardinality(std::size_t n, std::size_t m, std::size_t w);

// Throws StateError when exact mode is requested above the plan's cap.
RandomizationDistribution randomization_distribution(const KernelMatrix& km,
                                                     const PermutationPlan& plan);

// Smallest stored t with cdf(t) >= 1 - alpha.
double critical_value(const RandomizationDistribution& dist, double alpha);

TestResult permutation_test(const KernelMatrix& km, double alpha, const PermutationPlan& plan);
TestResult permutation_test(const LabeledSample& sample, const KernelSpec& spec, double alpha,
                            const PermutationPlan& plan);

std::string to_string(PermutationMode mode);

}  // namespace hdtest
