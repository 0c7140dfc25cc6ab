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

#include "hdtest/permutation.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "hdtest/error.hpp"
#include "hdtest/rng.hpp"

namespace hdtest {

namespace {

std::uint64_t factorial_u64(std::size_t k) {
  std::uint64_t out = 1;
  for (std::size_t i = 2; i <= k; ++i) out *= i;
  return out;
}

// N(Gamma) of a labelling: first-group rows that carry label 1.
std::size_t crossings(std::span<const std::uint8_t> labels, std::size_t n) {
  std::size_t w = 0;
  for (std::size_t j = 0; j < n; ++j) w += labels[j];
  return w;
}

}  // namespace

std::uint64_t exact_permutation_count(std::size_t total, std::uint64_t cap) {
  std::uint64_t out = 1;
  for (std::size_t i = 2; i <= total; ++i) {
    if (out > cap / i) return 0;
    out *= i;
  }
  return out <= cap ? out : 0;
}

RandomizationDistribution::RandomizationDistribution(std::vector<double> values,
                                                     std::vector<std::uint64_t> weights,
                                                     PermutationMode mode, std::uint64_t seed,
                                                     std::vector<std::uint64_t> w_histogram)
    : mode_(mode), seed_(seed), w_histogram_(std::move(w_histogram)) {
  if (values.size() != weights.size()) {
    throw DimensionError("randomization distribution: values and weights differ in length");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  values_.reserve(values.size());
  weights_.reserve(values.size());
  for (std::size_t k : order) {
    if (!values_.empty() && values_.back() == values[k]) {
      weights_.back() += weights[k];
    } else {
      values_.push_back(values[k]);
      weights_.push_back(weights[k]);
    }
    count_ += weights[k];
  }
}

double RandomizationDistribution::cdf(double t) const {
  if (count_ == 0) throw StateError("empty randomization distribution");
  const auto end = std::upper_bound(values_.begin(), values_.end(), t);
  const auto k = static_cast<std::size_t>(end - values_.begin());
  const std::uint64_t below =
      std::accumulate(weights_.begin(), weights_.begin() + static_cast<std::ptrdiff_t>(k),
                      std::uint64_t{0});
  return static_cast<double>(below) / static_cast<double>(count_);
}

std::uint64_t RandomizationDistribution::count_at_least(double t) const {
  const auto begin = std::lower_bound(values_.begin(), values_.end(), t);
  const auto k = static_cast<std::size_t>(begin - values_.begin());
  return std::accumulate(weights_.begin() + static_cast<std::ptrdiff_t>(k), weights_.end(),
                         std::uint64_t{0});
}

double RandomizationDistribution::mean() const {
  if (count_ == 0) throw StateError("empty randomization distribution");
  long double acc = 0.0L;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    acc += static_cast<long double>(values_[k]) * static_cast<long double>(weights_[k]);
  }
  return static_cast<double>(acc / static_cast<long double>(count_));
}

std::vector<double> RandomizationDistribution::expanded() const {
  std::vector<double> out;
  out.reserve(count_);
  for (std::size_t k = 0; k < values_.size(); ++k) out.insert(out.end(), weights_[k], values_[k]);
  return out;
}

std::size_t n_of_gamma(std::span<const std::size_t> perm, std::size_t n, std::size_t m) {
  if (perm.size() != n + m) throw ArgumentError("permutation length must be n + m");
  std::size_t w = 0;
  for (std::size_t j = 0; j < n; ++j) w += perm[j] >= n ? 1 : 0;
  return w;
}

BigInt s_w_cardinality(std::size_t n, std::size_t m, std::size_t w) {
  if (w > std::min(n, m)) {
    throw ArgumentError("w=" + std::to_string(w) + " outside 0..min(n, m)=" +
                        std::to_string(std::min(n, m)));
  }
  return binomial(m, w) * binomial(n, n - w) * factorial(n) * factorial(m);
}

RandomizationDistribution randomization_distribution(const KernelMatrix& km,
                                                     const PermutationPlan& plan) {
  const std::size_t n = km.n();
  const std::size_t m = km.m();
  const std::size_t total = n + m;
  std::vector<std::uint64_t> histogram(std::min(n, m) + 1, 0);

  if (plan.mode == PermutationMode::kExact) {
    if (exact_permutation_count(total, plan.exact_cap) == 0) {
      throw StateError("exact enumeration of " + std::to_string(total) +
                       "! permutations exceeds the cap of " + std::to_string(plan.exact_cap) +
                       "; use Monte Carlo mode (e.g. --perms S) instead");
    }
    const std::uint64_t multiplicity = factorial_u64(n) * factorial_u64(m);
    std::vector<double> values;
    std::vector<std::uint64_t> weights;
    GroupLabels labels = identity_labels(n, m);
    do {
      values.push_back(ed_statistic_labeled(km, labels));
      weights.push_back(multiplicity);
      histogram[crossings(labels, n)] += multiplicity;
    } while (std::next_permutation(labels.begin(), labels.end()));
    return RandomizationDistribution(std::move(values), std::move(weights),
                                     PermutationMode::kExact, 0, std::move(histogram));
  }

  if (plan.count < 1) throw ArgumentError("Monte Carlo plan needs at least one permutation");
  std::vector<double> values;
  values.reserve(plan.count);
  std::size_t first_draw = 0;
  if (plan.include_identity) {
    values.push_back(ed_statistic(km));
    histogram[0] += 1;
    first_draw = 1;
  }
  for (std::size_t s = first_draw; s < plan.count; ++s) {
    CounterRng rng(derive_seed(plan.seed, {s}));
    const auto perm = random_permutation(total, rng);
    GroupLabels labels(total);
    for (std::size_t i = 0; i < total; ++i) labels[i] = perm[i] >= n ? 1 : 0;
    values.push_back(ed_statistic_labeled(km, labels));
    histogram[crossings(labels, n)] += 1;
  }
  std::vector<std::uint64_t> weights(values.size(), 1);
  return RandomizationDistribution(std::move(values), std::move(weights),
                                   PermutationMode::kMonteCarlo, plan.seed,
                                   std::move(histogram));
}

double critical_value(const RandomizationDistribution& dist, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ArgumentError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  if (dist.count() == 0) throw StateError("empty randomization distribution");
  // cdf(t) >= 1 - alpha, with slack for 1 - alpha not being representable.
  const double target = (1.0 - alpha) * static_cast<double>(dist.count()) * (1.0 - 1e-12);
  std::uint64_t cumulative = 0;
  const auto& values = dist.values();
  const auto& weights = dist.weights();
  for (std::size_t k = 0; k < values.size(); ++k) {
    cumulative += weights[k];
    if (static_cast<double>(cumulative) >= target) return values[k];
  }
  return values.back();
}

TestResult permutation_test(const KernelMatrix& km, double alpha, const PermutationPlan& plan) {
  const auto dist = randomization_distribution(km, plan);
  TestResult result;
  result.statistic = ed_statistic(km);
  result.critical_value = critical_value(dist, alpha);
  // Without the identity in the reference set, count the observed value
  // once more so the p-value stays strictly positive.
  const std::uint64_t extra = plan.include_identity || plan.mode == PermutationMode::kExact ? 0 : 1;
  result.p_value = static_cast<double>(dist.count_at_least(result.statistic) + extra) /
                   static_cast<double>(dist.count() + extra);
  result.reject = result.statistic > result.critical_value;
  result.alpha = alpha;
  result.plan = PlanSummary{dist.mode(), dist.count(), dist.seed()};
  result.w_histogram = dist.w_histogram();
  return result;
}

TestResult permutation_test(const LabeledSample& sample, const KernelSpec& spec, double alpha,
                            const PermutationPlan& plan) {
  return permutation_test(build_kernel_matrix(sample, spec), alpha, plan);
}

std::string to_string(PermutationMode mode) {
  return mode == PermutationMode::kExact ? "exact" : "monte-carlo";
}

}  // namespace hdtest
