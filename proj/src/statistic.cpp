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

#include "hdtest/statistic.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "hdtest/error.hpp"

namespace hdtest {

namespace {

// Unevaluated sum hi + lo carrying about twice the precision of a double.
// Every step uses the exact error of a floating-point addition, so the
// result does not depend on the order in which terms arrive beyond the
// final rounding.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  void add(double v) noexcept {
    const double s = hi + v;
    const double b = s - hi;
    lo += (hi - (s - b)) + (v - b);
    hi = s;
  }
  void add(const DoubleDouble& v) noexcept {
    add(v.hi);
    lo += v.lo;
  }
  DoubleDouble divided(double d) const noexcept {
    const double q = hi / d;
    return {q, (std::fma(-q, d, hi) + lo) / d};
  }
};

std::size_t packed_size(std::size_t total) { return total * (total - 1) / 2; }

}  // namespace

KernelMatrix::KernelMatrix(std::size_t n, std::size_t m, std::vector<double> lower,
                           std::optional<KernelSpec> spec)
    : n_(n), m_(m), lower_(std::move(lower)), spec_(std::move(spec)) {
  if (n_ < 2 || m_ < 2) throw DataError("kernel matrix needs at least 2 rows per group");
  if (lower_.size() != packed_size(n_ + m_)) {
    throw DimensionError("packed kernel matrix has " + std::to_string(lower_.size()) +
                         " entries, expected " + std::to_string(packed_size(n_ + m_)));
  }
}

KernelMatrix KernelMatrix::scaled(double c) const {
  std::vector<double> out(lower_);
  for (double& v : out) v *= c;
  return KernelMatrix(n_, m_, std::move(out), spec_);
}

std::vector<double> build_psi_matrix(const LabeledSample& sample, PsiKind kind) {
  const std::size_t total = sample.total();
  std::vector<double> lower(packed_size(total));
  for (std::size_t i = 1; i < total; ++i) {
    const auto zi = sample.row(i);
    double* out = lower.data() + i * (i - 1) / 2;
    for (std::size_t j = 0; j < i; ++j) out[j] = psi_bar(zi, sample.row(j), kind);
  }
  return lower;
}

KernelMatrix kernel_matrix_from_psi(const LabeledSample& sample,
                                    std::span<const double> psi_lower,
                                    const KernelSpec& spec) {
  if (psi_lower.size() != packed_size(sample.total())) {
    throw DimensionError("psi matrix does not match the sample size");
  }
  std::vector<double> lower(psi_lower.size());
  for (std::size_t k = 0; k < lower.size(); ++k) lower[k] = spec.phi(psi_lower[k]);
  return KernelMatrix(sample.n(), sample.m(), std::move(lower), spec);
}

KernelMatrix build_kernel_matrix(const LabeledSample& sample, const KernelSpec& spec) {
  return kernel_matrix_from_psi(sample, build_psi_matrix(sample, spec.psi_kind()), spec);
}

GroupLabels labels_from_permutation(std::span<const std::size_t> perm, std::size_t n) {
  const std::size_t total = perm.size();
  GroupLabels labels(total);
  std::vector<bool> seen(total, false);
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t target = perm[i];
    if (target >= total || seen[target]) {
      throw ArgumentError("not a permutation of 0.." + std::to_string(total - 1));
    }
    seen[target] = true;
    labels[i] = target >= n ? 1 : 0;
  }
  return labels;
}

GroupLabels identity_labels(std::size_t n, std::size_t m) {
  GroupLabels labels(n + m, 0);
  std::fill(labels.begin() + static_cast<std::ptrdiff_t>(n), labels.end(), std::uint8_t{1});
  return labels;
}

GroupWeights::GroupWeights(std::size_t n, std::size_t m, std::span<const std::size_t> perm)
    : n_(n), m_(m) {
  if (perm.size() != n + m) throw ArgumentError("permutation length must be n + m");
  labels_ = labels_from_permutation(perm, n);
}

double GroupWeights::weight(std::size_t i, std::size_t j) const {
  if (i == j || i >= labels_.size() || j >= labels_.size()) {
    throw ArgumentError("weight requested for an invalid index pair");
  }
  const auto nd = static_cast<double>(n_);
  const auto md = static_cast<double>(m_);
  switch (labels_[i] + labels_[j]) {
    case 0:
      return -2.0 / (nd * (nd - 1.0));
    case 2:
      return -2.0 / (md * (md - 1.0));
    default:
      return 2.0 / (nd * md);
  }
}

double ed_statistic_labeled(const KernelMatrix& km, std::span<const std::uint8_t> labels) {
  const std::size_t total = km.size();
  if (labels.size() != total) throw ArgumentError("label vector length must be n + m");

  // Index 0: both rows in the first group, 1: mixed, 2: both in the second.
  DoubleDouble acc[3];
  for (std::size_t i = 1; i < total; ++i) {
    const auto row = km.row_below(i);
    DoubleDouble part[2];
    for (std::size_t j = 0; j < i; ++j) part[labels[j]].add(row[j]);
    const unsigned li = labels[i];
    acc[li].add(part[0]);
    acc[li + 1].add(part[1]);
  }

  const auto nd = static_cast<double>(km.n());
  const auto md = static_cast<double>(km.m());
  const DoubleDouble xy = acc[1].divided(nd * md * 0.5);
  const DoubleDouble xx = acc[0].divided(nd * (nd - 1.0) / 2.0);
  const DoubleDouble yy = acc[2].divided(md * (md - 1.0) / 2.0);
  // The within-group means enter symmetrically, so swapping the groups when
  // n == m gives the same bits and ties in the randomization distribution
  // stay ties.
  DoubleDouble within;
  within.add(xx.hi);
  within.add(yy.hi);
  within.lo += xx.lo + yy.lo;
  DoubleDouble ed = xy;
  ed.add(-within.hi);
  return ed.hi + (ed.lo - within.lo);
}

double ed_statistic(const KernelMatrix& km) {
  return ed_statistic_labeled(km, identity_labels(km.n(), km.m()));
}

double ed_statistic_permuted(const KernelMatrix& km, std::span<const std::size_t> perm) {
  if (perm.size() != km.size()) {
    throw ArgumentError("permutation has length " + std::to_string(perm.size()) +
                        ", expected " + std::to_string(km.size()));
  }
  return ed_statistic_labeled(km, labels_from_permutation(perm, km.n()));
}

}  // namespace hdtest
