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

// The unbiased two-sample U-statistic
//
//   ED_n = 2/(nm) sum_{i,j} k(X_i, Y_j)
//        - 2/(n(n-1)) sum_{i<j} k(X_i, X_j) - 2/(m(m-1)) sum_{i<j} k(Y_i, Y_j)
//
// and its value under a relabelling of the pooled rows. A permutation never
// touches the data: it only changes which of the three weights
// {2/(nm), -2/(n(n-1)), -2/(m(m-1))} each cached pair value receives, so a
// permuted statistic costs O((n+m)^2) regardless of the dimension.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hdtest/kernels.hpp"
#include "hdtest/sample.hpp"

namespace hdtest {

// Group membership per pooled row: 0 = first group, 1 = second group.
using GroupLabels = std::vector<std::uint8_t>;

// Symmetric matrix of pairwise kernel values over the pooled rows, stored
// as a packed strict lower triangle. The diagonal is never used.
class KernelMatrix {
 public:
  // Wraps precomputed pair values; `lower` holds entry (i, j), j < i, at
  // index i(i-1)/2 + j. Used for scaled copies and for the Gaussian-process
  // arrays in the asymptotics module.
  KernelMatrix(std::size_t n, std::size_t m, std::vector<double> lower,
               std::optional<KernelSpec> spec = std::nullopt);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t size() const noexcept { return n_ + m_; }
  const std::optional<KernelSpec>& spec() const noexcept { return spec_; }

  double at(std::size_t i, std::size_t j) const noexcept {
    if (i == j) return 0.0;
    if (i < j) std::swap(i, j);
    return lower_[i * (i - 1) / 2 + j];
  }

  std::span<const double> lower() const noexcept { return lower_; }
  std::span<const double> row_below(std::size_t i) const noexcept {
    return {lower_.data() + i * (i - 1) / 2, i};
  }

  // Copy with every entry multiplied by c.
  KernelMatrix scaled(double c) const;

 private:
  std::size_t n_;
  std::size_t m_;
  std::vector<double> lower_;
  std::optional<KernelSpec> spec_;
};

// Pairwise psi-bar values (packed lower triangle). The three squared-
// difference kernels share this matrix, so callers comparing several
// kernels on one sample can compute it once.
std::vector<double> build_psi_matrix(const LabeledSample& sample, PsiKind kind);

// Applies spec.phi to a psi-bar matrix built with spec.psi_kind().
KernelMatrix kernel_matrix_from_psi(const LabeledSample& sample,
                                    std::span<const double> psi_lower,
                                    const KernelSpec& spec);

KernelMatrix build_kernel_matrix(const LabeledSample& sample, const KernelSpec& spec);

// Pair weight Pi_ij implied by a permutation: -2/(n(n-1)) when both rows
// land in the first group, -2/(m(m-1)) when both land in the second, 2/(nm)
// otherwise.
class GroupWeights {
 public:
  GroupWeights(std::size_t n, std::size_t m, std::span<const std::size_t> perm);

  double weight(std::size_t i, std::size_t j) const;
  const GroupLabels& labels() const noexcept { return labels_; }

 private:
  std::size_t n_;
  std::size_t m_;
  GroupLabels labels_;
};

// labels[i] = 1 iff perm[i] >= n. Throws ArgumentError if perm is not a
// bijection on [0, size).
GroupLabels labels_from_permutation(std::span<const std::size_t> perm, std::size_t n);
GroupLabels identity_labels(std::size_t n, std::size_t m);

// Statistic for an arbitrary labelling with exactly n zeros. This is the
// single evaluation path: ed_statistic and ed_statistic_permuted both call
// it, so the identity permutation reproduces the observed value bit for bit.
double ed_statistic_labeled(const KernelMatrix& km, std::span<const std::uint8_t> labels);

double ed_statistic(const KernelMatrix& km);

// Statistic of the relabelled sample in which row i moves to position
// perm[i] (0-based).
double ed_statistic_permuted(const KernelMatrix& km, std::span<const std::size_t> perm);

}  // namespace hdtest
