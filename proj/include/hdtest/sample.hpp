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

#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace hdtest {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Two samples stacked row-wise: rows [0, n) are group X, rows [n, n + m)
// are group Y. Every test and diagnostic consumes this type.
class LabeledSample {
 public:
  // Throws DataError unless n >= 2, m >= 2, p >= 1, rows == n + m and all
  // entries are finite.
  LabeledSample(RowMatrix data, std::size_t n);
  LabeledSample(const RowMatrix& x, const RowMatrix& y);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return static_cast<std::size_t>(data_.rows()) - n_; }
  std::size_t total() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(data_.cols()); }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim(), dim()};
  }

  const RowMatrix& data() const noexcept { return data_; }
  auto x_block() const { return data_.topRows(static_cast<Eigen::Index>(n_)); }
  auto y_block() const { return data_.bottomRows(static_cast<Eigen::Index>(m())); }

  // Rows rearranged so that original row i lands at position perm[i]
  // (0-based). Group sizes are kept.
  LabeledSample permuted(std::span<const std::size_t> perm) const;

 private:
  RowMatrix data_;
  std::size_t n_;
};

}  // namespace hdtest
