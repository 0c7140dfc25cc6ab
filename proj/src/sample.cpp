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

#include "hdtest/sample.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "hdtest/error.hpp"

namespace hdtest {

namespace {

void check_permutation(std::span<const std::size_t> perm, std::size_t size) {
  if (perm.size() != size) {
    throw ArgumentError("permutation has length " + std::to_string(perm.size()) +
                        ", expected " + std::to_string(size));
  }
  std::vector<bool> seen(size, false);
  for (std::size_t v : perm) {
    if (v >= size || seen[v]) throw ArgumentError("not a permutation (bad or repeated index)");
    seen[v] = true;
  }
}

}  // namespace

LabeledSample::LabeledSample(RowMatrix data, std::size_t n) : data_(std::move(data)), n_(n) {
  const auto rows = static_cast<std::size_t>(data_.rows());
  if (n_ < 2 || rows < n_ + 2) {
    throw DataError("each group needs at least 2 rows (n=" + std::to_string(n_) +
                    ", total rows=" + std::to_string(rows) + ")");
  }
  if (data_.cols() < 1) throw DataError("sample dimension must be at least 1");
  if (!data_.allFinite()) throw DataError("sample contains non-finite entries");
}

LabeledSample::LabeledSample(const RowMatrix& x, const RowMatrix& y)
    : LabeledSample(
          [&] {
            if (x.cols() != y.cols()) {
              throw DimensionError("groups have different dimensions (" +
                                   std::to_string(x.cols()) + " vs " +
                                   std::to_string(y.cols()) + ")");
            }
            RowMatrix z(x.rows() + y.rows(), x.cols());
            z << x, y;
            return z;
          }(),
          static_cast<std::size_t>(x.rows())) {}

LabeledSample LabeledSample::permuted(std::span<const std::size_t> perm) const {
  check_permutation(perm, total());
  RowMatrix out(data_.rows(), data_.cols());
  for (std::size_t i = 0; i < total(); ++i) {
    out.row(static_cast<Eigen::Index>(perm[i])) = data_.row(static_cast<Eigen::Index>(i));
  }
  return LabeledSample(std::move(out), n_);
}

}  // namespace hdtest
