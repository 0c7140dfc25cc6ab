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

// Reference implementations used only by the tests. They deliberately avoid
// the library's code paths: kernels are evaluated from raw rows, sums are
// taken pair by pair, permutations are enumerated literally.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "hdtest/asymptotics.hpp"
#include "hdtest/kernels.hpp"
#include "hdtest/sample.hpp"

namespace oracle {

using hdtest::KernelFamily;
using hdtest::RowMatrix;

inline double phi(KernelFamily f, double gamma, double t) {
  switch (f) {
    case KernelFamily::kL2:
      return std::sqrt(t);
    case KernelFamily::kL1:
      return t;
    case KernelFamily::kGaussian:
      return -std::exp(-t / (2.0 * gamma * gamma));
    case KernelFamily::kLaplacian:
      return -std::exp(-std::sqrt(t) / gamma);
  }
  return 0.0;
}

inline double phi_prime(KernelFamily f, double gamma, double t) {
  switch (f) {
    case KernelFamily::kL2:
      return 0.5 / std::sqrt(t);
    case KernelFamily::kL1:
      return 1.0;
    case KernelFamily::kGaussian:
      return std::exp(-t / (2.0 * gamma * gamma)) / (2.0 * gamma * gamma);
    case KernelFamily::kLaplacian:
      return std::exp(-std::sqrt(t) / gamma) / (2.0 * gamma * std::sqrt(t));
  }
  return 0.0;
}

inline double kernel(KernelFamily f, double gamma, const RowMatrix& a, Eigen::Index i,
                     const RowMatrix& b, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index u = 0; u < a.cols(); ++u) {
    const double d = a(i, u) - b(j, u);
    s += f == KernelFamily::kL1 ? std::abs(d) : d * d;
  }
  return phi(f, gamma, s / static_cast<double>(a.cols()));
}

// Textbook U-statistic: 2/(nm) sum k(X,Y) - 2/(n(n-1)) sum_{i<j} k(X,X) - ...
inline double ed(const RowMatrix& x, const RowMatrix& y, KernelFamily f, double gamma = 1.0) {
  const double n = static_cast<double>(x.rows()), m = static_cast<double>(y.rows());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < y.rows(); ++j) sxy += kernel(f, gamma, x, i, y, j);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) sxx += kernel(f, gamma, x, i, x, j);
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index j = i + 1; j < y.rows(); ++j) syy += kernel(f, gamma, y, i, y, j);
  return 2.0 / (n * m) * sxy - 2.0 / (n * (n - 1)) * sxx - 2.0 / (m * (m - 1)) * syy;
}

// Calls fn(perm) for all (n+m)! permutations of 0..total-1.
template <typename Fn>
void for_each_permutation(std::size_t total, Fn&& fn) {
  std::vector<std::size_t> perm(total);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    fn(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

inline std::size_t crossings(const std::vector<std::size_t>& perm, std::size_t n) {
  std::size_t w = 0;
  for (std::size_t j = 0; j < n; ++j) w += perm[j] >= n;
  return w;
}

// Pre-collection form of the limiting mean, pair counts written out.
inline double mu(std::size_t n_, std::size_t m_, std::size_t w_, const hdtest::MomentConstants& c,
                 KernelFamily f, double gamma) {
  const double n = double(n_), m = double(m_), w = double(w_);
  const double px = phi(f, gamma, c.e_x), py = phi(f, gamma, c.e_y), pxy = phi(f, gamma, c.e_xy);
  return 2.0 / (m * n) * ((w * w + (n - w) * (m - w)) * pxy + (n - w) * w * px + (m - w) * w * py) -
         1.0 / (n * (n - 1)) * (2 * w * (n - w) * pxy + (n - w) * (n - w - 1) * px + w * (w - 1) * py) -
         1.0 / (m * (m - 1)) * (2 * w * (m - w) * pxy + w * (w - 1) * px + (m - w) * (m - w - 1) * py);
}

// Grouped form of the variance: pair counts of each type inside each block
// of the permuted weights.
inline double sigma2(std::size_t n_, std::size_t m_, std::size_t w_, const hdtest::MomentConstants& c,
                     KernelFamily f, double gamma) {
  const double n = double(n_), m = double(m_), w = double(w_);
  auto g2 = [&](double v, double e) {
    if (v == 0.0) return 0.0;
    const double g = phi_prime(f, gamma, e);
    return v * g * g;
  };
  const double a = g2(c.v_xy, c.e_xy), b = g2(c.v_x, c.e_x), cc = g2(c.v_y, c.e_y);
  return 4.0 / (n * n * (n - 1) * (n - 1)) *
             ((n - w) * (n - w - 1) / 2 * b + w * (w - 1) / 2 * cc + (n - w) * w * a) +
         4.0 / (m * m * (m - 1) * (m - 1)) *
             (w * (w - 1) / 2 * b + (m - w) * (m - w - 1) / 2 * cc + w * (m - w) * a) +
         4.0 / (n * n * m * m) * ((n - w) * w * b + w * (m - w) * cc + ((n - w) * (m - w) + w * w) * a);
}

// Two-stage simulation of the Gaussian mixture: W from a random labelling,
// then N(0, sigma2(W)).
inline double mixture_cdf_mc(double a, std::size_t n, std::size_t m, const hdtest::MomentConstants& c,
                             KernelFamily f, double gamma, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  std::vector<std::size_t> perm(n + m);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t hits = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    std::shuffle(perm.begin(), perm.end(), gen);
    const double s = std::sqrt(sigma2(n, m, crossings(perm, n), c, f, gamma));
    hits += s * z(gen) <= a;
  }
  return double(hits) / double(draws);
}

// Power of the limiting Gaussian-process test with all (n+m)! permutations
// enumerated literally.
inline double power_limit(std::size_t n, std::size_t m, double v_xy, double v_x, double v_y,
                          double alpha, std::size_t draws, std::uint64_t seed) {
  const std::size_t total = n + m;
  std::vector<std::vector<std::size_t>> perms;
  for_each_permutation(total, [&](const std::vector<std::size_t>& p) { perms.push_back(p); });
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  std::vector<double> g(total * total), values(perms.size());
  std::size_t rejections = 0;
  const double wx = -2.0 / double(n * (n - 1)), wy = -2.0 / double(m * (m - 1)), wxy = 2.0 / double(n * m);
  for (std::size_t d = 0; d < draws; ++d) {
    for (std::size_t i = 0; i < total; ++i)
      for (std::size_t j = 0; j < i; ++j) {
        double v;
        if (i < n) v = -std::sqrt(v_x) * z(gen);
        else if (j >= n) v = -std::sqrt(v_y) * z(gen);
        else v = std::sqrt(v_xy) * z(gen);
        g[i * total + j] = v;
      }
    for (std::size_t k = 0; k < perms.size(); ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < total; ++i)
        for (std::size_t j = 0; j < i; ++j) {
          const bool a = perms[k][i] < n, b = perms[k][j] < n;
          s += (a && b ? wx : (!a && !b ? wy : wxy)) * g[i * total + j];
        }
      values[k] = s;
    }
    const double v0 = values[0];  // perms[0] is the identity
    std::sort(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(std::ceil((1.0 - alpha) * double(values.size()) - 1e-9)) - 1;
    rejections += v0 > values[idx];
  }
  return double(rejections) / double(draws);
}

}  // namespace oracle
