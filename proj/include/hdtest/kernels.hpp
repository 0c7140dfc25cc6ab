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

// Interpoint dissimilarities of the form k(x, y) = phi((1/p) sum_u psi(x_u, y_u)).
//
//   family     psi(a, b)    phi(t)
//   L2         (a - b)^2    sqrt(t)                  energy distance
//   Gaussian   (a - b)^2    -exp(-t / (2 gamma^2))   MMD, negated
//   Laplacian  (a - b)^2    -exp(-sqrt(t) / gamma)   MMD, negated
//   L1         |a - b|      t                        sum of marginal energy distances
//
// The two MMD kernels are stored negated so that phi is increasing for every
// family and a larger statistic always means a larger discrepancy.

#pragma once

#include <span>
#include <string>
#include <string_view>

namespace hdtest {

enum class KernelFamily { kL2, kL1, kGaussian, kLaplacian };

enum class PsiKind { kSquared, kAbsolute };

class KernelSpec {
 public:
  // Throws ArgumentError for a non-positive or non-finite bandwidth on the
  // Gaussian and Laplacian families.
  explicit KernelSpec(KernelFamily family, double bandwidth = 1.0);

  KernelFamily family() const noexcept { return family_; }
  double bandwidth() const noexcept { return bandwidth_; }
  PsiKind psi_kind() const noexcept {
    return family_ == KernelFamily::kL1 ? PsiKind::kAbsolute : PsiKind::kSquared;
  }

  // phi(t) for t >= 0.
  double phi(double t) const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

 private:
  KernelFamily family_;
  double bandwidth_;
};

// Parses the CLI tokens "l2", "l1", "gaussian", "laplacian".
KernelFamily parse_kernel_family(std::string_view token);
std::string_view to_string(KernelFamily family) noexcept;

// (1/p) sum_u psi(x_u, y_u).
double psi_bar(std::span<const double> x, std::span<const double> y, PsiKind kind);
double psi_bar(std::span<const double> x, std::span<const double> y, const KernelSpec& spec);

double kernel_eval(std::span<const double> x, std::span<const double> y,
                   const KernelSpec& spec);

// d phi / dt. Throws DomainError for t < 0, and for t == 0 on the L2 and
// Laplacian families where the derivative is singular.
double phi_prime(const KernelSpec& spec, double t);

}  // namespace hdtest
