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

#include "hdtest/kernels.hpp"

#include <cmath>
#include <string>

#include "hdtest/error.hpp"

namespace hdtest {

KernelSpec::KernelSpec(KernelFamily family, double bandwidth)
    : family_(family), bandwidth_(bandwidth) {
  const bool uses_bandwidth =
      family == KernelFamily::kGaussian || family == KernelFamily::kLaplacian;
  if (uses_bandwidth && !(std::isfinite(bandwidth) && bandwidth > 0.0)) {
    throw ArgumentError("kernel bandwidth must be positive and finite, got " +
                        std::to_string(bandwidth));
  }
}

double KernelSpec::phi(double t) const {
  switch (family_) {
    case KernelFamily::kL2:
      return std::sqrt(t);
    case KernelFamily::kL1:
      return t;
    case KernelFamily::kGaussian:
      return -std::exp(-t / (2.0 * bandwidth_ * bandwidth_));
    case KernelFamily::kLaplacian:
      return -std::exp(-std::sqrt(t) / bandwidth_);
  }
  return 0.0;
}

KernelFamily parse_kernel_family(std::string_view token) {
  if (token == "l2") return KernelFamily::kL2;
  if (token == "l1") return KernelFamily::kL1;
  if (token == "gaussian") return KernelFamily::kGaussian;
  if (token == "laplacian") return KernelFamily::kLaplacian;
  throw ArgumentError("unknown kernel '" + std::string(token) +
                      "' (expected l2, l1, gaussian or laplacian)");
}

std::string_view to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::kL2:
      return "l2";
    case KernelFamily::kL1:
      return "l1";
    case KernelFamily::kGaussian:
      return "gaussian";
    case KernelFamily::kLaplacian:
      return "laplacian";
  }
  return "?";
}

double psi_bar(std::span<const double> x, std::span<const double> y, PsiKind kind) {
  if (x.size() != y.size()) {
    throw DimensionError("psi_bar: vectors of length " + std::to_string(x.size()) +
                         " and " + std::to_string(y.size()));
  }
  if (x.empty()) throw DomainError("psi_bar: dimension must be at least 1");
  double sum = 0.0;
  if (kind == PsiKind::kSquared) {
    for (std::size_t u = 0; u < x.size(); ++u) {
      const double d = x[u] - y[u];
      sum += d * d;
    }
  } else {
    for (std::size_t u = 0; u < x.size(); ++u) sum += std::abs(x[u] - y[u]);
  }
  return sum / static_cast<double>(x.size());
}

double psi_bar(std::span<const double> x, std::span<const double> y, const KernelSpec& spec) {
  return psi_bar(x, y, spec.psi_kind());
}

double kernel_eval(std::span<const double> x, std::span<const double> y,
                   const KernelSpec& spec) {
  return spec.phi(psi_bar(x, y, spec));
}

double phi_prime(const KernelSpec& spec, double t) {
  const bool singular_at_zero =
      spec.family() == KernelFamily::kL2 || spec.family() == KernelFamily::kLaplacian;
  if (!(t >= 0.0) || (singular_at_zero && t == 0.0)) {
    throw DomainError("phi_prime: argument outside the domain of phi', got " +
                      std::to_string(t));
  }
  const double g = spec.bandwidth();
  switch (spec.family()) {
    case KernelFamily::kL2:
      return 0.5 / std::sqrt(t);
    case KernelFamily::kL1:
      return 1.0;
    case KernelFamily::kGaussian:
      return std::exp(-t / (2.0 * g * g)) / (2.0 * g * g);
    case KernelFamily::kLaplacian: {
      const double r = std::sqrt(t);
      return std::exp(-r / g) / (2.0 * g * r);
    }
  }
  return 0.0;
}

}  // namespace hdtest
