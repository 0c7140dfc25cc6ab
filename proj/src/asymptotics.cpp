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

#include "hdtest/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hdtest/error.hpp"
#include "hdtest/parallel.hpp"
#include "hdtest/rng.hpp"

namespace hdtest {

namespace {

void check_sizes(std::size_t n, std::size_t m, std::size_t w) {
  if (n < 2 || m < 2) throw ArgumentError("group sizes must be at least 2");
  if (w > std::min(n, m)) {
    throw ArgumentError("w=" + std::to_string(w) + " outside 0..min(n, m)");
  }
}

void check_phi_domain(double e) {
  if (!(e >= 0.0) || !std::isfinite(e)) {
    throw DomainError("limiting mean outside the domain of phi: " + std::to_string(e));
  }
}

// v * phi'(e)^2, skipping the derivative when the variance is zero.
double weighted_variance(double v, double e, const KernelSpec& spec) {
  if (v == 0.0) return 0.0;
  const double g = phi_prime(spec, e);
  return v * g * g;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

void MomentConstants::validate() const {
  for (double v : {v_x, v_y, v_xy}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ArgumentError("moment variances must be finite and non-negative");
    }
  }
  for (double e : {e_x, e_y, e_xy}) {
    if (!std::isfinite(e)) throw ArgumentError("moment means must be finite");
  }
}

HypergeometricLaw::HypergeometricLaw(std::size_t n, std::size_t m) : n_(n), m_(m) {
  if (n == 0 || m == 0) throw ArgumentError("hypergeometric law needs n, m >= 1");
}

Rational HypergeometricLaw::pmf(std::size_t w) const {
  if (w > max_w()) return Rational(0);
  return Rational(binomial(m_, w) * binomial(n_, n_ - w), binomial(n_ + m_, n_));
}

double HypergeometricLaw::pmf_double(std::size_t w) const {
  return static_cast<double>(pmf(w));
}

Rational hypergeom_pmf(const HypergeometricLaw& law, std::size_t w) { return law.pmf(w); }

double f_w(std::size_t n, std::size_t m, std::size_t w) {
  check_sizes(n, m, w);
  const auto nd = static_cast<double>(n);
  const auto md = static_cast<double>(m);
  const auto wd = static_cast<double>(w);
  const double linear = (2.0 * md - 1.0) / (md * (md - 1.0)) + (2.0 * nd - 1.0) / (nd * (nd - 1.0));
  const double quadratic = 2.0 / (md * nd) + 1.0 / (nd * (nd - 1.0)) + 1.0 / (md * (md - 1.0));
  return 1.0 - linear * wd + quadratic * wd * wd;
}

Rational f_w_exact(std::size_t n, std::size_t m, std::size_t w) {
  check_sizes(n, m, w);
  const Rational nr(n), mr(m), wr(w);
  const Rational linear = (2 * mr - 1) / (mr * (mr - 1)) + (2 * nr - 1) / (nr * (nr - 1));
  const Rational quadratic = Rational(2) / (mr * nr) + 1 / (nr * (nr - 1)) + 1 / (mr * (mr - 1));
  return 1 - linear * wr + quadratic * wr * wr;
}

double mu_nw(std::size_t n, std::size_t m, std::size_t w, const MomentConstants& c,
             const KernelSpec& spec) {
  c.validate();
  check_phi_domain(c.e_x);
  check_phi_domain(c.e_y);
  check_phi_domain(c.e_xy);
  const double gap = 2.0 * spec.phi(c.e_xy) - spec.phi(c.e_x) - spec.phi(c.e_y);
  return gap * f_w(n, m, w);
}

double sigma2_nw(std::size_t n, std::size_t m, std::size_t w, const MomentConstants& c,
                 const KernelSpec& spec) {
  check_sizes(n, m, w);
  c.validate();
  const double a_xy = weighted_variance(c.v_xy, c.e_xy, spec);
  const double a_x = weighted_variance(c.v_x, c.e_x, spec);
  const double a_y = weighted_variance(c.v_y, c.e_y, spec);

  const auto nd = static_cast<double>(n);
  const auto md = static_cast<double>(m);
  const auto wd = static_cast<double>(w);
  const double nm2 = nd * nd * md * md;
  const double nn1 = nd * nd * (nd - 1.0) * (nd - 1.0);
  const double mm1 = md * md * (md - 1.0) * (md - 1.0);

  const double coef_xy = 4.0 / (nd * md) -
                         4.0 * ((nd + md) / nm2 - nd / nn1 - md / mm1) * wd +
                         4.0 * (2.0 / nm2 - 1.0 / nn1 - 1.0 / mm1) * wd * wd;
  const double coef_x = 2.0 / (nd * (nd - 1.0)) +
                        2.0 * (2.0 * nd / nm2 - (2.0 * nd - 1.0) / nn1 - 1.0 / mm1) * wd -
                        2.0 * (2.0 / nm2 - 1.0 / nn1 - 1.0 / mm1) * wd * wd;
  const double coef_y = 2.0 / (md * (md - 1.0)) +
                        2.0 * (2.0 * md / nm2 - 1.0 / nn1 - (2.0 * md - 1.0) / mm1) * wd -
                        2.0 * (2.0 / nm2 - 1.0 / mm1 - 1.0 / nn1) * wd * wd;

  const double out = coef_xy * a_xy + coef_x * a_x + coef_y * a_y;
  const double scale = std::abs(coef_xy * a_xy) + std::abs(coef_x * a_x) + std::abs(coef_y * a_y);
  if (out < 0.0) {
    // Each coefficient is a positive combination of pair counts, so only
    // rounding can push the sum below zero.
    if (out < -1e-12 * scale) {
      throw InternalError("sigma2_nw evaluated to a negative variance");
    }
    return 0.0;
  }
  return out;
}

double sigma2_hdmss(double rho, const MomentConstants& c, const KernelSpec& spec) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ArgumentError("rho must be positive, got " + std::to_string(rho));
  }
  c.validate();
  return 4.0 * weighted_variance(c.v_xy, c.e_xy, spec) +
         2.0 * rho * weighted_variance(c.v_x, c.e_x, spec) +
         (2.0 / rho) * weighted_variance(c.v_y, c.e_y, spec);
}

double mixture_normal_cdf(double a, std::size_t n, std::size_t m, const MomentConstants& c,
                          const KernelSpec& spec) {
  const HypergeometricLaw law(n, m);
  double total = 0.0;
  for (std::size_t w = 0; w <= law.max_w(); ++w) {
    const double s2 = sigma2_nw(n, m, w, c, spec);
    double component;
    if (s2 == 0.0) {
      component = a >= 0.0 ? 1.0 : 0.0;
    } else {
      component = normal_cdf(a / std::sqrt(s2));
    }
    total += law.pmf_double(w) * component;
  }
  return total;
}

KernelMatrix gaussian_process_matrix(const GaussianProcessSpec& gp, std::uint64_t seed) {
  if (gp.n < 2 || gp.m < 2) throw ArgumentError("group sizes must be at least 2");
  for (double v : {gp.v_xy, gp.v_x, gp.v_y}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ArgumentError("process variances must be finite and non-negative");
    }
  }
  const double sd_xy = std::sqrt(gp.v_xy);
  const double sd_x = std::sqrt(gp.v_x);
  const double sd_y = std::sqrt(gp.v_y);
  const std::size_t total = gp.n + gp.m;
  std::vector<double> lower(total * (total - 1) / 2);
  CounterRng rng(seed);
  std::normal_distribution<double> normal;
  std::size_t k = 0;
  for (std::size_t i = 1; i < total; ++i) {
    for (std::size_t j = 0; j < i; ++j, ++k) {
      const double z = normal(rng);
      if (i < gp.n) {
        lower[k] = -sd_x * z;
      } else if (j >= gp.n) {
        lower[k] = -sd_y * z;
      } else {
        lower[k] = sd_xy * z;
      }
    }
  }
  return KernelMatrix(gp.n, gp.m, std::move(lower));
}

PowerLimitEstimate power_limit_mc(const GaussianProcessSpec& gp, double alpha,
                                  const PermutationPlan& plan, std::size_t draws, int jobs) {
  if (draws < 1000) throw ArgumentError("power_limit_mc needs at least 1000 draws");
  std::vector<std::uint8_t> rejected(draws, 0);
  parallel_for(draws, resolve_jobs(jobs), [&](std::size_t d) {
    const KernelMatrix km = gaussian_process_matrix(gp, derive_seed(plan.seed, {d, 0}));
    PermutationPlan draw_plan = plan;
    draw_plan.seed = derive_seed(plan.seed, {d, 1});
    const auto dist = randomization_distribution(km, draw_plan);
    rejected[d] = ed_statistic(km) > critical_value(dist, alpha) ? 1 : 0;
  });
  std::size_t hits = 0;
  for (auto r : rejected) hits += r;
  const double rate = static_cast<double>(hits) / static_cast<double>(draws);
  return {rate, std::sqrt(rate * (1.0 - rate) / static_cast<double>(draws)), draws};
}

}  // namespace hdtest
