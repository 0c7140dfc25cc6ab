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

#include "hdtest/datagen.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "hdtest/error.hpp"
#include "hdtest/rng.hpp"

namespace hdtest {

namespace {

using MixingKey = std::tuple<std::size_t, double, std::vector<double>>;

std::shared_ptr<const Eigen::MatrixXd> mixing_matrix(std::size_t p, double rho,
                                                     const Eigen::VectorXd& scale) {
  static std::mutex mutex;
  static std::map<MixingKey, std::shared_ptr<const Eigen::MatrixXd>> cache;
  MixingKey key{p, rho, std::vector<double>(scale.data(), scale.data() + scale.size())};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const Eigen::MatrixXd target = scale.asDiagonal() * ar_correlation(p, rho) * scale.asDiagonal();
  auto root = std::make_shared<const Eigen::MatrixXd>(spd_sqrt(target));
  std::lock_guard lock(mutex);
  return cache.emplace(std::move(key), std::move(root)).first->second;
}

RowMatrix innovations(std::size_t rows, std::size_t p, Innovation kind, CounterRng& rng) {
  RowMatrix z(rows, p);
  if (kind == Innovation::kNormal) {
    std::normal_distribution<double> normal;
    for (Eigen::Index k = 0; k < z.size(); ++k) z.data()[k] = normal(rng);
  } else {
    std::exponential_distribution<double> expo(1.0);
    for (Eigen::Index k = 0; k < z.size(); ++k) z.data()[k] = expo(rng) - 1.0;
  }
  return z;
}

double bernoulli_half(CounterRng& rng) { return static_cast<double>(rng() >> 63); }

void require(const ScenarioConfig& cfg, std::initializer_list<Scenario> allowed,
             const char* generator) {
  cfg.validate();
  for (Scenario s : allowed) {
    if (cfg.example == s) return;
  }
  throw ArgumentError(std::string(generator) + " cannot generate example " +
                      std::string(to_string(cfg.example)));
}

}  // namespace

Scenario parse_scenario(std::string_view token) {
  static const std::pair<std::string_view, Scenario> table[] = {
      {"1", Scenario::k1},     {"2i", Scenario::k2i}, {"2ii", Scenario::k2ii},
      {"2iii", Scenario::k2iii}, {"3i", Scenario::k3i}, {"3ii", Scenario::k3ii},
      {"4i", Scenario::k4i},   {"4ii", Scenario::k4ii}};
  for (const auto& [name, value] : table) {
    if (name == token) return value;
  }
  throw ArgumentError("unknown example '" + std::string(token) +
                      "' (expected 1, 2i, 2ii, 2iii, 3i, 3ii, 4i or 4ii)");
}

std::string_view to_string(Scenario s) noexcept {
  switch (s) {
    case Scenario::k1: return "1";
    case Scenario::k2i: return "2i";
    case Scenario::k2ii: return "2ii";
    case Scenario::k2iii: return "2iii";
    case Scenario::k3i: return "3i";
    case Scenario::k3ii: return "3ii";
    case Scenario::k4i: return "4i";
    case Scenario::k4ii: return "4ii";
  }
  return "?";
}

Innovation parse_innovation(std::string_view token) {
  if (token == "normal") return Innovation::kNormal;
  if (token == "exponential") return Innovation::kExponential;
  throw ArgumentError("unknown innovation '" + std::string(token) + "' (normal or exponential)");
}

std::string_view to_string(Innovation v) noexcept {
  return v == Innovation::kNormal ? "normal" : "exponential";
}

VDiag parse_vdiag(std::string_view token) {
  if (token == "ones") return VDiag::kOnes;
  if (token == "uniform") return VDiag::kUniform;
  throw ArgumentError("unknown v_diag '" + std::string(token) + "' (ones or uniform)");
}

std::string_view to_string(VDiag v) noexcept { return v == VDiag::kOnes ? "ones" : "uniform"; }

void ScenarioConfig::validate() const {
  if (p < 1) throw ArgumentError("p must be at least 1");
  if (n < 2 || m < 2) throw ArgumentError("n and m must be at least 2");
  if (!(rho > -1.0 && rho < 1.0)) throw ArgumentError("rho must lie in (-1, 1)");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ArgumentError("beta must lie in [0, 1]");
}

std::size_t ScenarioConfig::affected_coordinates() const {
  const double raw = beta * static_cast<double>(p);
  return std::min(p, static_cast<std::size_t>(std::floor(raw + 1e-9)));
}

Eigen::MatrixXd ar_correlation(std::size_t p, double rho) {
  if (!(std::abs(rho) < 1.0)) throw ArgumentError("AR correlation needs |rho| < 1");
  const auto size = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd r(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j < size; ++j) {
      r(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  return r;
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionError("spd_sqrt needs a square matrix");
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw NotPsdError("eigendecomposition failed");
  Eigen::VectorXd roots = solver.eigenvalues();
  for (Eigen::Index k = 0; k < roots.size(); ++k) {
    const double lambda = roots(k);
    if (lambda < -1e-8) {
      throw NotPsdError("matrix has eigenvalue " + std::to_string(lambda));
    }
    roots(k) = lambda > 0.0 ? std::sqrt(lambda) : 0.0;
  }
  const Eigen::MatrixXd& q = solver.eigenvectors();
  Eigen::MatrixXd out = q * roots.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::VectorXd v_sqrt_diagonal(const ScenarioConfig& cfg) {
  Eigen::VectorXd d = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(cfg.p));
  if (cfg.v_diag == VDiag::kUniform) {
    CounterRng rng(cfg.v_seed);
    for (Eigen::Index u = 0; u < d.size(); ++u) d(u) = 1.0 + 4.0 * rng.uniform01();
  }
  return d;
}

LabeledSample gen_example1(const ScenarioConfig& cfg) {
  require(cfg, {Scenario::k1}, "gen_example1");
  CounterRng rng(cfg.seed);
  const auto a = mixing_matrix(cfg.p, cfg.rho, v_sqrt_diagonal(cfg));
  const RowMatrix z1 = innovations(cfg.n, cfg.p, cfg.innovation, rng);
  const RowMatrix z2 = innovations(cfg.m, cfg.p, cfg.innovation, rng);
  return LabeledSample(RowMatrix(z1 * *a), RowMatrix(z2 * *a));
}

LabeledSample gen_example2(const ScenarioConfig& cfg) {
  require(cfg, {Scenario::k2i, Scenario::k2ii, Scenario::k2iii}, "gen_example2");
  const std::size_t k = cfg.affected_coordinates();
  double shift = 0.0;
  double scale = 1.0;
  if (cfg.example == Scenario::k2i) shift = 0.125;
  if (cfg.example == Scenario::k2ii) scale = 1.05;
  if (cfg.example == Scenario::k2iii) {
    shift = 0.1;
    scale = 1.04;
  }

  CounterRng rng(cfg.seed);
  const auto a = mixing_matrix(cfg.p, cfg.rho, v_sqrt_diagonal(cfg));
  auto a_star = a;
  if (cfg.example != Scenario::k2i) {
    Eigen::VectorXd d = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(cfg.p));
    d.head(static_cast<Eigen::Index>(k)).setConstant(scale);
    a_star = mixing_matrix(cfg.p, cfg.rho, d);
  }
  const RowMatrix z1 = innovations(cfg.n, cfg.p, cfg.innovation, rng);
  const RowMatrix z2 = innovations(cfg.m, cfg.p, cfg.innovation, rng);
  RowMatrix y = z2 * *a_star;
  y.leftCols(static_cast<Eigen::Index>(k)).array() += shift;
  return LabeledSample(RowMatrix(z1 * *a), y);
}

LabeledSample gen_example3(const ScenarioConfig& cfg) {
  require(cfg, {Scenario::k3i, Scenario::k3ii}, "gen_example3");
  const std::size_t k = cfg.affected_coordinates();
  CounterRng rng(cfg.seed);
  std::normal_distribution<double> normal;
  RowMatrix x(cfg.n, cfg.p);
  for (Eigen::Index e = 0; e < x.size(); ++e) x.data()[e] = normal(rng);
  RowMatrix y(cfg.m, cfg.p);
  const double half_width = std::sqrt(3.0);
  for (std::size_t i = 0; i < cfg.m; ++i) {
    for (std::size_t u = 0; u < cfg.p; ++u) {
      double v;
      if (u >= k) {
        v = normal(rng);
      } else if (cfg.example == Scenario::k3i) {
        v = bernoulli_half(rng) == 1.0 ? 1.0 : -1.0;
      } else {
        v = -half_width + 2.0 * half_width * rng.uniform01();
      }
      y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(u)) = v;
    }
  }
  return LabeledSample(x, y);
}

LabeledSample gen_example4(const ScenarioConfig& cfg) {
  require(cfg, {Scenario::k4i, Scenario::k4ii}, "gen_example4");
  const std::size_t width = cfg.example == Scenario::k4i ? 2 : 3;
  const std::size_t blocks = cfg.affected_coordinates() / width;
  CounterRng rng(cfg.seed);
  RowMatrix x(cfg.n, cfg.p);
  for (Eigen::Index e = 0; e < x.size(); ++e) x.data()[e] = bernoulli_half(rng);
  RowMatrix y(cfg.m, cfg.p);
  for (std::size_t i = 0; i < cfg.m; ++i) {
    double* row = y.data() + i * cfg.p;
    for (std::size_t b = 0; b < blocks; ++b) {
      double* cell = row + b * width;
      if (width == 2) {
        cell[0] = bernoulli_half(rng);
        cell[1] = cell[0] == 1.0 ? 1.0 : 0.0;
      } else {
        cell[0] = bernoulli_half(rng);
        cell[1] = bernoulli_half(rng);
        cell[2] = cell[0] == cell[1] ? 1.0 : 0.0;
      }
    }
    for (std::size_t u = blocks * width; u < cfg.p; ++u) row[u] = bernoulli_half(rng);
  }
  return LabeledSample(x, y);
}

LabeledSample generate(const ScenarioConfig& cfg) {
  switch (cfg.example) {
    case Scenario::k1:
      return gen_example1(cfg);
    case Scenario::k2i:
    case Scenario::k2ii:
    case Scenario::k2iii:
      return gen_example2(cfg);
    case Scenario::k3i:
    case Scenario::k3ii:
      return gen_example3(cfg);
    case Scenario::k4i:
    case Scenario::k4ii:
      return gen_example4(cfg);
  }
  throw ArgumentError("unknown example");
}

}  // namespace hdtest
