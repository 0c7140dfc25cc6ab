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

// Seeded generators for the simulation designs.
//
//   1      X = A Z1, Y = A Z2 with A = (V^1/2 R V^1/2)^1/2 and R_ij = rho^|i-j|
//   2i     as 1, Y shifted by 0.125 on the first floor(beta p) coordinates
//   2ii    Y = A* Z2, A* built from V*^1/2 = 1.05 on the first floor(beta p)
//          diagonal entries and 1 elsewhere
//   2iii   shift 0.1 and V*^1/2 = 1.04 on the first floor(beta p) coordinates
//   3i     X iid N(0,1); Y Rademacher on the first floor(beta p) coordinates
//   3ii    as 3i with Uniform(-sqrt 3, sqrt 3) instead of Rademacher
//   4i     X iid Bernoulli(1/2); Y holds floor(floor(beta p)/2) blocks
//          (b, 1{b=1}), the rest iid Bernoulli(1/2)
//   4ii    as 4i with floor(floor(beta p)/3) blocks (b, b', 1{b=b'})
//
// Innovations are N(0,1) or Exponential(1) - 1. A mixing matrix only depends
// on (p, rho, diagonal scaling) and is cached across calls.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "hdtest/sample.hpp"

namespace hdtest {

enum class Scenario { k1, k2i, k2ii, k2iii, k3i, k3ii, k4i, k4ii };
enum class Innovation { kNormal, kExponential };
enum class VDiag { kOnes, kUniform };

Scenario parse_scenario(std::string_view token);
std::string_view to_string(Scenario s) noexcept;
Innovation parse_innovation(std::string_view token);
std::string_view to_string(Innovation v) noexcept;
VDiag parse_vdiag(std::string_view token);
std::string_view to_string(VDiag v) noexcept;

// Seed for the Uniform(1, 5) draws of V^1/2. It is part of the design, not
// of a replication, so every replication shares one V.
inline constexpr std::uint64_t kDefaultVSeed = 0x5eedf00dULL;

struct ScenarioConfig {
  Scenario example = Scenario::k1;
  std::size_t p = 100;
  std::size_t n = 50;
  std::size_t m = 50;
  double rho = 0.5;
  double beta = 0.0;
  Innovation innovation = Innovation::kNormal;
  VDiag v_diag = VDiag::kOnes;
  std::uint64_t seed = 0;
  std::uint64_t v_seed = kDefaultVSeed;

  // Throws ArgumentError for out-of-range fields.
  void validate() const;

  // floor(beta * p), guarded against beta * p landing just below an integer.
  std::size_t affected_coordinates() const;
};

Eigen::MatrixXd ar_correlation(std::size_t p, double rho);

// Symmetric square root through a full eigendecomposition. Eigenvalues in
// [-1e-8, 0) are treated as 0; anything more negative throws NotPsdError.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m);

// Diagonal of V^1/2 for a configuration: ones, or Uniform(1, 5) from v_seed.
Eigen::VectorXd v_sqrt_diagonal(const ScenarioConfig& cfg);

LabeledSample gen_example1(const ScenarioConfig& cfg);
LabeledSample gen_example2(const ScenarioConfig& cfg);
LabeledSample gen_example3(const ScenarioConfig& cfg);
LabeledSample gen_example4(const ScenarioConfig& cfg);

// Dispatches on cfg.example.
LabeledSample generate(const ScenarioConfig& cfg);

}  // namespace hdtest
