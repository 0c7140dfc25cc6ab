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

// Monte Carlo size/power studies and real-data subsampling studies.
//
// A study is a grid of scenarios times a list of kernels. Replication r of
// grid cell g draws its data from derive_seed(seed, {g, r, 0}) and its
// permutations from derive_seed(seed, {g, r, 1}), so every number in the
// output table is independent of the worker count and of scheduling.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hdtest/datagen.hpp"
#include "hdtest/kernels.hpp"
#include "hdtest/sample.hpp"

namespace hdtest {

// Hook for tests that are not interpoint-distance permutation tests.
// Implementations must be deterministic given (sample, alpha, seed).
class TwoSampleTest {
 public:
  virtual ~TwoSampleTest() = default;
  virtual std::string name() const = 0;
  virtual bool reject(const LabeledSample& sample, double alpha, std::uint64_t seed) const = 0;
};

struct StudyConfig {
  std::vector<ScenarioConfig> grid;
  std::vector<KernelFamily> kernels = {KernelFamily::kL2, KernelFamily::kGaussian,
                                       KernelFamily::kLaplacian, KernelFamily::kL1};
  double gamma = 1.0;
  double alpha = 0.05;
  std::size_t replications = 1000;
  std::size_t permutations = 300;
  std::uint64_t seed = 0;
  std::string output;

  // Throws ArgumentError; checks every grid cell before anything runs.
  void validate() const;

  // Schema (scalars or arrays for p, n, m, rho, beta; arrays expand as a
  // cartesian product, beta varying fastest):
  //   {"scenarios": [{"example": "3i", "p": 500, "n": 70, "m": 30,
  //                   "rho": 0.5, "beta": [0, 0.5, 1],
  //                   "innovation": "normal", "v_diag": "ones"}],
  //    "kernels": ["l2", "gaussian", "laplacian", "l1"], "gamma": 1.0,
  //    "alpha": 0.05, "replications": 1000, "permutations": 300,
  //    "seed": 1, "output": "table.csv"}
  static StudyConfig from_json(const nlohmann::json& doc);
  static StudyConfig from_file(const std::string& path);
};

struct PowerRow {
  std::string study;     // "simulation" or "realdata"
  std::string scenario;  // example id, or "<class a>-vs-<class b>"
  std::size_t p = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  double rho = 0.0;
  double beta = 0.0;
  std::string innovation;
  std::string v_diag;
  std::string kernel;
  double gamma = 1.0;
  double alpha = 0.05;
  std::size_t replications = 0;
  std::size_t permutations = 0;
  std::size_t rejections = 0;
  double rejection_rate = 0.0;
  double mc_standard_error = 0.0;
  double wall_time = 0.0;  // seconds summed over replications
  std::string status = "ok";
};

struct PowerTable {
  std::vector<PowerRow> rows;

  // Long-form CSV with a header. Wall time varies between runs, so it is
  // only written when asked for.
  std::string to_csv(bool include_wall_time = false) const;
  void write_csv(const std::string& path, bool include_wall_time = false) const;
};

PowerTable run_power_study(const StudyConfig& cfg, int jobs = 0,
                           std::span<const std::shared_ptr<const TwoSampleTest>> extra_tests = {});

// Class-labelled rows, all of the same length.
struct RealDataset {
  std::vector<std::string> labels;   // order of first appearance
  std::vector<RowMatrix> classes;    // classes[k] holds the rows of labels[k]
  std::size_t p = 0;

  // Throws ParseError for a label that is not in the file.
  const RowMatrix& rows_of(std::string_view label) const;
};

enum class DelimitedFormat { kCsv, kUcrTsv };

DelimitedFormat parse_delimited_format(std::string_view token);

// One row per line, class label in the first field, series values after it;
// tab-separated for kUcrTsv and comma-separated for kCsv. Throws ParseError
// (with the line number) for ragged rows, non-numeric values or empty input.
// Classes may be small here; a study checks its sizes against them.
RealDataset load_delimited(const std::string& path, DelimitedFormat format);
RealDataset parse_delimited(std::string_view text, DelimitedFormat format);

// Unlabelled numeric CSV (lines starting with '#' are skipped).
RowMatrix load_matrix_csv(const std::string& path);
RowMatrix parse_matrix_csv(std::string_view text);

struct RealDataStudy {
  std::vector<std::size_t> sizes = {10, 20, 30, 40, 50, 60};
  std::string class_a;  // empty: first label in the file
  std::string class_b;  // empty: second label; equal to class_a for a null control
};

// For each size, repeatedly draws `size` rows per class without replacement
// and records the rejection fraction. When both classes are the same, the
// two groups are disjoint draws from that class. Uses cfg.kernels, gamma,
// alpha, replications, permutations and seed; cfg.grid is ignored.
PowerTable run_realdata_study(const RealDataset& dataset, const RealDataStudy& study,
                              const StudyConfig& cfg, int jobs = 0);

}  // namespace hdtest
