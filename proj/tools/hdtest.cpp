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

// hdtest command-line front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdtest/asymptotics.hpp"
#include "hdtest/datagen.hpp"
#include "hdtest/diagnostics.hpp"
#include "hdtest/error.hpp"
#include "hdtest/harness.hpp"
#include "hdtest/kernels.hpp"
#include "hdtest/permutation.hpp"
#include "hdtest/sample.hpp"

namespace {

using namespace hdtest;

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw ArgumentError("cannot write " + out);
  f << text;
}

LabeledSample read_sample(const std::string& path, std::size_t n) {
  RowMatrix data = load_matrix_csv(path);
  if (n == 0 || n >= static_cast<std::size_t>(data.rows()))
    throw ArgumentError("--n must be between 1 and the row count minus one");
  return LabeledSample(std::move(data), n);
}

struct Common {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 0;
  std::string out;
};

void add_common(CLI::App* app, Common& c, bool with_jobs) {
  app->add_option("--seed", c.seed, "Master seed")->each([&c](const std::string&) { c.seed_given = true; });
  if (with_jobs) app->add_option("--jobs", c.jobs, "Worker threads (default: $HDTEST_JOBS, else all cores)");
  app->add_option("--out", c.out, "Output file (default: stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpoint-distance two-sample tests for high-dimensional data"};
  app.require_subcommand(1);

  // test
  Common test_c;
  std::string test_file, test_kernel = "l2";
  double test_gamma = 1.0, test_alpha = 0.05;
  std::size_t test_perms = 300, test_n = 0;
  bool test_exact = false;
  auto* test = app.add_subcommand("test", "Permutation test on a CSV sample (rows [0, n) form group one)");
  test->add_option("file", test_file, "Numeric CSV, one observation per row")->required();
  test->add_option("--n", test_n, "Rows in the first group")->required();
  test->add_option("--kernel", test_kernel, "l2 | l1 | gaussian | laplacian");
  test->add_option("--gamma", test_gamma, "Bandwidth for gaussian/laplacian");
  test->add_option("--alpha", test_alpha, "Level");
  test->add_option("--perms", test_perms, "Monte Carlo permutations S");
  test->add_flag("--exact", test_exact, "Enumerate every permutation");
  add_common(test, test_c, false);

  // gen
  Common gen_c;
  std::string gen_config, gen_example = "1", gen_innov = "normal", gen_vdiag = "ones";
  ScenarioConfig gen_sc;
  auto* gen = app.add_subcommand("gen", "Write a simulated sample as CSV (group one first)");
  gen->add_option("--config", gen_config, "JSON scenario (same keys as a study scenario, plus seed)");
  gen->add_option("--example", gen_example, "1 2i 2ii 2iii 3i 3ii 4i 4ii");
  gen->add_option("--p", gen_sc.p);
  gen->add_option("--n", gen_sc.n);
  gen->add_option("--m", gen_sc.m);
  gen->add_option("--rho", gen_sc.rho, "AR(1) correlation");
  gen->add_option("--beta", gen_sc.beta, "Fraction of affected coordinates");
  gen->add_option("--innovation", gen_innov, "normal | exponential");
  gen->add_option("--v-diag", gen_vdiag, "ones | uniform");
  gen->add_option("--v-seed", gen_sc.v_seed, "Seed of the uniform scale design");
  add_common(gen, gen_c, false);

  // diagnose
  Common diag_c;
  std::string diag_file, diag_kernel = "l2";
  double diag_gamma = 1.0;
  std::size_t diag_n = 0;
  DiagnoseOptions diag_opts;
  auto* diag = app.add_subcommand("diagnose", "Discrepancy report and moment constants of a CSV sample");
  diag->add_option("file", diag_file)->required();
  diag->add_option("--n", diag_n, "Rows in the first group")->required();
  diag->add_option("--kernel", diag_kernel);
  diag->add_option("--gamma", diag_gamma);
  diag->add_option("--perms", diag_opts.permutations, "Relabellings for the null spread");
  diag->add_option("--alpha", diag_opts.alpha);
  add_common(diag, diag_c, false);

  // asymptotics / powerlimit
  Common asy_c;
  std::size_t asy_n = 0, asy_m = 0;
  std::string asy_kernel = "l2";
  double asy_gamma = 1.0;
  MomentConstants asy_k;
  auto* asy = app.add_subcommand("asymptotics", "Tables of f(w), mu, sigma^2 and P(W = w)");
  asy->add_option("--n", asy_n)->required();
  asy->add_option("--m", asy_m)->required();
  asy->add_option("--kernel", asy_kernel);
  asy->add_option("--gamma", asy_gamma);
  asy->add_option("--e-x", asy_k.e_x);
  asy->add_option("--e-y", asy_k.e_y);
  asy->add_option("--e-xy", asy_k.e_xy);
  asy->add_option("--v-x", asy_k.v_x);
  asy->add_option("--v-y", asy_k.v_y);
  asy->add_option("--v-xy", asy_k.v_xy);
  add_common(asy, asy_c, false);

  Common pl_c;
  GaussianProcessSpec pl_gp;
  double pl_alpha = 0.05;
  std::size_t pl_perms = 300, pl_draws = 2000;
  bool pl_exact = false;
  auto* pl = app.add_subcommand("powerlimit", "Monte Carlo power of the limiting Gaussian process test");
  pl->add_option("--n", pl_gp.n)->required();
  pl->add_option("--m", pl_gp.m)->required();
  pl->add_option("--v-x", pl_gp.v_x);
  pl->add_option("--v-y", pl_gp.v_y);
  pl->add_option("--v-xy", pl_gp.v_xy);
  pl->add_option("--alpha", pl_alpha);
  pl->add_option("--perms", pl_perms);
  pl->add_flag("--exact", pl_exact);
  pl->add_option("--draws", pl_draws);
  add_common(pl, pl_c, true);

  // power / size / realdata
  Common study_c;
  std::string study_config;
  bool study_timing = false;
  auto* power = app.add_subcommand("power", "Rejection rates over a scenario grid");
  auto* size = app.add_subcommand("size", "Rejection rates over a scenario grid with beta forced to 0");
  for (auto* sub : {power, size}) {
    sub->add_option("--config", study_config, "Study JSON")->required();
    sub->add_flag("--timing", study_timing, "Append a wall_time column");
    add_common(sub, study_c, true);
  }

  Common rd_c;
  std::string rd_file, rd_format = "ucr-tsv";
  std::vector<std::string> rd_kernels = {"l2", "gaussian", "laplacian", "l1"};
  RealDataStudy rd_study;
  StudyConfig rd_cfg;
  rd_cfg.replications = 500;
  bool rd_timing = false;
  auto* rd = app.add_subcommand("realdata", "Subsampling study on a labelled data file");
  rd->add_option("--file", rd_file)->required();
  rd->add_option("--format", rd_format, "ucr-tsv | csv (class label in the first field)");
  rd->add_option("--sizes", rd_study.sizes, "Per-class subsample sizes")->delimiter(',');
  rd->add_option("--class-a", rd_study.class_a);
  rd->add_option("--class-b", rd_study.class_b, "Same as --class-a for a null control");
  rd->add_option("--kernels", rd_kernels)->delimiter(',');
  rd->add_option("--gamma", rd_cfg.gamma);
  rd->add_option("--alpha", rd_cfg.alpha);
  rd->add_option("--reps", rd_cfg.replications);
  rd->add_option("--perms", rd_cfg.permutations);
  rd->add_flag("--timing", rd_timing);
  add_common(rd, rd_c, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*test) {
      const LabeledSample sample = read_sample(test_file, test_n);
      const KernelSpec spec(parse_kernel_family(test_kernel), test_gamma);
      PermutationPlan plan = PermutationPlan::monte_carlo(test_perms, test_c.seed);
      if (test_exact) {
        if (exact_permutation_count(sample.total(), kDefaultExactCap) == 0) {
          std::cerr << "warning: " << sample.total() << "! permutations exceed the exact cap of "
                    << kDefaultExactCap << "; using " << test_perms << " Monte Carlo permutations\n";
        } else {
          plan = PermutationPlan::exact();
        }
      }
      const TestResult r = permutation_test(sample, spec, test_alpha, plan);
      emit(num(r.statistic) + ',' + num(r.critical_value) + ',' + num(r.p_value) + ',' +
               (r.reject ? "1" : "0") + '\n',
           test_c.out);
    } else if (*gen) {
      ScenarioConfig sc = gen_sc;
      if (!gen_config.empty()) {
        std::ifstream f(gen_config);
        if (!f) throw ArgumentError("cannot open " + gen_config);
        nlohmann::json doc;
        try {
          doc = nlohmann::json::parse(f);
        } catch (const nlohmann::json::exception& e) {
          throw ParseError(gen_config + ": " + e.what());
        }
        std::uint64_t seed = gen_c.seed;
        if (doc.is_object() && doc.contains("seed")) {
          seed = doc.at("seed").get<std::uint64_t>();
          doc.erase("seed");
        }
        StudyConfig wrap = StudyConfig::from_json({{"scenarios", nlohmann::json::array({doc})}});
        if (wrap.grid.size() != 1) throw ParseError("gen takes a single scenario, not arrays");
        sc = wrap.grid[0];
        sc.seed = gen_c.seed_given ? gen_c.seed : seed;
      } else {
        sc.example = parse_scenario(gen_example);
        sc.innovation = parse_innovation(gen_innov);
        sc.v_diag = parse_vdiag(gen_vdiag);
        sc.seed = gen_c.seed;
      }
      const LabeledSample s = generate(sc);
      std::string text;
      for (std::size_t i = 0; i < s.total(); ++i) {
        const auto row = s.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) text += (j ? "," : "") + num(row[j]);
        text += '\n';
      }
      emit(text, gen_c.out);
    } else if (*diag) {
      const LabeledSample sample = read_sample(diag_file, diag_n);
      const KernelSpec spec(parse_kernel_family(diag_kernel), diag_gamma);
      diag_opts.seed = diag_c.seed;
      const DiscrepancyReport r = discrepancy_report(sample, diag_opts);
      std::string text = "quantity,value,null_quantile\n";
      text += "mean_gap," + num(r.mean_gap) + ',' + num(r.mean_gap_null) + '\n';
      text += "var_gap," + num(r.var_gap) + ',' + num(r.var_gap_null) + '\n';
      text += "marginal_ed_sum," + num(r.marginal_ed_sum) + ',' + num(r.marginal_ed_sum_null) + '\n';
      text += "cov_gap," + num(r.cov_gap) + ',' + num(r.cov_gap_null) + '\n';
      text += "regime_hint," + r.regime_hint + ",\n";
      try {
        const MomentConstants k = estimate_moment_constants(sample, spec);
        text += "e_x," + num(k.e_x) + ",\ne_y," + num(k.e_y) + ",\ne_xy," + num(k.e_xy) + ",\n";
        text += "v_x," + num(k.v_x) + ",\nv_y," + num(k.v_y) + ",\nv_xy," + num(k.v_xy) + ",\n";
      } catch (const EstimationError& e) {
        std::cerr << "warning: moment constants not estimated: " << e.what() << '\n';
      }
      emit(text, diag_c.out);
    } else if (*asy) {
      asy_k.validate();
      const KernelSpec spec(parse_kernel_family(asy_kernel), asy_gamma);
      const HypergeometricLaw law(asy_n, asy_m);
      std::string text = "w,pmf,f,mu,sigma2\n";
      for (std::size_t w = 0; w <= law.max_w(); ++w) {
        text += std::to_string(w) + ',' + num(law.pmf_double(w)) + ',' + num(f_w(asy_n, asy_m, w)) +
                ',' + num(mu_nw(asy_n, asy_m, w, asy_k, spec)) + ',' +
                num(sigma2_nw(asy_n, asy_m, w, asy_k, spec)) + '\n';
      }
      emit(text, asy_c.out);
    } else if (*pl) {
      PermutationPlan plan = pl_exact ? PermutationPlan::exact()
                                      : PermutationPlan::monte_carlo(pl_perms, pl_c.seed);
      plan.seed = pl_c.seed;
      const PowerLimitEstimate e = power_limit_mc(pl_gp, pl_alpha, plan, pl_draws, pl_c.jobs);
      emit("estimate,standard_error,draws\n" + num(e.estimate) + ',' + num(e.standard_error) + ',' +
               std::to_string(e.draws) + '\n',
           pl_c.out);
    } else if (*power || *size) {
      StudyConfig cfg = StudyConfig::from_file(study_config);
      if (study_c.seed_given) cfg.seed = study_c.seed;
      if (*size)
        for (auto& cell : cfg.grid) cell.beta = 0.0;
      const PowerTable table = run_power_study(cfg, study_c.jobs);
      emit(table.to_csv(study_timing), study_c.out.empty() ? cfg.output : study_c.out);
      for (const auto& row : table.rows)
        if (row.status != "ok") std::cerr << "cell " << row.scenario << " p=" << row.p << ": " << row.status << '\n';
    } else if (*rd) {
      const RealDataset ds = load_delimited(rd_file, parse_delimited_format(rd_format));
      rd_cfg.kernels.clear();
      for (const auto& k : rd_kernels) rd_cfg.kernels.push_back(parse_kernel_family(k));
      rd_cfg.seed = rd_c.seed;
      const PowerTable table = run_realdata_study(ds, rd_study, rd_cfg, rd_c.jobs);
      emit(table.to_csv(rd_timing), rd_c.out);
    }
  } catch (const hdtest::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
