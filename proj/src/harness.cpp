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

#include "hdtest/harness.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "hdtest/error.hpp"
#include "hdtest/parallel.hpp"
#include "hdtest/permutation.hpp"
#include "hdtest/rng.hpp"
#include "hdtest/statistic.hpp"

namespace hdtest {
namespace {

using nlohmann::json;

template <typename T, typename Get>
std::vector<T> scalar_or_array(const json& obj, const char* key, T fallback, Get get) {
  if (!obj.contains(key)) return {fallback};
  const json& v = obj.at(key);
  std::vector<T> out;
  if (v.is_array()) {
    if (v.empty()) throw ParseError(std::string("\"") + key + "\" must not be an empty array");
    for (const json& e : v) out.push_back(get(e));
  } else {
    out.push_back(get(v));
  }
  return out;
}

std::size_t get_size(const json& v) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ParseError("expected a non-negative integer, got " + v.dump());
  return v.get<std::size_t>();
}

double get_double(const json& v) {
  if (!v.is_number()) throw ParseError("expected a number, got " + v.dump());
  return v.get<double>();
}

std::string get_string(const json& v) {
  if (!v.is_string()) throw ParseError("expected a string, got " + v.dump());
  return v.get<std::string>();
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ParseError("unknown key \"" + key + "\" in " + where);
  }
}

std::vector<ScenarioConfig> expand_scenario(const json& s, std::size_t index) {
  const std::string where = "scenarios[" + std::to_string(index) + "]";
  if (!s.is_object()) throw ParseError(where + " must be an object");
  reject_unknown_keys(s, {"example", "p", "n", "m", "rho", "beta", "innovation", "v_diag", "v_seed"},
                      where);
  if (!s.contains("example")) throw ParseError(where + " is missing \"example\"");

  ScenarioConfig base;
  base.example = parse_scenario(get_string(s.at("example")));
  if (s.contains("innovation")) base.innovation = parse_innovation(get_string(s.at("innovation")));
  if (s.contains("v_diag")) base.v_diag = parse_vdiag(get_string(s.at("v_diag")));
  if (s.contains("v_seed")) {
    if (!s.at("v_seed").is_number_unsigned()) throw ParseError(where + ".v_seed must be unsigned");
    base.v_seed = s.at("v_seed").get<std::uint64_t>();
  }
  const auto ps = scalar_or_array<std::size_t>(s, "p", base.p, get_size);
  const auto ns = scalar_or_array<std::size_t>(s, "n", base.n, get_size);
  const auto ms = scalar_or_array<std::size_t>(s, "m", base.m, get_size);
  const auto rhos = scalar_or_array<double>(s, "rho", base.rho, get_double);
  const auto betas = scalar_or_array<double>(s, "beta", base.beta, get_double);

  std::vector<ScenarioConfig> out;
  for (auto p : ps)
    for (auto n : ns)
      for (auto m : ms)
        for (auto rho : rhos)
          for (auto beta : betas) {
            ScenarioConfig c = base;
            c.p = p;
            c.n = n;
            c.m = m;
            c.rho = rho;
            c.beta = beta;
            out.push_back(c);
          }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<KernelSpec> kernel_specs(const StudyConfig& cfg) {
  std::vector<KernelSpec> specs;
  for (auto f : cfg.kernels) specs.emplace_back(f, cfg.gamma);
  return specs;
}

// Rejection decisions of every kernel on one sample, sharing the psi-bar
// matrices between kernels.
void test_all_kernels(const LabeledSample& sample, const std::vector<KernelSpec>& specs,
                      double alpha, const PermutationPlan& plan, std::uint8_t* out) {
  std::optional<std::vector<double>> psi_sq, psi_abs;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const KernelSpec& spec = specs[k];
    auto& cache = spec.psi_kind() == PsiKind::kSquared ? psi_sq : psi_abs;
    if (!cache) cache = build_psi_matrix(sample, spec.psi_kind());
    const KernelMatrix km = kernel_matrix_from_psi(sample, *cache, spec);
    out[k] = permutation_test(km, alpha, plan).reject ? 1 : 0;
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void fill_rate(PowerRow& row) {
  const double r = static_cast<double>(row.rejections) / static_cast<double>(row.replications);
  row.rejection_rate = r;
  row.mc_standard_error = std::sqrt(r * (1.0 - r) / static_cast<double>(row.replications));
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Calls fn(line_number, line) for every non-blank line.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = text.substr(start, end - start);
    if (!trim(line).empty()) fn(line_no, line);
    start = end + 1;
  }
}

}  // namespace

void StudyConfig::validate() const {
  if (grid.empty()) throw ArgumentError("study has no scenarios");
  if (kernels.empty()) throw ArgumentError("study has no kernels");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (replications < 1) throw ArgumentError("replications must be >= 1");
  if (permutations < 20) throw ArgumentError("permutations must be >= 20");
  for (auto f : kernels) KernelSpec(f, gamma);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    try {
      grid[g].validate();
    } catch (const ArgumentError& e) {
      throw ArgumentError("grid cell " + std::to_string(g) + ": " + e.what());
    }
  }
}

StudyConfig StudyConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("study config must be a JSON object");
  reject_unknown_keys(doc, {"scenarios", "kernels", "gamma", "alpha", "replications",
                            "permutations", "seed", "output"},
                      "study config");
  StudyConfig cfg;
  try {
    if (!doc.contains("scenarios") || !doc.at("scenarios").is_array())
      throw ParseError("\"scenarios\" must be an array");
    const json& scenarios = doc.at("scenarios");
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      auto cells = expand_scenario(scenarios[i], i);
      cfg.grid.insert(cfg.grid.end(), cells.begin(), cells.end());
    }
    if (doc.contains("kernels")) {
      cfg.kernels.clear();
      for (auto& k : scalar_or_array<std::string>(doc, "kernels", "", get_string))
        cfg.kernels.push_back(parse_kernel_family(k));
    }
    if (doc.contains("gamma")) cfg.gamma = get_double(doc.at("gamma"));
    if (doc.contains("alpha")) cfg.alpha = get_double(doc.at("alpha"));
    if (doc.contains("replications")) cfg.replications = get_size(doc.at("replications"));
    if (doc.contains("permutations")) cfg.permutations = get_size(doc.at("permutations"));
    if (doc.contains("seed")) {
      if (!doc.at("seed").is_number_unsigned()) throw ParseError("\"seed\" must be unsigned");
      cfg.seed = doc.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("output")) cfg.output = get_string(doc.at("output"));
  } catch (const ArgumentError& e) {
    throw ParseError(e.what());
  }
  cfg.validate();
  return cfg;
}

StudyConfig StudyConfig::from_file(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return from_json(doc);
}

std::string PowerTable::to_csv(bool include_wall_time) const {
  std::string out =
      "study,scenario,p,n,m,rho,beta,innovation,v_diag,kernel,gamma,alpha,replications,"
      "permutations,rejections,rejection_rate,mc_standard_error,status";
  if (include_wall_time) out += ",wall_time";
  out += '\n';
  for (const PowerRow& r : rows) {
    const bool sim = r.study != "realdata";
    out += csv_field(r.study) + ',' + csv_field(r.scenario) + ',' + std::to_string(r.p) + ',' +
           std::to_string(r.n) + ',' + std::to_string(r.m) + ',' + (sim ? fmt(r.rho) : "") + ',' +
           (sim ? fmt(r.beta) : "") + ',' + csv_field(r.innovation) + ',' + csv_field(r.v_diag) +
           ',' + csv_field(r.kernel) + ',' + fmt(r.gamma) + ',' + fmt(r.alpha) + ',' +
           std::to_string(r.replications) + ',' + std::to_string(r.permutations) + ',' +
           std::to_string(r.rejections) + ',' + fmt(r.rejection_rate) + ',' +
           fmt(r.mc_standard_error) + ',' + csv_field(r.status);
    if (include_wall_time) out += ',' + fmt(r.wall_time);
    out += '\n';
  }
  return out;
}

void PowerTable::write_csv(const std::string& path, bool include_wall_time) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ArgumentError("cannot write " + path);
  f << to_csv(include_wall_time);
}

PowerTable run_power_study(const StudyConfig& cfg, int jobs,
                           std::span<const std::shared_ptr<const TwoSampleTest>> extra_tests) {
  cfg.validate();
  const std::vector<KernelSpec> specs = kernel_specs(cfg);
  const std::size_t cells = cfg.grid.size();
  const std::size_t reps = cfg.replications;
  const std::size_t width = specs.size() + extra_tests.size();

  std::vector<std::uint8_t> rejects(cells * reps * width, 0);
  std::vector<std::string> errors(cells * reps);
  std::vector<double> times(cells * reps, 0.0);
  // Lowest failing replication per cell. Later replications of a failed
  // cell are skipped; earlier ones have already been handed out, so the
  // reported error does not depend on scheduling.
  std::vector<std::atomic<std::size_t>> first_failure(cells);
  for (auto& f : first_failure) f.store(std::numeric_limits<std::size_t>::max());

  parallel_for(cells * reps, resolve_jobs(jobs), [&](std::size_t task) {
    const std::size_t g = task / reps;
    const std::size_t r = task % reps;
    if (r > first_failure[g].load()) return;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ScenarioConfig sc = cfg.grid[g];
      sc.seed = derive_seed(cfg.seed, {g, r, 0});
      const LabeledSample sample = generate(sc);
      const auto plan = PermutationPlan::monte_carlo(cfg.permutations, derive_seed(cfg.seed, {g, r, 1}));
      std::uint8_t* out = rejects.data() + task * width;
      test_all_kernels(sample, specs, cfg.alpha, plan, out);
      for (std::size_t e = 0; e < extra_tests.size(); ++e)
        out[specs.size() + e] =
            extra_tests[e]->reject(sample, cfg.alpha, derive_seed(cfg.seed, {g, r, 2, e})) ? 1 : 0;
    } catch (const std::exception& e) {
      errors[task] = e.what();
      std::size_t cur = first_failure[g].load();
      while (r < cur && !first_failure[g].compare_exchange_weak(cur, r)) {
      }
    }
    times[task] = seconds_since(t0);
  });

  PowerTable table;
  for (std::size_t g = 0; g < cells; ++g) {
    const ScenarioConfig& sc = cfg.grid[g];
    const std::size_t failed = first_failure[g].load();
    double wall = 0.0;
    for (std::size_t r = 0; r < reps; ++r) wall += times[g * reps + r];
    for (std::size_t k = 0; k < width; ++k) {
      PowerRow row;
      row.study = "simulation";
      row.scenario = std::string(to_string(sc.example));
      row.p = sc.p;
      row.n = sc.n;
      row.m = sc.m;
      row.rho = sc.rho;
      row.beta = sc.beta;
      row.innovation = std::string(to_string(sc.innovation));
      row.v_diag = std::string(to_string(sc.v_diag));
      row.kernel = k < specs.size() ? std::string(to_string(specs[k].family()))
                                    : extra_tests[k - specs.size()]->name();
      row.gamma = cfg.gamma;
      row.alpha = cfg.alpha;
      row.replications = reps;
      row.permutations = cfg.permutations;
      row.wall_time = wall;
      if (failed < reps) {
        row.status = "error: replication " + std::to_string(failed) + ": " +
                     errors[g * reps + failed];
      } else {
        for (std::size_t r = 0; r < reps; ++r) row.rejections += rejects[(g * reps + r) * width + k];
        fill_rate(row);
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

const RowMatrix& RealDataset::rows_of(std::string_view label) const {
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels[k] == label) return classes[k];
  throw ParseError("unknown class label \"" + std::string(label) + "\"");
}

DelimitedFormat parse_delimited_format(std::string_view token) {
  if (token == "csv") return DelimitedFormat::kCsv;
  if (token == "ucr-tsv" || token == "tsv") return DelimitedFormat::kUcrTsv;
  throw ArgumentError("unknown data format \"" + std::string(token) + "\" (csv, ucr-tsv)");
}

RealDataset parse_delimited(std::string_view text, DelimitedFormat format) {
  const char delim = format == DelimitedFormat::kCsv ? ',' : '\t';
  RealDataset ds;
  std::vector<std::vector<std::vector<double>>> rows;
  std::map<std::string, std::size_t, std::less<>> index;
  bool have_p = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split(line, delim);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() < 2) throw ParseError(where + "expected a label and at least one value");
    const std::string label(trim(fields[0]));
    if (label.empty()) throw ParseError(where + "empty class label");
    if (!have_p) {
      ds.p = fields.size() - 1;
      have_p = true;
    } else if (fields.size() - 1 != ds.p) {
      throw ParseError(where + "expected " + std::to_string(ds.p) + " values, found " +
                       std::to_string(fields.size() - 1));
    }
    std::vector<double> values(ds.p);
    for (std::size_t j = 0; j < ds.p; ++j) {
      const auto v = parse_number(fields[j + 1]);
      if (!v || !std::isfinite(*v))
        throw ParseError(where + "field " + std::to_string(j + 2) + " is not a finite number: \"" +
                         std::string(trim(fields[j + 1])) + "\"");
      values[j] = *v;
    }
    auto it = index.find(label);
    if (it == index.end()) {
      it = index.emplace(label, ds.labels.size()).first;
      ds.labels.push_back(label);
      rows.emplace_back();
    }
    rows[it->second].push_back(std::move(values));
  });
  if (!have_p) throw ParseError("no data rows");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    RowMatrix mat(static_cast<Eigen::Index>(rows[k].size()), static_cast<Eigen::Index>(ds.p));
    for (std::size_t i = 0; i < rows[k].size(); ++i)
      for (std::size_t j = 0; j < ds.p; ++j)
        mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[k][i][j];
    ds.classes.push_back(std::move(mat));
  }
  return ds;
}

RealDataset load_delimited(const std::string& path, DelimitedFormat format) {
  const std::string text = read_file(path);
  try {
    return parse_delimited(text, format);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

RowMatrix parse_matrix_csv(std::string_view text) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (trim(line).front() == '#') return;
    const auto fields = split(line, ',');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (rows == 0) {
      cols = fields.size();
    } else if (fields.size() != cols) {
      throw ParseError(where + "expected " + std::to_string(cols) + " values, found " +
                       std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const auto v = parse_number(fields[j]);
      if (!v || !std::isfinite(*v))
        throw ParseError(where + "field " + std::to_string(j + 1) + " is not a finite number: \"" +
                         std::string(trim(fields[j])) + "\"");
      values.push_back(*v);
    }
    ++rows;
  });
  if (rows == 0) throw ParseError("no data rows");
  RowMatrix mat(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), mat.data());
  return mat;
}

RowMatrix load_matrix_csv(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_matrix_csv(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

PowerTable run_realdata_study(const RealDataset& dataset, const RealDataStudy& study,
                              const StudyConfig& cfg, int jobs) {
  if (dataset.labels.empty()) throw ArgumentError("dataset has no classes");
  if (study.sizes.empty()) throw ArgumentError("no subsample sizes given");
  if (cfg.kernels.empty()) throw ArgumentError("study has no kernels");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (cfg.replications < 1) throw ArgumentError("replications must be >= 1");
  if (cfg.permutations < 20) throw ArgumentError("permutations must be >= 20");

  const std::string a = study.class_a.empty() ? dataset.labels[0] : study.class_a;
  std::string b = study.class_b;
  if (b.empty()) {
    if (dataset.labels.size() < 2)
      throw ArgumentError("dataset has a single class; name it twice for a null control");
    b = dataset.labels[a == dataset.labels[0] ? 1 : 0];
  }
  const RowMatrix& rows_a = dataset.rows_of(a);
  const RowMatrix& rows_b = dataset.rows_of(b);
  const bool same = a == b;
  for (auto size : study.sizes) {
    if (size < 2) throw ArgumentError("subsample size must be >= 2");
    const auto na = static_cast<std::size_t>(rows_a.rows());
    const auto nb = static_cast<std::size_t>(rows_b.rows());
    if (same ? 2 * size > na : (size > na || size > nb))
      throw ArgumentError("subsample size " + std::to_string(size) +
                          " exceeds the rows available in class \"" + (size > na ? a : b) + "\"");
  }

  const std::vector<KernelSpec> specs = kernel_specs(cfg);
  const std::size_t cells = study.sizes.size();
  const std::size_t reps = cfg.replications;
  const std::size_t width = specs.size();
  std::vector<std::uint8_t> rejects(cells * reps * width, 0);
  std::vector<double> times(cells * reps, 0.0);

  // First `take` entries of a partial Fisher-Yates shuffle of 0..count-1.
  auto draw = [](std::size_t count, std::size_t take, CounterRng& rng) {
    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) idx[i] = i;
    for (std::size_t i = 0; i < take; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(count - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    return idx;
  };

  parallel_for(cells * reps, resolve_jobs(jobs), [&](std::size_t task) {
    const std::size_t s = task / reps;
    const std::size_t r = task % reps;
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t size = study.sizes[s];
    CounterRng rng(derive_seed(cfg.seed, {s, r, 0}));
    RowMatrix data(static_cast<Eigen::Index>(2 * size), static_cast<Eigen::Index>(dataset.p));
    if (same) {
      const auto idx = draw(static_cast<std::size_t>(rows_a.rows()), 2 * size, rng);
      for (std::size_t i = 0; i < 2 * size; ++i)
        data.row(static_cast<Eigen::Index>(i)) = rows_a.row(static_cast<Eigen::Index>(idx[i]));
    } else {
      const auto ia = draw(static_cast<std::size_t>(rows_a.rows()), size, rng);
      const auto ib = draw(static_cast<std::size_t>(rows_b.rows()), size, rng);
      for (std::size_t i = 0; i < size; ++i) {
        data.row(static_cast<Eigen::Index>(i)) = rows_a.row(static_cast<Eigen::Index>(ia[i]));
        data.row(static_cast<Eigen::Index>(size + i)) = rows_b.row(static_cast<Eigen::Index>(ib[i]));
      }
    }
    const LabeledSample sample(std::move(data), size);
    const auto plan = PermutationPlan::monte_carlo(cfg.permutations, derive_seed(cfg.seed, {s, r, 1}));
    test_all_kernels(sample, specs, cfg.alpha, plan, rejects.data() + task * width);
    times[task] = seconds_since(t0);
  });

  PowerTable table;
  for (std::size_t s = 0; s < cells; ++s) {
    double wall = 0.0;
    for (std::size_t r = 0; r < reps; ++r) wall += times[s * reps + r];
    for (std::size_t k = 0; k < width; ++k) {
      PowerRow row;
      row.study = "realdata";
      row.scenario = a + "-vs-" + b;
      row.p = dataset.p;
      row.n = row.m = study.sizes[s];
      row.kernel = std::string(to_string(specs[k].family()));
      row.gamma = cfg.gamma;
      row.alpha = cfg.alpha;
      row.replications = reps;
      row.permutations = cfg.permutations;
      row.wall_time = wall;
      for (std::size_t r = 0; r < reps; ++r) row.rejections += rejects[(s * reps + r) * width + k];
      fill_rate(row);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace hdtest
