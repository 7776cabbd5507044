// Copyright 2026 The mvpcl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mvpcl/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "mvpcl/bootstrap.hpp"
#include "mvpcl/estimator.hpp"
#include "mvpcl/experiments.hpp"
#include "mvpcl/io.hpp"
#include "mvpcl/verification.hpp"

namespace mvpcl::cli {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kIntercept = "intercept";

struct Options {
  fs::path config;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out = "-";
  std::string format = "json";
  bool timings = false;

  DataConfig data;
  std::string responses;
  std::string predictors;
  bool no_intercept = false;
  bool full_loglik = false;
  Index replicates = 250;
  SolverOptions solver;

  Index n_obs = 800;
  Index n_components = 3;
  Index n_coef = 4;
  Index reps = 500;
  double level = 0.95;
  double rho = 0.3;
  std::string n_values = "2000,10000,50000";
  std::string k_values = "4,8";
  std::string p_values = "5,9";
  json coefficients;  // simulate: P x K truth
  json correlation;   // simulate: K x K truth
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(' ');
    const auto last = item.find_last_not_of(' ');
    if (first != std::string::npos) {
      out.push_back(item.substr(first, last - first + 1));
    }
  }
  return out;
}

std::vector<Index> split_counts(const std::string& s, const char* what) {
  std::vector<Index> out;
  for (const std::string& item : split_list(s)) {
    Index v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || v < 1) {
      throw InputError(std::string(what) + ": '" + item + "' is not a positive integer");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw InputError(std::string(what) + " is empty");
  }
  return out;
}

std::vector<std::string> string_list(const json& v, const char* key) {
  if (v.is_string()) {
    return split_list(v.get<std::string>());
  }
  if (!v.is_array()) {
    throw InputError(std::string("config key '") + key + "' must be a list of names");
  }
  return v.get<std::vector<std::string>>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

// Applies config file values for every option not given on the command line.
void apply_config(const json& cfg, const fs::path& base, Options& o, const CLI::App& sub) {
  if (!cfg.is_object()) {
    throw InputError("config must be a JSON object");
  }
  auto given = [&](const std::string& flag) {
    try {
      return sub.count(flag) > 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };
  static const std::set<std::string> known = {
      "data", "x", "y", "responses", "predictors", "intercept", "shared_coef", "weights",
      "solver", "seed", "threads", "replicates", "out", "format", "full_loglik", "timings",
      "n_obs", "n_components", "n_coef", "reps", "level", "rho", "n_values", "k_values",
      "p_values", "coefficients", "correlation"};
  for (const auto& [key, value] : cfg.items()) {
    if (!known.contains(key)) {
      throw InputError("unknown config key '" + key + "'");
    }
  }
  auto take = [&](const char* key, const char* flag, auto& target) {
    if (cfg.contains(key) && !given(flag)) {
      target = cfg.at(key).get<std::remove_reference_t<decltype(target)>>();
    }
  };
  auto take_path = [&](const char* key, const char* flag, fs::path& target) {
    if (cfg.contains(key) && !given(flag)) {
      target = resolve(base, cfg.at(key).get<std::string>());
    }
  };
  take_path("data", "--data", o.data.data);
  take_path("x", "--x", o.data.x);
  take_path("y", "--y", o.data.y);
  if (cfg.contains("responses") && !given("--responses")) {
    o.data.responses = string_list(cfg.at("responses"), "responses");
  }
  if (cfg.contains("predictors") && !given("--predictors")) {
    o.data.predictors = string_list(cfg.at("predictors"), "predictors");
  }
  if (cfg.contains("intercept") && !given("--no-intercept")) {
    o.data.intercept = cfg.at("intercept").get<bool>();
  }
  if (cfg.contains("shared_coef") && !given("--shared-coef")) {
    const json& m = cfg.at("shared_coef");
    if (m.is_string()) {
      o.data.shared_coef = resolve(base, m.get<std::string>());
    } else {
      o.data.shared_inline = m;
    }
  }
  if (cfg.contains("weights")) {
    const json& w = cfg.at("weights");
    if (w.contains("components")) {
      o.data.weights.component = w.at("components").get<std::vector<double>>();
    }
    if (w.contains("pairs")) {
      o.data.weights.pair = w.at("pairs").get<std::vector<double>>();
    }
  }
  if (cfg.contains("solver")) {
    const json& s = cfg.at("solver");
    auto opt = [&](const char* key, auto& target) {
      if (s.contains(key)) {
        target = s.at(key).get<std::remove_reference_t<decltype(target)>>();
      }
    };
    opt("gradient_tol", o.solver.gradient_tol);
    opt("max_iterations", o.solver.max_iterations);
    opt("separation_threshold", o.solver.separation_threshold);
    opt("rho_tol", o.solver.rho_tol);
    opt("rho_clamp", o.solver.rho_clamp);
    opt("boundary_tol", o.solver.boundary_tol);
    opt("max_rho_evaluations", o.solver.max_rho_evaluations);
  }
  take("seed", "--seed", o.seed);
  take("threads", "--threads", o.threads);
  take("replicates", "--replicates", o.replicates);
  take("format", "--format", o.format);
  take("full_loglik", "--full-loglik", o.full_loglik);
  take("timings", "--timings", o.timings);
  take("n_obs", "--n", o.n_obs);
  take("n_components", "--k", o.n_components);
  take("n_coef", "--p", o.n_coef);
  take("reps", "--reps", o.reps);
  take("level", "--level", o.level);
  take("rho", "--rho", o.rho);
  if (cfg.contains("out") && !given("--out")) {
    o.out = resolve(base, cfg.at("out").get<std::string>()).string();
  }
  auto take_counts = [&](const char* key, const char* flag, std::string& target) {
    if (cfg.contains(key) && !given(flag)) {
      const json& v = cfg.at(key);
      if (v.is_array()) {
        std::string joined;
        for (const auto& e : v) {
          joined += (joined.empty() ? "" : ",") + std::to_string(e.get<Index>());
        }
        target = joined;
      } else {
        target = v.get<std::string>();
      }
    }
  };
  take_counts("n_values", "--n-values", o.n_values);
  take_counts("k_values", "--k-values", o.k_values);
  take_counts("p_values", "--p-values", o.p_values);
  if (cfg.contains("coefficients")) {
    o.coefficients = cfg.at("coefficients");
  }
  if (cfg.contains("correlation")) {
    o.correlation = cfg.at("correlation");
  }
}

void finalize(Options& o, const CLI::App& sub) {
  if (!o.config.empty()) {
    apply_config(io::read_json(o.config), o.config.parent_path(), o, sub);
  }
  if (!o.responses.empty()) {
    o.data.responses = split_list(o.responses);
  }
  if (!o.predictors.empty()) {
    o.data.predictors = split_list(o.predictors);
  }
  if (o.no_intercept) {
    o.data.intercept = false;
  }
  if (o.format != "json" && o.format != "csv") {
    throw InputError("--format must be json or csv");
  }
}

// Writes to the --out file, or to the given stream for "-".
void emit(const Options& o, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (o.out.empty() || o.out == "-") {
    body(out);
    return;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) {
    throw InputError("cannot write '" + o.out + "'");
  }
  body(file);
  if (!file) {
    throw InputError("failed writing '" + o.out + "'");
  }
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix json_matrix(const json& v, const char* what) {
  if (!v.is_array() || v.empty() || !v.front().is_array()) {
    throw InputError(std::string(what) + " must be a non-empty array of rows");
  }
  const auto rows = static_cast<Index>(v.size());
  const auto cols = static_cast<Index>(v.front().size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = v.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw InputError(std::string(what) + " rows must all have the same length");
    }
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
  }
  return m;
}

std::vector<std::string> coefficient_labels(const MvpModel& model) {
  if (!model.coefficient_names().empty()) {
    return model.coefficient_names();
  }
  std::vector<std::string> names;
  for (Index c : model.layout().columns(0)) {
    names.push_back(model.column_names().empty() ? "x" + std::to_string(c)
                                                 : model.column_names()[static_cast<std::size_t>(c)]);
  }
  return names;
}

json model_json(const MvpModel& model) {
  json m;
  m["n_obs"] = model.n_obs();
  m["n_components"] = model.n_components();
  m["n_coef"] = model.n_coef();
  m["layout"] = model.layout().is_shared() ? "shared" : "separate";
  m["responses"] = model.response_names();
  m["coefficient_names"] = coefficient_labels(model);
  return m;
}

// ---------------------------------------------------------------- fit

int cmd_fit(Options& o, std::ostream& out) {
  const MvpModel model = load_model(o.data);
  FitOptions fo;
  fo.solver = o.solver;
  fo.threads = o.threads;
  const FitResult r = fit(model, fo);

  std::optional<FullLoglik> full;
  std::string full_note;
  if (o.full_loglik) {
    if (model.n_components() > 6) {
      throw InputError("--full-loglik supports at most 6 components");
    }
    try {
      full = full_loglik(r.theta1, r.correlation, model, {}, o.threads);
    } catch (const NumericError& e) {
      full_note = e.what();
    }
  }

  const std::vector<std::string> names = model.parameter_names();
  const Vector theta = r.theta();
  const Vector se = r.robust_se();

  if (o.format == "csv") {
    emit(o, out, [&](std::ostream& s) {
      io::write_csv_row(s, {"parameter", "estimate", "robust_se"});
      for (Index q = 0; q < theta.size(); ++q) {
        io::write_csv_row(s, {names[static_cast<std::size_t>(q)], io::format_double(theta[q]),
                              io::format_double(se[q])});
      }
    });
    return kOk;
  }

  json j;
  j["model"] = model_json(model);
  json params = json::array();
  for (Index q = 0; q < theta.size(); ++q) {
    params.push_back({{"name", names[static_cast<std::size_t>(q)]},
                      {"estimate", theta[q]},
                      {"robust_se", se[q]}});
  }
  j["parameters"] = std::move(params);
  j["coefficients"] = matrix_json(r.coefficients);
  j["correlation"] = matrix_json(r.correlation);
  json ll;
  ll["stage1"] = r.stage1_loglik;
  ll["stage2"] = r.stage2_loglik;
  if (o.full_loglik) {
    ll["full"] = full ? json(full->value) : json(nullptr);
    ll["full_error"] = full ? json(full->error) : json(nullptr);
    if (!full_note.empty()) {
      ll["full_note"] = full_note;
    }
  }
  j["loglik"] = std::move(ll);

  json s1 = json::array();
  for (std::size_t g = 0; g < r.stage1.size(); ++g) {
    const UnivariateFit& f = r.stage1[g];
    s1.push_back({{"group", model.layout().is_shared() ? std::string("shared")
                                                       : model.response_names()[g]},
                  {"loglik", f.loglik},
                  {"iterations", f.iterations},
                  {"converged", f.converged}});
  }
  j["stage1"] = std::move(s1);
  json s2 = json::array();
  for (const PairFit& pf : r.stage2) {
    s2.push_back({{"pair", model.response_names()[static_cast<std::size_t>(pf.j)] + "," +
                               model.response_names()[static_cast<std::size_t>(pf.k)]},
                  {"rho", pf.rho},
                  {"loglik", pf.loglik},
                  {"converged", pf.converged},
                  {"boundary", pf.boundary},
                  {"evaluations", pf.evaluations}});
  }
  j["stage2"] = std::move(s2);
  j["diagnostics"] = {{"correlation_min_eigenvalue", r.min_eigenvalue}};
  j["covariance"] = matrix_json(r.robust_cov);
  if (o.timings) {
    j["timings"] = {{"stage1_seconds", r.timings.stage1},
                    {"stage2_seconds", r.timings.stage2},
                    {"variance_seconds", r.timings.variance}};
  }
  emit(o, out, [&](std::ostream& s) { s << io::dump_json(j); });
  return kOk;
}

// ---------------------------------------------------------- bootstrap

int cmd_bootstrap(Options& o, std::ostream& out) {
  const MvpModel model = load_model(o.data);
  BootstrapOptions bo;
  bo.replicates = o.replicates;
  bo.seed = o.seed;
  bo.solver = o.solver;
  bo.threads = o.threads;
  const BootstrapResult b = bootstrap_se(model, bo);

  FitOptions fo;
  fo.solver = o.solver;
  fo.threads = o.threads;
  fo.compute_variance = false;
  const Vector theta = fit(model, fo).theta();
  const std::vector<std::string> names = model.parameter_names();

  if (o.format == "csv") {
    emit(o, out, [&](std::ostream& s) {
      io::write_csv_row(s, {"parameter", "estimate", "bootstrap_se"});
      for (Index q = 0; q < theta.size(); ++q) {
        io::write_csv_row(s, {names[static_cast<std::size_t>(q)], io::format_double(theta[q]),
                              io::format_double(b.se[q])});
      }
    });
    return kOk;
  }
  json j;
  j["model"] = model_json(model);
  j["seed"] = o.seed;
  j["replicates_requested"] = b.requested;
  j["replicates_succeeded"] = b.estimates.rows();
  j["replicates_failed"] = b.failures.size();
  json failures = json::array();
  for (const auto& f : b.failures) {
    failures.push_back({{"replicate", f.replicate}, {"message", f.message}});
  }
  j["failures"] = std::move(failures);
  json params = json::array();
  for (Index q = 0; q < theta.size(); ++q) {
    params.push_back({{"name", names[static_cast<std::size_t>(q)]},
                      {"estimate", theta[q]},
                      {"bootstrap_se", b.se[q]}});
  }
  j["parameters"] = std::move(params);
  j["replicate_ids"] = b.replicate_ids;
  j["estimates"] = matrix_json(b.estimates);
  emit(o, out, [&](std::ostream& s) { s << io::dump_json(j); });
  return kOk;
}

// ----------------------------------------------------------- simulate

int cmd_simulate(Options& o, std::ostream& out) {
  if (o.out.empty() || o.out == "-") {
    throw InputError("simulate needs --out <file.csv>; the spec is written next to it");
  }
  Matrix b = o.coefficients.is_null() ? design_coefficients(o.n_coef, o.n_components)
                                      : json_matrix(o.coefficients, "coefficients");
  const Index p = b.rows();
  const Index k = b.cols();
  Matrix c = o.correlation.is_null() ? exchangeable_correlation(k, o.rho)
                                     : json_matrix(o.correlation, "correlation");
  if (o.n_obs < 1) {
    throw InputError("--n must be positive");
  }
  const Matrix x = make_design(o.n_obs, p, o.seed);
  const BinaryMatrix y = simulate_y(SimSpec{b, c, x, o.seed, 1});

  std::vector<std::string> columns{kIntercept};
  for (Index j = 1; j < p; ++j) {
    columns.push_back("x" + std::to_string(j));
  }
  std::vector<std::string> responses;
  for (Index j = 0; j < k; ++j) {
    responses.push_back("y" + std::to_string(j + 1));
  }
  emit(o, out, [&](std::ostream& s) {
    std::vector<std::string> header = columns;
    header.insert(header.end(), responses.begin(), responses.end());
    io::write_csv_row(s, header);
    std::vector<std::string> row(header.size());
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < p; ++j) {
        row[static_cast<std::size_t>(j)] = io::format_double(x(i, j));
      }
      for (Index j = 0; j < k; ++j) {
        row[static_cast<std::size_t>(p + j)] = y(i, j) != 0 ? "1" : "0";
      }
      io::write_csv_row(s, row);
    }
  });

  fs::path spec_path(o.out);
  spec_path.replace_extension(".spec.json");
  json spec;
  spec["data"] = fs::path(o.out).filename().string();
  spec["seed"] = o.seed;
  spec["n_obs"] = o.n_obs;
  spec["predictors"] = columns;
  spec["responses"] = responses;
  spec["coefficients"] = matrix_json(b);
  spec["correlation"] = matrix_json(c);
  std::ofstream spec_file(spec_path, std::ios::binary);
  if (!spec_file) {
    throw InputError("cannot write '" + spec_path.string() + "'");
  }
  spec_file << io::dump_json(spec);
  return kOk;
}

// ----------------------------------------------------------- coverage

json coverage_row_json(const CoverageRow& r) {
  return {{"parameter", r.parameter},     {"truth", r.truth},
          {"coverage", r.coverage},       {"mean_estimate", r.mean_estimate},
          {"mean_se", r.mean_se},         {"empirical_sd", r.empirical_sd}};
}

int cmd_coverage(Options& o, std::ostream& out) {
  CoverageOptions co;
  co.n_obs = o.n_obs;
  co.n_components = o.n_components;
  co.n_coef = o.n_coef;
  co.reps = o.reps;
  co.level = o.level;
  co.rho = o.rho;
  co.seed = o.seed;
  co.threads = o.threads;
  const CoverageResult r = run_coverage(co);

  if (o.format == "csv") {
    emit(o, out, [&](std::ostream& s) {
      io::write_csv_row(s, {"n_obs", "n_components", "n_coef", "parameter", "truth", "coverage",
                            "mean_estimate", "mean_se", "empirical_sd"});
      for (const CoverageRow& row : r.coefficients) {
        io::write_csv_row(s, {std::to_string(co.n_obs), std::to_string(co.n_components),
                              std::to_string(co.n_coef), row.parameter,
                              io::format_double(row.truth), io::format_double(row.coverage),
                              io::format_double(row.mean_estimate),
                              io::format_double(row.mean_se),
                              io::format_double(row.empirical_sd)});
      }
    });
    return kOk;
  }
  json j;
  j["cell"] = {{"n_obs", co.n_obs}, {"n_components", co.n_components}, {"n_coef", co.n_coef},
               {"reps", co.reps},   {"level", co.level},               {"rho", co.rho},
               {"seed", co.seed}};
  j["replicates_succeeded"] = r.succeeded;
  j["replicates_failed"] = r.failed;
  json coefs = json::array();
  for (const auto& row : r.coefficients) {
    coefs.push_back(coverage_row_json(row));
  }
  json cors = json::array();
  for (const auto& row : r.correlations) {
    cors.push_back(coverage_row_json(row));
  }
  j["coefficients"] = std::move(coefs);
  j["correlations"] = std::move(cors);
  if (o.timings) {
    j["seconds"] = r.seconds;
  }
  emit(o, out, [&](std::ostream& s) { s << io::dump_json(j); });
  return kOk;
}

// -------------------------------------------------------------- bench

int cmd_bench(Options& o, std::ostream& out) {
  TimingOptions to;
  to.n_values = split_counts(o.n_values, "--n-values");
  to.k_values = split_counts(o.k_values, "--k-values");
  to.p_values = split_counts(o.p_values, "--p-values");
  to.reps = o.reps;
  to.seed = o.seed;
  to.rho = o.rho;
  to.threads = o.threads;
  const std::vector<TimingCell> cells = run_timing(to);

  if (o.format == "csv") {
    emit(o, out, [&](std::ostream& s) {
      io::write_csv_row(s, {"n_obs", "n_components", "n_coef", "reps", "mean_seconds",
                            "min_seconds"});
      for (const TimingCell& c : cells) {
        io::write_csv_row(s, {std::to_string(c.n_obs), std::to_string(c.n_components),
                              std::to_string(c.n_coef), std::to_string(c.reps),
                              io::format_double(c.mean_seconds),
                              io::format_double(c.min_seconds)});
      }
    });
    return kOk;
  }
  json rows = json::array();
  for (const TimingCell& c : cells) {
    rows.push_back({{"n_obs", c.n_obs},
                    {"n_components", c.n_components},
                    {"n_coef", c.n_coef},
                    {"reps", c.reps},
                    {"mean_seconds", c.mean_seconds},
                    {"min_seconds", c.min_seconds}});
  }
  json j;
  j["seed"] = o.seed;
  j["cells"] = std::move(rows);
  emit(o, out, [&](std::ostream& s) { s << io::dump_json(j); });
  return kOk;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON config file; flags override its values");
  sub->add_option("--seed", o.seed, "Random seed");
  sub->add_option("--threads", o.threads, "Worker threads (0: all cores)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--out", o.out, "Output file ('-' for stdout)");
  sub->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  sub->add_flag("--timings", o.timings, "Include wall-clock timings in the output");
}

void add_data(CLI::App* sub, Options& o) {
  sub->add_option("--data", o.data.data, "Combined CSV with predictor and response columns");
  sub->add_option("--x", o.data.x, "Predictor CSV (split mode)");
  sub->add_option("--y", o.data.y, "Response CSV (split mode)");
  sub->add_option("--responses", o.responses, "Comma-separated response columns");
  sub->add_option("--predictors", o.predictors, "Comma-separated predictor columns");
  sub->add_option("--shared-coef", o.data.shared_coef, "Shared-coefficient mapping (JSON)");
  sub->add_flag("--no-intercept", o.no_intercept, "Do not add an intercept column");
}

void add_sim(CLI::App* sub, Options& o) {
  sub->add_option("--n", o.n_obs, "Observations")->check(CLI::PositiveNumber);
  sub->add_option("--k", o.n_components, "Components")->check(CLI::PositiveNumber);
  sub->add_option("--p", o.n_coef, "Coefficients per component, intercept included")
      ->check(CLI::PositiveNumber);
  sub->add_option("--rho", o.rho, "Exchangeable true correlation");
}

}  // namespace

SharedMapping parse_shared_mapping(const json& mapping) {
  if (!mapping.is_object()) {
    throw InputError("shared-coefficient mapping must be a JSON object");
  }
  SharedMapping out;
  const json* components = &mapping;
  if (mapping.contains("components")) {
    components = &mapping.at("components");
    if (mapping.contains("coefficients")) {
      out.coefficients = mapping.at("coefficients").get<std::vector<std::string>>();
    }
  }
  if (!components->is_object() || components->empty()) {
    throw InputError("shared-coefficient mapping has no components");
  }
  std::vector<std::optional<std::vector<std::string>>> slots(components->size());
  for (const auto& [key, cols] : components->items()) {
    std::size_t idx = 0;
    const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
    if (ec != std::errc() || ptr != key.data() + key.size() || idx >= slots.size() || slots[idx]) {
      throw InputError("shared-coefficient mapping: component keys must be 0.." +
                       std::to_string(slots.size() - 1) + ", got '" + key + "'");
    }
    slots[idx] = cols.get<std::vector<std::string>>();
  }
  for (auto& s : slots) {
    out.components.push_back(std::move(*s));
  }
  const std::size_t width = out.components.front().size();
  for (const auto& c : out.components) {
    if (c.size() != width) {
      throw InputError("shared-coefficient mapping: every component needs the same number of columns");
    }
  }
  if (!out.coefficients.empty() && out.coefficients.size() != width) {
    throw InputError("shared-coefficient mapping: 'coefficients' length does not match the columns");
  }
  if (out.coefficients.empty()) {
    for (std::size_t j = 0; j < width; ++j) {
      out.coefficients.push_back("coef" + std::to_string(j + 1));
    }
  }
  return out;
}

MvpModel load_model(const DataConfig& config) {
  std::vector<std::string> col_names;
  std::vector<Vector> col_values;
  std::vector<std::string> responses = config.responses;
  BinaryMatrix y;
  Index n = 0;

  auto add_columns = [&](const io::CsvTable& t, const std::vector<std::string>& names) {
    for (const std::string& name : names) {
      col_names.push_back(name);
      col_values.push_back(t.values.col(t.column(name)));
    }
  };
  auto others = [](const io::CsvTable& t, const std::vector<std::string>& skip) {
    std::vector<std::string> out;
    for (const std::string& h : t.header) {
      if (h != "id" && std::find(skip.begin(), skip.end(), h) == skip.end()) {
        out.push_back(h);
      }
    }
    return out;
  };
  auto response_columns = [](const io::CsvTable& t, const std::vector<std::string>& names) {
    std::vector<Index> cols;
    for (const auto& r : names) {
      cols.push_back(t.column(r));
    }
    return cols;
  };

  if (!config.data.empty()) {
    if (!config.x.empty() || !config.y.empty()) {
      throw InputError("give either --data or --x/--y, not both");
    }
    const io::CsvTable t = io::read_csv(config.data);
    if (responses.empty()) {
      throw InputError("combined CSV mode needs the response columns (--responses)");
    }
    y = io::binary_columns(t, response_columns(t, responses), config.data.string());
    n = t.values.rows();
    add_columns(t, config.predictors.empty() ? others(t, responses) : config.predictors);
  } else if (!config.x.empty() && !config.y.empty()) {
    const io::CsvTable tx = io::read_csv(config.x);
    const io::CsvTable ty = io::read_csv(config.y);
    if (tx.values.rows() != ty.values.rows()) {
      throw InputError("'" + config.x.string() + "' has " + std::to_string(tx.values.rows()) +
                       " rows but '" + config.y.string() + "' has " +
                       std::to_string(ty.values.rows()));
    }
    if (responses.empty()) {
      responses = others(ty, {});
    }
    y = io::binary_columns(ty, response_columns(ty, responses), config.y.string());
    n = tx.values.rows();
    add_columns(tx, config.predictors.empty() ? others(tx, {}) : config.predictors);
  } else {
    throw InputError("no input data: give --data, or both --x and --y");
  }
  if (responses.empty()) {
    throw InputError("no response columns");
  }
  if (n == 0) {
    throw InputError("input has no data rows");
  }

  auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(col_names.begin(), col_names.end(), name);
    if (it == col_names.end()) {
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - col_names.begin());
  };
  auto add_intercept = [&] {
    col_names.insert(col_names.begin(), kIntercept);
    col_values.insert(col_values.begin(), Vector::Ones(n));
  };

  std::optional<SharedMapping> shared;
  if (!config.shared_coef.empty()) {
    shared = parse_shared_mapping(io::read_json(config.shared_coef));
  } else if (!config.shared_inline.is_null()) {
    shared = parse_shared_mapping(config.shared_inline);
  }

  if (shared) {
    if (static_cast<Index>(shared->components.size()) != static_cast<Index>(responses.size())) {
      throw InputError("shared-coefficient mapping covers " +
                       std::to_string(shared->components.size()) + " components but there are " +
                       std::to_string(responses.size()) + " responses");
    }
    // Keep only the referenced columns, in order of first use.
    std::vector<std::string> used;
    for (const auto& comp : shared->components) {
      for (const auto& c : comp) {
        if (std::find(used.begin(), used.end(), c) == used.end()) {
          used.push_back(c);
        }
      }
    }
    if (!find_column(kIntercept) &&
        std::find(used.begin(), used.end(), kIntercept) != used.end()) {
      add_intercept();
    }
    Matrix x(n, static_cast<Index>(used.size()));
    for (std::size_t j = 0; j < used.size(); ++j) {
      const auto pos = find_column(used[j]);
      if (!pos) {
        throw InputError("shared-coefficient mapping references unknown column '" + used[j] + "'");
      }
      x.col(static_cast<Index>(j)) = col_values[*pos];
    }
    std::vector<std::vector<Index>> layout_cols;
    for (const auto& comp : shared->components) {
      std::vector<Index> cols;
      for (const auto& c : comp) {
        cols.push_back(static_cast<Index>(std::find(used.begin(), used.end(), c) - used.begin()));
      }
      layout_cols.push_back(std::move(cols));
    }
    MvpModel model(std::move(x), std::move(y), CoefficientLayout::shared(std::move(layout_cols)));
    model.set_names(used, responses, shared->coefficients);
    model.set_weights(config.weights);
    return model;
  }

  if (config.intercept) {
    const bool has_constant = std::any_of(col_values.begin(), col_values.end(), [](const Vector& v) {
      return (v.array() == 1.0).all();
    });
    if (!has_constant) {
      add_intercept();
    }
  }
  if (col_names.empty()) {
    throw InputError("no predictor columns");
  }
  Matrix x(n, static_cast<Index>(col_names.size()));
  for (std::size_t j = 0; j < col_values.size(); ++j) {
    x.col(static_cast<Index>(j)) = col_values[j];
  }
  MvpModel model(std::move(x), std::move(y));
  model.set_names(col_names, responses);
  model.set_weights(config.weights);
  return model;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Two-stage composite-likelihood estimation of multivariate probit models"};
  app.name(args.empty() ? "mvpcl" : args.front());
  app.require_subcommand(1);

  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a model and report robust standard errors");
  add_common(fit_cmd, o);
  add_data(fit_cmd, o);
  fit_cmd->add_flag("--full-loglik", o.full_loglik,
                    "Also evaluate the full log-likelihood at the estimates (K <= 6)");

  CLI::App* boot_cmd = app.add_subcommand("bootstrap", "Case-resampling bootstrap standard errors");
  add_common(boot_cmd, o);
  add_data(boot_cmd, o);
  boot_cmd->add_option("--replicates", o.replicates, "Bootstrap replicates (>= 2)");

  CLI::App* sim_cmd = app.add_subcommand("simulate", "Simulate a data set from the study design");
  add_common(sim_cmd, o);
  add_sim(sim_cmd, o);

  CLI::App* cov_cmd = app.add_subcommand("coverage", "Wald interval coverage study");
  add_common(cov_cmd, o);
  add_sim(cov_cmd, o);
  cov_cmd->add_option("--reps", o.reps, "Replicates")->check(CLI::PositiveNumber);
  cov_cmd->add_option("--level", o.level, "Nominal interval level");

  CLI::App* bench_cmd = app.add_subcommand("bench", "Run-time scaling grid");
  add_common(bench_cmd, o);
  bench_cmd->add_option("--n-values", o.n_values, "Comma-separated observation counts");
  bench_cmd->add_option("--k-values", o.k_values, "Comma-separated component counts");
  bench_cmd->add_option("--p-values", o.p_values, "Comma-separated coefficient counts");
  bench_cmd->add_option("--reps", o.reps, "Replicates per cell")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--rho", o.rho, "Exchangeable true correlation");

  std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (sub == bench_cmd && bench_cmd->count("--reps") == 0) {
      o.reps = 10;
    }
    finalize(o, *sub);
    if (sub == fit_cmd) {
      return cmd_fit(o, out);
    }
    if (sub == boot_cmd) {
      return cmd_bootstrap(o, out);
    }
    if (sub == sim_cmd) {
      return cmd_simulate(o, out);
    }
    if (sub == cov_cmd) {
      return cmd_coverage(o, out);
    }
    return cmd_bench(o, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const EstimationError& e) {
    err << "estimation failed: " << e.what() << '\n';
    return kEstimationError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: configuration: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  }
}

}  // namespace mvpcl::cli
