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

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "mvpcl/cli.hpp"
#include "mvpcl/io.hpp"

using namespace mvpcl;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::string kData = MVPCL_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mvpcl");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Scratch directory removed at scope exit.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("mvpcl-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name, const std::string& text = {}) const {
    const fs::path p = path_ / name;
    if (!text.empty()) {
      std::ofstream(p) << text;
    }
    return p.string();
  }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
  const Run help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("fit") != std::string::npos);
  CHECK(run({"fit", "--help"}).code == 0);
  CHECK(run({}).code == cli::kInputError);
  CHECK(run({"fit", "--bogus"}).code == cli::kInputError);
  CHECK(run({"fit", "--format", "xml", "--config", kData + "/six_cities.json"}).code ==
        cli::kInputError);
}

TEST_CASE("Six Cities fit through the config file") {
  const Run r = run({"fit", "--config", kData + "/six_cities.json"});
  REQUIRE(r.code == 0);
  const auto j = ordered_json::parse(r.out);
  CHECK(j["model"]["layout"] == "shared");
  CHECK(j["model"]["n_obs"] == 537);
  REQUIRE(j["parameters"].size() == 10);
  CHECK(j["parameters"][0]["name"] == "beta[intercept]");
  CHECK(j["parameters"][0]["estimate"].get<double>() == doctest::Approx(-1.126).epsilon(1e-3));
  CHECK(j["parameters"][7]["name"] == "rho[wheeze8,wheeze9]");
  CHECK(j["parameters"][7]["estimate"].get<double>() == doctest::Approx(0.692).epsilon(1e-3));
  CHECK(j["covariance"].size() == 10);
  CHECK_FALSE(j.contains("timings"));
  CHECK_FALSE(j["loglik"].contains("full"));
}

TEST_CASE("output is byte-identical across runs and thread counts") {
  const Run a = run({"fit", "--config", kData + "/six_cities.json", "--threads", "1"});
  const Run b = run({"fit", "--config", kData + "/six_cities.json", "--threads", "4"});
  const Run c = run({"fit", "--config", kData + "/six_cities.json"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  const Run t = run({"fit", "--config", kData + "/six_cities.json", "--timings"});
  CHECK(ordered_json::parse(t.out).contains("timings"));
}

TEST_CASE("flags override the config file") {
  TempDir dir;
  const std::string cfg = dir.file("c.json", R"({"data": ")" + kData + R"(/six_cities.csv",
    "responses": ["wheeze7", "wheeze8"], "predictors": ["smoke"], "format": "json"})");
  const Run j = run({"fit", "--config", cfg});
  REQUIRE(j.code == 0);
  const auto parsed = ordered_json::parse(j.out);
  CHECK(parsed["model"]["coefficient_names"] == ordered_json({"intercept", "smoke"}));
  const Run csv = run({"fit", "--config", cfg, "--format", "csv"});
  REQUIRE(csv.code == 0);
  CHECK(csv.out.rfind("parameter,estimate,robust_se\n", 0) == 0);
  CHECK(csv.out.find("\"rho[wheeze7,wheeze8]\"") != std::string::npos);

  const std::string bad = dir.file("bad.json", R"({"dta": "x.csv"})");
  const Run b = run({"fit", "--config", bad});
  CHECK(b.code == cli::kInputError);
  CHECK(b.err.find("unknown config key 'dta'") != std::string::npos);
  const std::string broken = dir.file("broken.json", "{\"data\": ");
  CHECK(run({"fit", "--config", broken}).code == cli::kInputError);
}

TEST_CASE("input errors exit 2 with a located message") {
  TempDir dir;
  const std::string nonbinary = dir.file("nb.csv", "x,y1,y2\n0.1,1,0\n0.2,3,1\n0.3,0,1\n");
  const Run r = run({"fit", "--data", nonbinary, "--responses", "y1,y2"});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("nb.csv:3, column 2 ('y1')") != std::string::npos);

  const std::string missing = dir.file("m.csv", "x,y1,y2\n0.1,1,0\n,0,1\n");
  const Run m = run({"fit", "--data", missing, "--responses", "y1,y2"});
  CHECK(m.code == cli::kInputError);
  CHECK(m.err.find("missing value") != std::string::npos);

  CHECK(run({"fit", "--data", nonbinary, "--responses", "nope"}).code == cli::kInputError);
  CHECK(run({"fit", "--data", dir.file("absent.csv")}).code == cli::kInputError);
  CHECK(run({"fit"}).code == cli::kInputError);
}

TEST_CASE("a single-class response exits 3 and names it") {
  TempDir dir;
  std::string text = "x,a,b\n";
  for (int i = 0; i < 30; ++i) {
    text += std::to_string(i * 0.1) + "," + std::to_string(i % 2) + ",1\n";
  }
  const Run r = run({"fit", "--data", dir.file("sc.csv", text), "--responses", "a,b"});
  CHECK(r.code == cli::kEstimationError);
  CHECK(r.err.find("stage1 [b]") != std::string::npos);
}

TEST_CASE("bootstrap replicates must be at least two") {
  const Run r = run({"bootstrap", "--config", kData + "/six_cities.json", "--replicates", "1"});
  CHECK(r.code == cli::kInputError);
  const Run ok =
      run({"bootstrap", "--config", kData + "/six_cities.json", "--replicates", "3", "--seed", "4"});
  REQUIRE(ok.code == 0);
  const auto j = ordered_json::parse(ok.out);
  CHECK(j["replicates_requested"] == 3);
  CHECK(j["estimates"].size() == 3);
  const Run again =
      run({"bootstrap", "--config", kData + "/six_cities.json", "--replicates", "3", "--seed", "4"});
  CHECK(again.out == ok.out);
}

TEST_CASE("simulate then fit recovers the truth") {
  TempDir dir;
  const std::string csv = dir.file("sim.csv");
  const Run s = run({"simulate", "--n", "4000", "--k", "3", "--p", "3", "--rho", "0.4", "--seed",
                     "12", "--out", csv});
  REQUIRE(s.code == 0);
  const auto spec = io::read_json(dir.file("sim.spec.json"));
  CHECK(spec["responses"] == ordered_json({"y1", "y2", "y3"}));
  CHECK(slurp(csv).rfind("intercept,x1,x2,y1,y2,y3\n", 0) == 0);

  const Run f = run({"fit", "--data", csv, "--responses", "y1,y2,y3"});
  REQUIRE(f.code == 0);
  const auto j = ordered_json::parse(f.out);
  const auto& truth = spec["coefficients"];
  for (int k = 0; k < 3; ++k) {
    for (int p = 0; p < 3; ++p) {
      const double est = j["coefficients"][p][k].get<double>();
      const double se = j["parameters"][3 * k + p]["robust_se"].get<double>();
      CHECK(std::abs(est - truth[p][k].get<double>()) < 4.0 * se);
    }
  }
  for (int m = 9; m < 12; ++m) {
    const double est = j["parameters"][m]["estimate"].get<double>();
    const double se = j["parameters"][m]["robust_se"].get<double>();
    CHECK(std::abs(est - 0.4) < 4.0 * se);
  }

  // split files give the same answer as the combined file
  const auto table = io::read_csv(csv);
  std::ofstream xo(dir.file("x.csv")), yo(dir.file("y.csv"));
  xo << "intercept,x1,x2\n";
  yo << "y1,y2,y3\n";
  for (Index i = 0; i < table.values.rows(); ++i) {
    xo << io::format_double(table.values(i, 0)) << ',' << io::format_double(table.values(i, 1))
       << ',' << io::format_double(table.values(i, 2)) << '\n';
    yo << table.values(i, 3) << ',' << table.values(i, 4) << ',' << table.values(i, 5) << '\n';
  }
  xo.close();
  yo.close();
  const Run split = run({"fit", "--x", dir.file("x.csv"), "--y", dir.file("y.csv")});
  REQUIRE(split.code == 0);
  CHECK(ordered_json::parse(split.out)["parameters"] == j["parameters"]);

  CHECK(run({"simulate", "--n", "10"}).code == cli::kInputError);
}

TEST_CASE("intercept handling") {
  TempDir dir;
  std::string text = "x,y1,y2\n";
  for (int i = 0; i < 60; ++i) {
    text += std::to_string((i % 7) * 0.3 - 1.0) + "," + std::to_string((i / 2) % 2) + "," +
            std::to_string((i * 5 / 3) % 2) + "\n";
  }
  const std::string csv = dir.file("d.csv", text);
  const auto with = ordered_json::parse(run({"fit", "--data", csv, "--responses", "y1,y2"}).out);
  CHECK(with["model"]["coefficient_names"] == ordered_json({"intercept", "x"}));
  const auto without = ordered_json::parse(
      run({"fit", "--data", csv, "--responses", "y1,y2", "--no-intercept"}).out);
  CHECK(without["model"]["coefficient_names"] == ordered_json({"x"}));
}

TEST_CASE("full log-likelihood on request") {
  TempDir dir;
  const std::string csv = dir.file("s.csv");
  REQUIRE(run({"simulate", "--n", "300", "--k", "3", "--p", "2", "--out", csv}).code == 0);
  const Run r = run({"fit", "--data", csv, "--responses", "y1,y2,y3", "--full-loglik"});
  REQUIRE(r.code == 0);
  const auto j = ordered_json::parse(r.out);
  CHECK(j["loglik"]["full"].get<double>() < 0.0);
  CHECK(j["loglik"]["full"].get<double>() > j["loglik"]["stage1"].get<double>());
}

TEST_CASE("coverage and bench commands") {
  const Run c = run({"coverage", "--n", "300", "--reps", "5", "--format", "csv"});
  REQUIRE(c.code == 0);
  CHECK(c.out.rfind("n_obs,n_components,n_coef,parameter", 0) == 0);
  const Run b = run({"bench", "--n-values", "200", "--k-values", "2,3", "--p-values", "2",
                     "--reps", "1"});
  REQUIRE(b.code == 0);
  CHECK(ordered_json::parse(b.out)["cells"].size() == 2);
  CHECK(run({"bench", "--n-values", "0"}).code == cli::kInputError);
}

TEST_CASE("the installed binary reports exit codes") {
  const std::string bin = MVPCL_CLI_PATH;
  const auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  CHECK(status("--help") == 0);
  CHECK(status("fit --data /nonexistent.csv --responses a") == 2);
  CHECK(status("fit --config " + kData + "/six_cities.json --format csv") == 0);
}

}  // TEST_SUITE
