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

// Command-line front end. Kept in the library so tests drive it in-process.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvpcl/model.hpp"

namespace mvpcl::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kEstimationError = 3,
  kNumericError = 4,
};

/// Where the data come from and how columns map onto the model.
struct DataConfig {
  std::filesystem::path data;  // combined CSV
  std::filesystem::path x;     // split mode: predictors
  std::filesystem::path y;     // split mode: responses
  std::vector<std::string> responses;
  std::vector<std::string> predictors;
  std::filesystem::path shared_coef;  // mapping file
  nlohmann::ordered_json shared_inline;  // or the mapping itself
  bool intercept = true;
  ModelWeights weights;
};

/// Builds the model from CSV input. Column names become model names.
MvpModel load_model(const DataConfig& config);

/// Parses a shared-coefficient mapping:
///   {"coefficients": [names...], "components": {"0": [columns...], ...}}
/// or the bare form {"0": [columns...], ...}. Component keys index the
/// response list; column entries name data columns.
struct SharedMapping {
  std::vector<std::string> coefficients;
  std::vector<std::vector<std::string>> components;
};
SharedMapping parse_shared_mapping(const nlohmann::ordered_json& mapping);

/// Runs one command line (args[0] is the program name). Results go to the
/// --out file or `out`; diagnostics go to `err`. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mvpcl::cli
