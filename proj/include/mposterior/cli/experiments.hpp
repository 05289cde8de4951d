// Copyright 2026 The mposterior Authors
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


#pragma once

#include <exception>
#include <string>
#include <vector>

#include <json.hpp>

#include "mposterior/cli/config.hpp"

namespace mpost::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

struct RunResult {
  /// Output file names relative to the output directory.
  std::vector<std::string> files;
  nlohmann::json summary = nlohmann::json::object();
};

/// pif_vs_x0.csv (theta fixed, x0 swept) and pif_vs_theta.csv (x0 fixed,
/// theta swept) for the squared loss and the configured loss.
RunResult run_pif(const ExperimentConfig& config);
/// estimator_trace.csv, mh_draws.csv and bias_summary.json.
RunResult run_bias(const ExperimentConfig& config);
/// Per prior: posterior_<prior>_clean.csv, posterior_<prior>_m<m>.csv,
/// breakdown_<prior>.csv; plus breakdown_summary.json.
RunResult run_breakdown(const ExperimentConfig& config);
/// bvm.csv and bvm_summary.json.
RunResult run_bvm(const ExperimentConfig& config);
/// fit.json.
RunResult run_fit(const ExperimentConfig& config);
/// chain.csv and chain.json.
RunResult run_sample(const ExperimentConfig& config);

/// Creates the output directory, applies the thread cap, dispatches on
/// config.experiment and writes manifest.json. A failed run still leaves a
/// manifest with status "failed" before the error propagates.
RunResult run_experiment(const ExperimentConfig& config);

/// 2 for configuration and argument errors, 3 for numeric failures.
int exit_code_for(const std::exception& e);

}  // namespace mpost::cli
