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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mposterior/loss.hpp"
#include "mposterior/prior.hpp"

namespace mpost::cli {

/// A configuration problem. The message starts with the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline constexpr std::string_view kExperiments[] = {"pif", "breakdown", "bvm",
                                                    "bias", "fit", "sample"};

struct LossSpec {
  std::string name = "huber";
  double c = 1.0;
  double tau = 0.5;
  double kappa = 1.0;
  double lambda = 1.0;
  /// When set, the loss is replaced by bias_correct(loss, bias).
  std::optional<double> bias;
};

struct PriorSpec {
  std::string name = "flat";
  double level = 0.0;
  double mu0 = 0.0;
  double sigma0_sq = 1.0;
  double b = 1.0;
  double loc = 0.0;
  double scale = 1.0;
  std::optional<Interval> support;
};

struct DataSpec {
  /// normal, exponential, file, or values.
  std::string generator = "normal";
  int n = 100;
  std::uint64_t seed = 0;
  double mean = 0.0;
  double sd = 1.0;
  double rate = 1.0;
  std::string path;
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  LossSpec loss;
  PriorSpec prior;
  DataSpec data;
  nlohmann::json params = nlohmann::json::object();
  std::string out_dir = ".";
  int threads = 0;
  /// The fully resolved document; re-running it reproduces the run.
  nlohmann::json resolved;
};

/// The complete default document for one experiment.
nlohmann::json default_config(std::string_view experiment);

/// Overlays `user` on the defaults of `experiment` (JSON merge patch) and
/// validates the result. Unknown keys and wrong types raise ConfigError.
ExperimentConfig resolve_config(std::string_view experiment, const nlohmann::json& user);

/// Reads a JSON document from disk.
nlohmann::json load_json(const std::string& path);

LossSpec parse_loss(const nlohmann::json& doc, const std::string& field);
PriorSpec parse_prior(const nlohmann::json& doc, const std::string& field);
DataSpec parse_data(const nlohmann::json& doc, const std::string& field,
                    std::uint64_t default_seed);

LossModel make_loss(const LossSpec& spec);
PriorModel make_prior(const PriorSpec& spec);
/// Draws or reads the data set.
std::vector<double> make_data(const DataSpec& spec);
/// Same generator with n and seed replaced.
std::vector<double> make_data(const DataSpec& spec, int n, std::uint64_t seed);

/// Typed lookup in an experiment's params object.
double param_real(const ExperimentConfig& config, const std::string& key);
int param_int(const ExperimentConfig& config, const std::string& key);
std::string param_string(const ExperimentConfig& config, const std::string& key);
std::vector<double> param_reals(const ExperimentConfig& config, const std::string& key);
std::vector<int> param_ints(const ExperimentConfig& config, const std::string& key);

}  // namespace mpost::cli
