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


#include "mposterior/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "mposterior/error.hpp"
#include "mposterior/numeric.hpp"

namespace mpost::cli {
namespace {

using nlohmann::json;

json loss_doc(std::string name, double c = 1.0) {
  return {{"name", std::move(name)}, {"c", c}};
}

json support_doc(std::optional<double> lower, std::optional<double> upper, bool lower_open,
                 bool upper_open) {
  return {{"lower", lower ? json(*lower) : json(nullptr)},
          {"upper", upper ? json(*upper) : json(nullptr)},
          {"lower_open", lower_open},
          {"upper_open", upper_open}};
}

const std::set<std::string> kLossKeys = {"name", "c", "tau", "kappa", "lambda", "bias"};
const std::set<std::string> kPriorKeys = {"name", "level", "mu0",  "sigma0_sq",
                                          "b",    "loc",   "scale", "support"};
const std::set<std::string> kSupportKeys = {"lower", "upper", "lower_open", "upper_open"};
const std::set<std::string> kDataKeys = {"generator", "n",    "seed", "mean",
                                         "sd",        "rate", "path", "values"};

void check_keys(const json& doc, const std::string& field, const std::set<std::string>& allowed) {
  if (!doc.is_object()) throw ConfigError(field, "expected an object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) throw ConfigError(field + "." + key, "unknown key");
  }
}

double get_real(const json& doc, const std::string& key, const std::string& field,
                double fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(field + "." + key, "expected a number");
  const double out = v.get<double>();
  if (!std::isfinite(out)) throw ConfigError(field + "." + key, "must be finite");
  return out;
}

int get_int(const json& doc, const std::string& key, const std::string& field, int fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_number_integer()) throw ConfigError(field + "." + key, "expected an integer");
  return v.get<int>();
}

std::string get_string(const json& doc, const std::string& key, const std::string& field,
                       const std::string& fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_string()) throw ConfigError(field + "." + key, "expected a string");
  return v.get<std::string>();
}

std::uint64_t get_seed(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(v.get<long long>());
  }
  throw ConfigError(field, "expected a nonnegative integer seed");
}

std::optional<double> get_bound(const json& doc, const std::string& key,
                                const std::string& field) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return get_real(doc, key, field, 0.0);
}

bool get_bool(const json& doc, const std::string& key, const std::string& field) {
  if (!doc.contains(key)) return false;
  if (!doc.at(key).is_boolean()) throw ConfigError(field + "." + key, "expected true or false");
  return doc.at(key).get<bool>();
}

// Rejects keys that the experiment's default params do not declare.
void check_params(const json& params, const json& defaults) {
  if (!params.is_object()) throw ConfigError("params", "expected an object");
  for (const auto& [key, value] : params.items()) {
    if (!defaults.contains(key)) throw ConfigError("params." + key, "unknown key");
  }
}

const json& param(const ExperimentConfig& config, const std::string& key) {
  if (!config.params.contains(key)) throw ConfigError("params." + key, "missing");
  return config.params.at(key);
}

std::vector<double> read_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("data.path", "cannot open '" + path + "'");
  std::vector<double> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const std::string cell = line.substr(first, line.find(',', first) - first);
    std::istringstream is(cell);
    is.imbue(std::locale::classic());
    double v = 0.0;
    if (!(is >> v) || !std::isfinite(v)) {
      throw ConfigError("data.path", path + ":" + std::to_string(lineno) + ": not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("data.path", "'" + path + "' holds no values");
  return out;
}

}  // namespace

json default_config(std::string_view experiment) {
  json doc = {{"experiment", std::string(experiment)}, {"threads", 0}, {"out", "."}};
  if (experiment == "pif") {
    doc["seed"] = 20260101;
    doc["loss"] = loss_doc("huber");
    doc["prior"] = {{"name", "gaussian"}, {"mu0", 0.0}, {"sigma0_sq", 1.0}};
    doc["data"] = {{"generator", "normal"}, {"n", 100}, {"mean", 0.0}, {"sd", 1.0}};
    doc["params"] = {{"theta_fixed", 0.1},  {"x0_fixed", 2.0},     {"x0_min", -10.0},
                     {"x0_max", 10.0},      {"x0_points", 401},    {"theta_min", -0.5},
                     {"theta_max", 0.5},    {"theta_points", 401}};
  } else if (experiment == "breakdown") {
    doc["seed"] = 20260220;
    doc["loss"] = {{"name", "absolute"}};
    doc["data"] = {{"generator", "normal"}, {"n", 20}, {"mean", 0.0}, {"sd", 1.0}};
    doc["params"] = {
        {"priors",
         json::array({{{"name", "flat"}},
                      {{"name", "laplace"}, {"b", 1.0}},
                      {{"name", "gaussian"}, {"mu0", 0.0}, {"sigma0_sq", 1.0}}})},
        {"m_values", json::array({0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20})},
        {"magnitudes", json::array({1e2, 1e3, 1e4, 1e5, 1e6})},
        {"side", "plus"},
        {"density_m", json::array({10, 14, 20})},
        {"density_magnitude", 10.0}};
  } else if (experiment == "bvm") {
    doc["seed"] = 500;
    doc["loss"] = loss_doc("huber");
    doc["prior"] = {{"name", "flat"}};
    doc["data"] = {{"generator", "normal"}, {"mean", 0.0}, {"sd", 1.0}};
    doc["params"] = {
        {"n_ladder", json::array({50, 200, 800})},
        {"replications", 5},
        {"weights", {{"kind", "unit"}, {"alpha", 1.0}, {"kappa", 1.0}, {"lambda", 1.0}}}};
  } else if (experiment == "bias") {
    doc["seed"] = 1000;
    doc["loss"] = loss_doc("exponential_huber");
    doc["prior"] = {{"name", "flat"}, {"support", support_doc(0.0, std::nullopt, true, false)}};
    doc["data"] = {{"generator", "exponential"}, {"rate", 1.0}};
    doc["params"] = {{"theta_star", 1.0},
                     {"reference_draws", 1000000},
                     {"trace_n", json::array({100, 200, 500, 1000, 2000, 5000, 10000})},
                     {"bootstrap_replicates", 200},
                     {"mh_n", 1000},
                     {"mh_steps", 200000},
                     {"proposal_scale", 2.4}};
  } else if (experiment == "fit") {
    doc["seed"] = 1;
    doc["loss"] = loss_doc("huber");
    doc["data"] = {{"generator", "normal"}, {"n", 100}, {"mean", 0.0}, {"sd", 1.0}};
    doc["params"] = {{"method", "auto"}};
  } else if (experiment == "sample") {
    doc["seed"] = 1;
    doc["loss"] = loss_doc("huber");
    doc["prior"] = {{"name", "flat"}};
    doc["data"] = {{"generator", "normal"}, {"n", 100}, {"mean", 0.0}, {"sd", 1.0}};
    doc["params"] = {{"steps", 20000}, {"burn_in", 4000}, {"proposal_scale", 2.4}};
  } else {
    throw ConfigError("experiment", "unknown experiment '" + std::string(experiment) + "'");
  }
  return doc;
}

LossSpec parse_loss(const json& doc, const std::string& field) {
  check_keys(doc, field, kLossKeys);
  LossSpec s;
  s.name = get_string(doc, "name", field, s.name);
  s.c = get_real(doc, "c", field, s.c);
  s.tau = get_real(doc, "tau", field, s.tau);
  s.kappa = get_real(doc, "kappa", field, s.kappa);
  s.lambda = get_real(doc, "lambda", field, s.lambda);
  if (doc.contains("bias") && !doc.at("bias").is_null()) s.bias = get_real(doc, "bias", field, 0);
  return s;
}

PriorSpec parse_prior(const json& doc, const std::string& field) {
  check_keys(doc, field, kPriorKeys);
  PriorSpec s;
  s.name = get_string(doc, "name", field, s.name);
  s.level = get_real(doc, "level", field, s.level);
  s.mu0 = get_real(doc, "mu0", field, s.mu0);
  s.sigma0_sq = get_real(doc, "sigma0_sq", field, s.sigma0_sq);
  s.b = get_real(doc, "b", field, s.b);
  s.loc = get_real(doc, "loc", field, s.loc);
  s.scale = get_real(doc, "scale", field, s.scale);
  if (doc.contains("support") && !doc.at("support").is_null()) {
    const json& sup = doc.at("support");
    const std::string sf = field + ".support";
    check_keys(sup, sf, kSupportKeys);
    Interval iv;
    iv.lower = get_bound(sup, "lower", sf).value_or(-kInf);
    iv.upper = get_bound(sup, "upper", sf).value_or(kInf);
    iv.lower_open = get_bool(sup, "lower_open", sf);
    iv.upper_open = get_bool(sup, "upper_open", sf);
    if (!(iv.lower < iv.upper)) throw ConfigError(sf, "lower must be below upper");
    s.support = iv;
  }
  return s;
}

DataSpec parse_data(const json& doc, const std::string& field, std::uint64_t default_seed) {
  check_keys(doc, field, kDataKeys);
  DataSpec s;
  s.generator = get_string(doc, "generator", field, s.generator);
  s.n = get_int(doc, "n", field, s.n);
  s.seed = doc.contains("seed") ? get_seed(doc.at("seed"), field + ".seed") : default_seed;
  s.mean = get_real(doc, "mean", field, s.mean);
  s.sd = get_real(doc, "sd", field, s.sd);
  s.rate = get_real(doc, "rate", field, s.rate);
  s.path = get_string(doc, "path", field, s.path);
  if (doc.contains("values")) {
    const json& v = doc.at("values");
    if (!v.is_array()) throw ConfigError(field + ".values", "expected an array of numbers");
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(field + ".values", "expected an array of numbers");
      s.values.push_back(x.get<double>());
    }
  }
  if (s.generator == "normal" || s.generator == "exponential") {
    if (s.n < 1) throw ConfigError(field + ".n", "must be positive");
    if (s.generator == "normal" && !(s.sd > 0.0)) throw ConfigError(field + ".sd", "must be > 0");
    if (s.generator == "exponential" && !(s.rate > 0.0)) {
      throw ConfigError(field + ".rate", "must be > 0");
    }
  } else if (s.generator == "file") {
    if (s.path.empty()) throw ConfigError(field + ".path", "required by the file generator");
  } else if (s.generator == "values") {
    if (s.values.empty()) throw ConfigError(field + ".values", "required by the values generator");
  } else {
    throw ConfigError(field + ".generator", "unknown generator '" + s.generator + "'");
  }
  return s;
}

ExperimentConfig resolve_config(std::string_view experiment, const json& user) {
  json doc = default_config(experiment);
  if (!user.is_null()) {
    if (!user.is_object()) throw ConfigError("config", "expected a JSON object");
    for (const auto& [key, value] : user.items()) {
      if (!doc.contains(key)) throw ConfigError(key, "unknown key");
    }
    if (user.contains("experiment") && user.at("experiment") != doc.at("experiment")) {
      throw ConfigError("experiment", "config is for '" + user.at("experiment").dump() +
                                          "', not '" + std::string(experiment) + "'");
    }
    if (user.contains("params")) check_params(user.at("params"), doc.at("params"));
    doc.merge_patch(user);
  }

  ExperimentConfig c;
  c.experiment = std::string(experiment);
  if (!doc.contains("seed") || doc.at("seed").is_null()) throw ConfigError("seed", "required");
  c.seed = get_seed(doc.at("seed"), "seed");
  c.threads = get_int(doc, "threads", "config", 0);
  if (c.threads < 0) throw ConfigError("threads", "must be nonnegative");
  c.out_dir = get_string(doc, "out", "config", ".");
  if (doc.contains("loss")) c.loss = parse_loss(doc.at("loss"), "loss");
  if (doc.contains("prior")) c.prior = parse_prior(doc.at("prior"), "prior");
  if (doc.contains("data")) {
    c.data = parse_data(doc.at("data"), "data", c.seed);
    doc["data"]["seed"] = c.data.seed;
  }
  c.params = doc.at("params");
  // Constructing the models up front turns bad parameters into config errors.
  if (doc.contains("loss")) make_loss(c.loss);
  if (doc.contains("prior")) make_prior(c.prior);
  c.resolved = doc;
  return c;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", "'" + path + "' is not valid JSON: " + e.what());
  }
}

LossModel make_loss(const LossSpec& s) {
  try {
    LossModel base = [&]() -> LossModel {
      if (s.name == "squared") return squared_loss();
      if (s.name == "huber") return huber_loss(s.c);
      if (s.name == "check") return check_loss(s.tau);
      if (s.name == "absolute") return absolute_loss();
      if (s.name == "huber_skip") return huber_skip_loss();
      if (s.name == "reweighted_gaussian") return reweighted_gaussian_loss(s.kappa, s.lambda);
      if (s.name == "reweighted_exponential") {
        return reweighted_exponential_loss(s.kappa, s.lambda);
      }
      if (s.name == "exponential_huber") return exponential_huber_loss(s.c);
      throw ConfigError("loss.name", "unknown loss '" + s.name + "'");
    }();
    return s.bias ? bias_correct(base, *s.bias) : base;
  } catch (const InvalidArgument& e) {
    throw ConfigError("loss", e.what());
  }
}

PriorModel make_prior(const PriorSpec& s) {
  try {
    PriorModel base = [&]() -> PriorModel {
      if (s.name == "flat") return flat_prior(s.level);
      if (s.name == "gaussian") return gaussian_prior(s.mu0, s.sigma0_sq);
      if (s.name == "laplace") return laplace_prior(s.b, s.loc);
      if (s.name == "cauchy") return cauchy_prior(s.loc, s.scale);
      throw ConfigError("prior.name", "unknown prior '" + s.name + "'");
    }();
    return s.support ? restrict_support(base, *s.support) : base;
  } catch (const InvalidArgument& e) {
    throw ConfigError("prior", e.what());
  }
}

std::vector<double> make_data(const DataSpec& s) { return make_data(s, s.n, s.seed); }

std::vector<double> make_data(const DataSpec& s, int n, std::uint64_t seed) {
  if (s.generator == "file") return read_values(s.path);
  if (s.generator == "values") return s.values;
  if (n < 1) throw ConfigError("data.n", "must be positive");
  std::mt19937_64 rng(seed);
  std::vector<double> out(static_cast<std::size_t>(n));
  if (s.generator == "normal") {
    std::normal_distribution<double> dist(s.mean, s.sd);
    for (auto& x : out) x = dist(rng);
  } else {
    std::exponential_distribution<double> dist(s.rate);
    for (auto& x : out) x = dist(rng);
  }
  return out;
}

double param_real(const ExperimentConfig& config, const std::string& key) {
  const json& v = param(config, key);
  if (!v.is_number() || !std::isfinite(v.get<double>())) {
    throw ConfigError("params." + key, "expected a finite number");
  }
  return v.get<double>();
}

int param_int(const ExperimentConfig& config, const std::string& key) {
  const json& v = param(config, key);
  if (!v.is_number_integer()) throw ConfigError("params." + key, "expected an integer");
  return v.get<int>();
}

std::string param_string(const ExperimentConfig& config, const std::string& key) {
  const json& v = param(config, key);
  if (!v.is_string()) throw ConfigError("params." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> param_reals(const ExperimentConfig& config, const std::string& key) {
  const json& v = param(config, key);
  if (!v.is_array()) throw ConfigError("params." + key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError("params." + key, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<int> param_ints(const ExperimentConfig& config, const std::string& key) {
  const json& v = param(config, key);
  if (!v.is_array()) throw ConfigError("params." + key, "expected an array of integers");
  std::vector<int> out;
  for (const auto& x : v) {
    if (!x.is_number_integer()) {
      throw ConfigError("params." + key, "expected an array of integers");
    }
    out.push_back(x.get<int>());
  }
  return out;
}

}  // namespace mpost::cli
