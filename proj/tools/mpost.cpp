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


#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mposterior/cli/config.hpp"
#include "mposterior/cli/experiments.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace mpost::cli;
  CLI::App app{"Run M-posterior experiments and write CSV/JSON results."};
  app.set_version_flag("--version", MPOSTERIOR_VERSION);
  app.require_subcommand(1, 1);
  app.fallthrough();

  Flags flags;
  app.add_option("--config", flags.config, "JSON config document")->envname("MPOST_CONFIG");
  app.add_option("--seed", flags.seed, "Master seed")->envname("MPOST_SEED");
  app.add_option("--out", flags.out, "Output directory")->envname("MPOST_OUT");
  app.add_option("--threads", flags.threads, "Worker thread cap (0 = hardware)")
      ->envname("MPOST_THREADS")
      ->check(CLI::NonNegativeNumber);

  const std::pair<const char*, const char*> commands[] = {
      {"pif", "Posterior influence function curves"},
      {"breakdown", "Breakdown sweeps and contaminated posterior densities"},
      {"bvm", "Bernstein-von Mises total-variation ladder"},
      {"bias", "Bias-corrected exponential-Huber estimator and MH chains"},
      {"fit", "Point M-estimate or quantile-regression fit"},
      {"sample", "Random-walk Metropolis-Hastings chain"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    nlohmann::json user = flags.config.empty() ? nlohmann::json::object() : load_json(flags.config);
    if (flags.seed) user["seed"] = *flags.seed;
    if (flags.out) user["out"] = *flags.out;
    if (flags.threads) user["threads"] = *flags.threads;
    const ExperimentConfig config = resolve_config(experiment, user);
    const RunResult result = run_experiment(config);
    for (const auto& f : result.files) std::cout << config.out_dir << "/" << f << '\n';
    std::cout << config.out_dir << "/manifest.json\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "mpost " << experiment << ": " << e.what() << '\n';
    return exit_code_for(e);
  }
}
