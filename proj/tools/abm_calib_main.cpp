// Copyright (c) the abm-calib authors
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

// Command-line front end; everything runs through the shared C API.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "abmcalib.h"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string only;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int replicates = 0;
  int workers = -1;
};

int run_command(const std::string& command, const Options& opt) {
  abmcalib_engine* engine = nullptr;
  abmcalib_status st = abmcalib_engine_create(opt.config.c_str(), &engine);
  if (st != ABMCALIB_OK) {
    std::fprintf(stderr, "error: cannot load config '%s'\n",
                 opt.config.c_str());
    return 1;
  }

  if (opt.has_seed)
    abmcalib_engine_set(engine, "seed", std::to_string(opt.seed).c_str());
  if (!opt.out.empty())
    abmcalib_engine_set(engine, "out",
                        nlohmann::json(opt.out).dump().c_str());
  if (opt.replicates > 0)
    abmcalib_engine_set(engine, "replicates",
                        std::to_string(opt.replicates).c_str());
  if (opt.workers >= 0)
    abmcalib_engine_set(engine, "workers",
                        std::to_string(opt.workers).c_str());

  st = abmcalib_engine_run(engine, command.c_str(),
                           opt.only.empty() ? nullptr : opt.only.c_str());

  int exit_code = 0;
  switch (st) {
    case ABMCALIB_OK:
      exit_code = 0;
      break;
    case ABMCALIB_ERROR_PARTIAL:
      exit_code = 2;
      break;
    case ABMCALIB_ERROR_CONFIG:
      exit_code = 1;
      break;
    default:
      exit_code = 1;
      break;
  }

  if (st == ABMCALIB_OK || st == ABMCALIB_ERROR_PARTIAL) {
    const int n = abmcalib_engine_scenario_count(engine);
    if (n == 0) {
      std::printf("no scenarios match the filter; nothing written\n");
    } else {
      const nlohmann::json rows =
          nlohmann::json::parse(abmcalib_engine_summary_json(engine));
      for (const auto& row : rows) {
        std::string line = row.at("id").get<std::string>() + ": " +
                           row.at("status").get<std::string>();
        if (row.contains("log_bf"))
          line += "  logBF=" +
                  std::to_string(row.at("log_bf").get<double>()) + " (" +
                  row.at("evidence").get<std::string>() + ")";
        if (row.contains("error"))
          line += "  [" + row.at("error").get<std::string>() + "]";
        std::printf("%s\n", line.c_str());
        std::fprintf(stderr, "%s: %.1fs\n", row.at("id").get<std::string>().c_str(),
                     row.at("wall_seconds").get<double>());
      }
    }
  }
  if (st != ABMCALIB_OK) {
    std::fprintf(stderr, "error: %s\n", abmcalib_engine_last_error(engine));
  }
  abmcalib_engine_destroy(engine);
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "abm-calib: pseudo-data generation, Bayesian calibration and model "
      "comparison for a flood-driven housing-abandonment ABM"};
  app.require_subcommand(1);

  Options opt;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"generate", "write the domain, flood record and pseudo-observations"},
      {"calibrate", "generate data and run MCMC for each model variant"},
      {"select", "calibrate plus marginal likelihoods, Bayes factors, WAIC"},
      {"hindcast", "calibrate plus posterior-predictive hindcasts"},
      {"grid", "full scenario grid with all stages and the summary table"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "master seed (overrides config)")
        ->each([&](const std::string&) { opt.has_seed = true; });
    sub->add_option("--out", opt.out, "output directory (overrides config)");
    sub->add_option("--only", opt.only,
                    "scenario filter, e.g. 50x100:individual");
    sub->add_option("--replicates", opt.replicates,
                    "pseudo-data replicates per scenario");
    sub->add_option("--workers", opt.workers, "worker threads (0 = all cores)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  return run_command(command, opt);
}
