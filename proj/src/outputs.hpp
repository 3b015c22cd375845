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

#ifndef ABMCALIB_OUTPUTS_HPP
#define ABMCALIB_OUTPUTS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "experiment.hpp"

namespace abmcalib {

// All emitted files are deterministic functions of (config, master seed):
// fixed float formatting, fixed key ordering, no timestamps.

void write_domain_csv(const ParcelDomain& domain, std::ostream& out);
void write_floods_csv(const FloodSeries& floods, std::ostream& out);
void write_chain_csv(const PosteriorChain& chain, std::ostream& out);
void write_hindcast_csv(const HindcastBands& bands,
                        const std::vector<int>& observed, std::ostream& out);
void write_summary_csv(const std::vector<ScenarioResult>& results,
                       std::ostream& out);

nlohmann::json chain_sidecar_json(const VariantOutput& v,
                                  const SamplerConfig& sampler);
nlohmann::json result_json(const ScenarioResult& r, const ExperimentConfig& cfg);

/// Creates the output directory and verifies it is writable (probe file).
void prepare_output_dir(const std::string& out_dir);

void write_environment_outputs(const ParcelDomain& domain,
                               const FloodSeries& floods,
                               const std::string& out_dir);

/// Writes `<out>/<scenario_id>/{data.csv, chain_*.csv/.json, result.json,
/// hindcast_*.csv, plots/*.svg}` as far as the stage produced them.
void write_scenario_outputs(const ScenarioResult& r, const ExperimentConfig& cfg,
                            RunStage stage);

/// Writes `<out>/summary.csv` and the cross-scenario evidence chart.
void write_grid_outputs(const std::vector<ScenarioResult>& results,
                        const ExperimentConfig& cfg);

}  // namespace abmcalib

#endif
