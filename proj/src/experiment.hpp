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

#ifndef ABMCALIB_EXPERIMENT_HPP
#define ABMCALIB_EXPERIMENT_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "calibrate.hpp"
#include "flood.hpp"
#include "likelihood.hpp"
#include "mcmc.hpp"
#include "model.hpp"
#include "observations.hpp"
#include "selection.hpp"

namespace abmcalib {

struct SelectionConfig {
  int bridge_samples = 5000;
  int waic_samples = 10000;
  int mc_correction_draws = 100000;

  void validate() const;
};

struct ExperimentConfig {
  DomainConfig domain;
  // Seeds the synthetic setting (parcel layout and flood record). Kept
  // apart from the master seed so different master seeds rerun the
  // experiment in the same world. The default selects the reference
  // setting: moderate early flooding followed by steady growth of vacancy
  // over the full record.
  std::uint64_t environment_seed = 16;
  GevParams gev;
  ModelParams generating =
      ModelParams::make(ModelVariant::SpatialInteractions, -6.0, 20.0, 4.0, 0.01);
  std::vector<int> years_grid{10, 25, 50};
  std::vector<int> parcels_grid{25, 50, 100};
  std::vector<DataMode> modes{DataMode::Individual, DataMode::Aggregate};
  std::vector<ModelVariant> variants{ModelVariant::NoInteractions,
                                     ModelVariant::SpatialInteractions};
  int spin_up_years = 50;
  PriorSpec priors;
  LikelihoodOptions likelihood;  // conditional-transition sensitivity flag
  SamplerConfig sampler;
  SelectionConfig selection;
  int hindcast_draws = 500;
  bool has_seed = false;
  std::uint64_t master_seed = 0;
  std::string out_dir = "out";
  int workers = 0;  // 0 = all hardware threads
  int replicates = 1;
  bool allow_custom = false;  // lift the supported years/parcels grid check

  void validate() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
};

struct Scenario {
  int years = 0;
  int parcels = 0;
  DataMode mode = DataMode::Individual;
  int replicate = 0;
  int total_replicates = 1;

  std::string id() const;        // e.g. y50_p100_individual[_r02]
  std::string data_key() const;  // shared by both data modes
};

/// Filter syntax: comma-separated terms "<years>x<parcels>[:<mode>]" or
/// ":<mode>"; empty string matches everything.
bool matches_filter(const Scenario& s, const std::string& filter);

enum class RunStage { Generate, Calibrate, Hindcast, Select, Grid };

RunStage run_stage_from_name(const std::string& name);
bool stage_has_calibration(RunStage s);
bool stage_has_selection(RunStage s);
bool stage_has_hindcast(RunStage s);

struct HindcastBands {
  // One row per year 0..Y, columns (q5, q25, q50, q75, q95).
  std::vector<std::array<double, 5>> posterior;
  std::vector<std::array<double, 5>> prior;
};

struct VariantOutput {
  ModelVariant variant = ModelVariant::NoInteractions;
  ModelParams mle;
  double mle_loglik = 0.0;
  PosteriorChain chain;
  ChainDiagnostics diagnostics;
  std::optional<double> loglik_at_generating;  // spatial variant only
  bool has_selection = false;
  MarginalLikelihoodEstimate logml;
  WaicResult waic;
  bool has_hindcast = false;
  HindcastBands hindcast;
};

struct ScenarioResult {
  Scenario scenario;
  std::string id;
  bool failed = false;
  std::string error;
  bool flagged = false;  // small-domain estimates are reported but flagged
  std::string data_digest;
  ObservationSet observations;      // the calibrated mode's view
  std::vector<int> vacant_counts;   // per year 0..Y, from the generating run
  std::vector<VariantOutput> variants;
  bool has_comparison = false;
  BayesFactorResult bayes;  // spatial (a) vs no-interactions (b)
  double waic_delta = 0.0;  // waic_spatial - waic_none
  double waic_delta_se = 0.0;
  double wall_seconds = 0.0;  // reported on stderr only, never serialized

  const VariantOutput* variant_output(ModelVariant v) const;
};

// Deterministic experiment runner. The domain and flood record are built
// once from the master seed; per-scenario work draws from hashed
// sub-streams so results do not depend on scheduling or worker count.
class Engine {
public:
  explicit Engine(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const ParcelDomain& domain() const { return domain_; }
  const FloodSeries& floods() const { return floods_; }

  std::vector<Scenario> scenarios(const std::string& only_filter) const;

  /// One simulation of the data-generating (spatial) model on the
  /// scenario's subdomain; returns (individual view, aggregate view).
  std::pair<ObservationSet, ObservationSet> generate_pseudo_observations(
      const Scenario& s) const;

  ScenarioResult run_scenario(const Scenario& s, RunStage stage,
                              int inner_workers = 1) const;

  /// Posterior-predictive (and prior-predictive) vacant-count bands from
  /// parameter draws taken evenly along the chain, one forward simulation
  /// per draw on the scenario's flood record.
  HindcastBands hindcast_bands(const LikelihoodContext& ctx,
                               const PosteriorChain& chain,
                               const ParcelDomain& sub, ModelVariant variant,
                               RngStream& rng, int inner_workers = 1) const;

  /// Runs the filtered scenario list and writes all artifacts under the
  /// configured output directory. Failed scenarios are recorded, not fatal.
  std::vector<ScenarioResult> run(RunStage stage,
                                  const std::string& only_filter);

private:
  ParcelDomain scenario_domain(const Scenario& s) const;

  ExperimentConfig cfg_;
  ParcelDomain domain_;
  FloodSeries floods_;
};

}  // namespace abmcalib

#endif
