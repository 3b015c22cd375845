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

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "experiment.hpp"
#include "helpers.hpp"
#include "outputs.hpp"
#include "svg.hpp"

using namespace abmcalib;
namespace fs = std::filesystem;

namespace {

// Tiny but complete configuration: one scenario, reduced iterations.
nlohmann::json tiny_config(const std::string& out) {
  nlohmann::json j = {
      {"seed", 11},
      {"out", out},
      {"workers", 1},
      {"grid",
       {{"years", {10}}, {"parcels", {25}}, {"modes", {"individual"}}}},
      {"sampler",
       {{"warmup_iters", 400},
        {"production_iters", 2500},
        {"mle_starts", 2}}},
      {"selection",
       {{"bridge_samples", 500},
        {"waic_samples", 400},
        {"mc_correction_draws", 20000}}},
      {"hindcast", {{"draws", 40}}},
  };
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("config parsing, defaults and validation") {
  SUBCASE("defaults fill in and seed is mandatory") {
    nlohmann::json j = nlohmann::json::object();
    ExperimentConfig cfg = ExperimentConfig::from_json(j);
    CHECK(cfg.sampler.production_iters == 150000);
    CHECK(cfg.selection.bridge_samples == 5000);
    CHECK(cfg.hindcast_draws == 500);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // no seed
    cfg.has_seed = true;
    cfg.master_seed = 1;
    CHECK_NOTHROW(cfg.validate());
  }
  SUBCASE("unknown keys are flagged") {
    nlohmann::json j = {{"seed", 1}, {"wat", 2}};
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
  }
  SUBCASE("unsupported grid values need the custom flag") {
    nlohmann::json j = {{"seed", 1},
                        {"grid", {{"years", {12}}, {"parcels", {25}}}}};
    ExperimentConfig cfg = ExperimentConfig::from_json(j);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    j["custom"] = true;
    ExperimentConfig ok = ExperimentConfig::from_json(j);
    CHECK_NOTHROW(ok.validate());
  }
  SUBCASE("parcels must match a subdomain mask") {
    nlohmann::json j = {{"seed", 1},
                        {"custom", true},
                        {"grid", {{"years", {10}}, {"parcels", {30}}}}};
    ExperimentConfig cfg = ExperimentConfig::from_json(j);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}

TEST_CASE("scenario grid and filter") {
  ExperimentConfig cfg =
      ExperimentConfig::from_json(nlohmann::json{{"seed", 5}});
  Engine engine(cfg);
  SUBCASE("default grid is 3 x 3 x 2 = 18 scenarios") {
    CHECK(engine.scenarios("").size() == 18);
  }
  SUBCASE("exact filter selects one scenario") {
    const auto picked = engine.scenarios("50x100:individual");
    REQUIRE(picked.size() == 1);
    CHECK(picked[0].years == 50);
    CHECK(picked[0].parcels == 100);
    CHECK(picked[0].mode == DataMode::Individual);
    CHECK(picked[0].id() == "y50_p100_individual");
  }
  SUBCASE("mode-only and pair filters") {
    CHECK(engine.scenarios(":aggregate").size() == 9);
    CHECK(engine.scenarios("25x50").size() == 2);
    CHECK(engine.scenarios("10x25:individual,25x50:aggregate").size() == 2);
    CHECK(engine.scenarios("99x25").empty());
  }
  SUBCASE("bad filters raise config errors") {
    CHECK_THROWS_AS(engine.scenarios("bogus"), ConfigError);
  }
}

TEST_CASE("pseudo-observation generation is consistent and deterministic") {
  ExperimentConfig cfg =
      ExperimentConfig::from_json(nlohmann::json{{"seed", 17}});
  Engine engine(cfg);
  Scenario s;
  s.years = 25;
  s.parcels = 50;
  s.mode = DataMode::Individual;

  auto [ind, agg] = engine.generate_pseudo_observations(s);
  CHECK(ind.years == 25);
  CHECK(ind.n_parcels() == 50);
  SUBCASE("aggregate counts are column sums of vacancies") {
    for (int t = 0; t <= 25; ++t) {
      int vacant = 0;
      for (auto st : ind.individual[static_cast<std::size_t>(t)])
        vacant += st ? 0 : 1;
      CHECK(agg.counts[static_cast<std::size_t>(t)] == vacant);
    }
  }
  SUBCASE("same seed, same digest; different mode shares the data") {
    auto [ind2, agg2] = engine.generate_pseudo_observations(s);
    CHECK(observations_digest(ind2) == observations_digest(ind));
    Scenario s_agg = s;
    s_agg.mode = DataMode::Aggregate;
    auto [ind3, agg3] = engine.generate_pseudo_observations(s_agg);
    CHECK(observations_digest(ind3) == observations_digest(ind));
  }
  SUBCASE("the realization is typical for the generating ensemble") {
    // final-year vacant count within the 1..99 percentile band of a
    // 1000-run ensemble
    const ParcelDomain sub =
        engine.domain().restricted(engine.domain().subdomain_index(50));
    std::vector<double> finals;
    RngStream base(424242);
    for (int run = 0; run < 1000; ++run) {
      RngStream rng = base.child("run", static_cast<std::uint64_t>(run));
      const Trajectory traj = simulate_forward(
          sub, cfg.generating, engine.floods(),
          ModelVariant::SpatialInteractions, 25, rng);
      int vacant = 0;
      for (auto st : traj.back()) vacant += st ? 0 : 1;
      finals.push_back(vacant);
    }
    std::sort(finals.begin(), finals.end());
    const double lo = finals[static_cast<std::size_t>(0.01 * 1000)];
    const double hi = finals[static_cast<std::size_t>(0.99 * 1000) - 1];
    const double observed = agg.counts.back();
    CHECK(observed >= lo);
    CHECK(observed <= hi);
  }
}

TEST_CASE("smoke scenario end to end with outputs") {
  const fs::path out = fs::temp_directory_path() / "abmcalib-test-smoke";
  fs::remove_all(out);
  ExperimentConfig cfg = ExperimentConfig::from_json(tiny_config(out.string()));
  Engine engine(cfg);
  const auto results = engine.run(RunStage::Grid, "");
  REQUIRE(results.size() == 1);
  const ScenarioResult& r = results[0];
  REQUIRE_FALSE(r.failed);
  CHECK(r.id == "y10_p25_individual");
  CHECK(r.flagged);  // 25-parcel scenarios are flagged
  REQUIRE(r.variants.size() == 2);
  CHECK(r.has_comparison);

  SUBCASE("expected files exist") {
    for (const char* f :
         {"domain.csv", "floods.csv", "summary.csv",
          "y10_p25_individual/data.csv", "y10_p25_individual/result.json",
          "y10_p25_individual/chain_none.csv",
          "y10_p25_individual/chain_spatial.csv",
          "y10_p25_individual/chain_none.json",
          "y10_p25_individual/hindcast_spatial.csv",
          "y10_p25_individual/plots/hindcast_none.svg",
          "y10_p25_individual/plots/density_spatial_beta1.svg",
          "plots/logbf.svg"})
      CHECK_MESSAGE(fs::exists(out / f), f);
  }

  SUBCASE("result json carries the published fields") {
    const nlohmann::json j =
        nlohmann::json::parse(slurp(out / "y10_p25_individual/result.json"));
    CHECK(j.at("scenario").at("id") == "y10_p25_individual");
    CHECK(j.at("status") == "ok");
    CHECK(j.at("data").contains("digest"));
    for (const char* variant : {"none", "spatial"}) {
      const auto& v = j.at("variants").at(variant);
      CHECK(v.contains("mle"));
      CHECK(v.contains("posterior"));
      CHECK(v.at("posterior").contains("beta1"));
      CHECK(v.contains("log_ml"));
      CHECK(v.contains("log_ml_se"));
      CHECK(v.contains("waic"));
      CHECK(v.at("waic").contains("p_waic"));
      CHECK(v.at("waic").at("p_waic").get<double>() >= 0.0);
      CHECK(v.contains("ess"));
    }
    const auto& c = j.at("comparison");
    CHECK(c.contains("log_bf_spatial_vs_none"));
    CHECK(c.contains("evidence"));
    CHECK(c.contains("delta_waic_spatial_minus_none"));
    CHECK(c.contains("delta_waic_se"));
  }

  SUBCASE("emitted svg files parse as xml") {
    for (const auto& entry :
         fs::recursive_directory_iterator(out)) {
      if (entry.path().extension() == ".svg")
        CHECK_MESSAGE(testutil::xml_well_formed(slurp(entry.path())),
                      entry.path().string());
    }
  }

  SUBCASE("chain csv header matches the variant") {
    const std::string none_csv = slurp(out / "y10_p25_individual/chain_none.csv");
    CHECK(none_csv.rfind("iter,beta0,beta1,alpha,log_post,accepted\n", 0) == 0);
    const std::string spatial_csv =
        slurp(out / "y10_p25_individual/chain_spatial.csv");
    CHECK(spatial_csv.rfind("iter,beta0,beta1,beta2,alpha,log_post,accepted\n",
                            0) == 0);
  }

  SUBCASE("chains carry a symmetric positive-definite proposal") {
    for (const auto& v : r.variants) {
      CHECK(v.chain.length() == static_cast<int>(v.chain.accepted.size()));
      CHECK(v.chain.length() == v.chain.log_post.size());
      const Eigen::MatrixXd& c = v.chain.proposal_cov;
      CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-10);
      Eigen::LLT<Eigen::MatrixXd> llt(c);
      CHECK(llt.info() == Eigen::Success);
    }
  }

  SUBCASE("prior hindcast band is at least as wide as the posterior band") {
    const VariantOutput* spatial =
        r.variant_output(ModelVariant::SpatialInteractions);
    REQUIRE(spatial);
    REQUIRE(spatial->has_hindcast);
    double prior_width = 0.0, post_width = 0.0;
    for (std::size_t t = 0; t < spatial->hindcast.posterior.size(); ++t) {
      prior_width +=
          spatial->hindcast.prior[t][4] - spatial->hindcast.prior[t][0];
      post_width +=
          spatial->hindcast.posterior[t][4] - spatial->hindcast.posterior[t][0];
    }
    CHECK(prior_width >= post_width);
  }

  fs::remove_all(out);
}

TEST_CASE("density plot ranges cover prior and posterior quantiles") {
  PriorDist prior{PriorDist::Kind::Normal, 19.0, 2.0};
  std::vector<double> samples;
  RngStream rng(5150);
  for (int i = 0; i < 5000; ++i) samples.push_back(25.0 + 0.5 * rng.normal());
  const auto [lo, hi] = svg::density_plot_range(prior, samples);
  CHECK(lo <= prior.quantile(0.001));
  CHECK(hi >= prior.quantile(0.999));
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  CHECK(lo <= sorted.front());
  CHECK(hi >= sorted[static_cast<std::size_t>(0.999 * sorted.size())]);
}

TEST_CASE("summary csv is empty-filter aware and deterministic in form") {
  ExperimentConfig cfg =
      ExperimentConfig::from_json(nlohmann::json{{"seed", 5}});
  Engine engine(cfg);
  const fs::path out = fs::temp_directory_path() / "abmcalib-test-empty";
  fs::remove_all(out);
  cfg.out_dir = out.string();
  Engine engine2(cfg);
  const auto results = engine2.run(RunStage::Generate, "99x25");
  CHECK(results.empty());
  CHECK_FALSE(fs::exists(out));  // no files for an empty selection
}

TEST_CASE("degenerate chain collapses the hindcast to one ensemble") {
  ExperimentConfig cfg = ExperimentConfig::from_json(tiny_config("unused"));
  cfg.hindcast_draws = 60;
  Engine engine(cfg);
  const ParcelDomain sub =
      engine.domain().restricted(engine.domain().subdomain_index(25));
  Scenario s;
  s.years = 10;
  s.parcels = 25;
  s.mode = DataMode::Individual;
  auto [ind, agg] = engine.generate_pseudo_observations(s);
  const LikelihoodContext ctx(ind, engine.floods(), sub,
                              ModelVariant::SpatialInteractions);

  PosteriorChain chain;
  chain.variant = ModelVariant::SpatialInteractions;
  const Eigen::VectorXd theta =
      pack_params(cfg.generating, ModelVariant::SpatialInteractions);
  chain.samples = theta.transpose().replicate(2000, 1);
  chain.log_post = Eigen::VectorXd::Zero(2000);
  chain.accepted.assign(2000, 1);
  chain.proposal_cov = Eigen::MatrixXd::Identity(4, 4);

  RngStream rng(8181);
  const HindcastBands bands =
      engine.hindcast_bands(ctx, chain, sub, chain.variant, rng);

  // Oracle: the same parameter point simulated over the same per-draw
  // streams gives exactly these quantiles.
  std::vector<std::vector<double>> counts(
      11, std::vector<double>(60, 0.0));
  for (int m = 0; m < 60; ++m) {
    RngStream sim_rng = RngStream::derive(rng.seed(), "posterior-sim",
                                          static_cast<std::uint64_t>(m));
    const Trajectory traj =
        simulate_forward(sub, cfg.generating, engine.floods(),
                         ModelVariant::SpatialInteractions, 10, sim_rng);
    for (int t = 0; t <= 10; ++t) {
      int vacant = 0;
      for (auto st : traj[static_cast<std::size_t>(t)]) vacant += st ? 0 : 1;
      counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)] = vacant;
    }
  }
  for (int t = 0; t <= 10; ++t) {
    std::sort(counts[static_cast<std::size_t>(t)].begin(),
              counts[static_cast<std::size_t>(t)].end());
    const auto& row = counts[static_cast<std::size_t>(t)];
    auto q = [&](double p) {
      const double h = p * (row.size() - 1.0);
      const auto lo = static_cast<std::size_t>(h);
      const double frac = h - static_cast<double>(lo);
      return lo + 1 < row.size() ? row[lo] * (1 - frac) + row[lo + 1] * frac
                                 : row.back();
    };
    CHECK(bands.posterior[static_cast<std::size_t>(t)][0] ==
          doctest::Approx(q(0.05)));
    CHECK(bands.posterior[static_cast<std::size_t>(t)][2] ==
          doctest::Approx(q(0.50)));
    CHECK(bands.posterior[static_cast<std::size_t>(t)][4] ==
          doctest::Approx(q(0.95)));
  }
}

TEST_CASE("replicates multiply scenarios with distinct realizations") {
  nlohmann::json j = tiny_config("unused");
  j["replicates"] = 3;
  ExperimentConfig cfg = ExperimentConfig::from_json(j);
  Engine engine(cfg);
  const auto list = engine.scenarios("");
  REQUIRE(list.size() == 3);
  CHECK(list[0].id() == "y10_p25_individual_r00");
  CHECK(list[2].id() == "y10_p25_individual_r02");
  auto [a0, g0] = engine.generate_pseudo_observations(list[0]);
  auto [a1, g1] = engine.generate_pseudo_observations(list[1]);
  CHECK(observations_digest(a0) != observations_digest(a1));
}

TEST_CASE("scenario failures are isolated, not fatal") {
  ExperimentConfig cfg = ExperimentConfig::from_json(tiny_config("unused"));
  Engine engine(cfg);
  Scenario broken;
  broken.years = 500;  // beyond the generated flood record
  broken.parcels = 25;
  broken.mode = DataMode::Individual;
  const ScenarioResult r = engine.run_scenario(broken, RunStage::Calibrate);
  CHECK(r.failed);
  CHECK_FALSE(r.error.empty());
}

TEST_CASE("conditional-transition flag flows from the config") {
  nlohmann::json j = tiny_config("unused");
  j["likelihood"] = {{"conditional_individual", true}};
  ExperimentConfig cfg = ExperimentConfig::from_json(j);
  CHECK(cfg.likelihood.conditional_individual);
}

TEST_CASE("environment seed fixes the world independent of the master seed") {
  nlohmann::json ja = tiny_config("unused");
  nlohmann::json jb = tiny_config("unused");
  jb["seed"] = 77;  // different master seed
  Engine a(ExperimentConfig::from_json(ja));
  Engine b(ExperimentConfig::from_json(jb));
  CHECK(a.floods().observed == b.floods().observed);
  for (int i = 0; i < a.domain().size(); ++i)
    CHECK(a.domain().parcels[static_cast<std::size_t>(i)].elevation ==
          b.domain().parcels[static_cast<std::size_t>(i)].elevation);
  // but the pseudo-data differs
  Scenario s;
  s.years = 10;
  s.parcels = 25;
  s.mode = DataMode::Individual;
  auto [ia, ga] = a.generate_pseudo_observations(s);
  auto [ib, gb] = b.generate_pseudo_observations(s);
  CHECK(observations_digest(ia) != observations_digest(ib));
}

TEST_CASE("generate stage writes data without chains") {
  const fs::path out = fs::temp_directory_path() / "abmcalib-test-gen";
  fs::remove_all(out);
  ExperimentConfig cfg = ExperimentConfig::from_json(tiny_config(out.string()));
  Engine engine(cfg);
  const auto results = engine.run(RunStage::Generate, "");
  REQUIRE(results.size() == 1);
  CHECK_FALSE(results[0].failed);
  CHECK(fs::exists(out / "y10_p25_individual/data.csv"));
  CHECK(fs::exists(out / "y10_p25_individual/result.json"));
  CHECK_FALSE(fs::exists(out / "y10_p25_individual/chain_none.csv"));
  fs::remove_all(out);
}

TEST_SUITE_END();
