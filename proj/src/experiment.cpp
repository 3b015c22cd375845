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

#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "common.hpp"
#include "outputs.hpp"
#include "stats.hpp"
#include "threading.hpp"

namespace abmcalib {

using nlohmann::json;

void SelectionConfig::validate() const {
  if (bridge_samples < 2)
    throw ConfigError("selection: bridge_samples must be >= 2");
  if (waic_samples < 2)
    throw ConfigError("selection: waic_samples must be >= 2");
  if (mc_correction_draws < 1000)
    throw ConfigError("selection: mc_correction_draws must be >= 1000");
}

namespace {

const std::set<int> kSupportedYears{10, 25, 50};
const std::set<int> kSupportedParcels{25, 50, 100};

void check_known_keys(const json& j, const std::set<std::string>& known,
                      const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!known.contains(key))
      throw ConfigError("config: unknown key '" + key + "' in " + where);
}

PriorDist parse_prior(const json& j, const std::string& name) {
  check_known_keys(j, {"dist", "mean", "sd", "a", "b"}, "priors." + name);
  PriorDist d;
  const std::string kind = j.value("dist", "normal");
  if (kind == "normal") {
    d.kind = PriorDist::Kind::Normal;
    d.a = j.value("mean", 0.0);
    d.b = j.value("sd", 1.0);
    if (!(d.b > 0.0)) throw ConfigError("config: prior sd must be > 0");
  } else if (kind == "beta") {
    d.kind = PriorDist::Kind::Beta;
    d.a = j.value("a", 1.0);
    d.b = j.value("b", 1.0);
    if (!(d.a > 0.0 && d.b > 0.0))
      throw ConfigError("config: beta prior shapes must be > 0");
  } else {
    throw ConfigError("config: unknown prior dist '" + kind + "'");
  }
  return d;
}

}  // namespace

void ExperimentConfig::validate() const {
  domain.validate();
  gev.validate();
  generating.validate(ModelVariant::SpatialInteractions);
  sampler.validate();
  selection.validate();
  if (!has_seed)
    throw ConfigError("config: a master seed is required (config key 'seed' "
                      "or --seed)");
  if (years_grid.empty() || parcels_grid.empty() || modes.empty())
    throw ConfigError("config: empty scenario grid");
  if (variants.empty()) throw ConfigError("config: no variants to calibrate");
  if (spin_up_years < 10)
    throw ConfigError("config: spin_up_years must be >= 10 for the "
                      "flood-rate lookback");
  if (hindcast_draws < 2) throw ConfigError("config: hindcast draws must be >= 2");
  if (replicates < 1) throw ConfigError("config: replicates must be >= 1");
  if (workers < 0) throw ConfigError("config: workers must be >= 0");
  if (!allow_custom) {
    for (int y : years_grid)
      if (!kSupportedYears.contains(y))
        throw ConfigError(str_format(
            "config: %d years outside the supported grid (use custom=true)", y));
    for (int p : parcels_grid)
      if (!kSupportedParcels.contains(p))
        throw ConfigError(str_format(
            "config: %d parcels outside the supported grid (use custom=true)",
            p));
  }
  for (int y : years_grid)
    if (y <= 0) throw ConfigError("config: years must be positive");
  const int max_years = *std::max_element(years_grid.begin(), years_grid.end());
  if (max_years <= 0) throw ConfigError("config: years must be positive");
  for (int p : parcels_grid) {
    bool found = false;
    for (int s : domain.subdomain_sizes) found = found || s == p;
    if (!found)
      throw ConfigError(str_format(
          "config: no subdomain mask of %d parcels in the domain", p));
  }
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  check_known_keys(j,
                   {"seed", "environment_seed", "out", "workers", "replicates",
                    "custom", "domain", "gev", "generating_params", "grid",
                    "spin_up_years", "priors", "likelihood", "sampler",
                    "selection", "hindcast", "variants"},
                   "top level");
  ExperimentConfig cfg;

  if (j.contains("seed")) {
    cfg.has_seed = true;
    cfg.master_seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.out_dir = j.value("out", cfg.out_dir);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.replicates = j.value("replicates", cfg.replicates);
  cfg.allow_custom = j.value("custom", cfg.allow_custom);
  cfg.spin_up_years = j.value("spin_up_years", cfg.spin_up_years);
  cfg.environment_seed = j.value("environment_seed", cfg.environment_seed);

  if (j.contains("domain")) {
    const json& d = j.at("domain");
    check_known_keys(d,
                     {"rows", "cols", "return_period_min", "return_period_max",
                      "risk_scatter", "subdomains", "adjacency"},
                     "domain");
    cfg.domain.rows = d.value("rows", cfg.domain.rows);
    cfg.domain.cols = d.value("cols", cfg.domain.cols);
    cfg.domain.return_period_min =
        d.value("return_period_min", cfg.domain.return_period_min);
    cfg.domain.return_period_max =
        d.value("return_period_max", cfg.domain.return_period_max);
    cfg.domain.risk_scatter = d.value("risk_scatter", cfg.domain.risk_scatter);
    if (d.contains("subdomains"))
      cfg.domain.subdomain_sizes = d.at("subdomains").get<std::vector<int>>();
    const std::string adj = d.value("adjacency", "vonneumann");
    if (adj == "vonneumann")
      cfg.domain.adjacency = Adjacency::VonNeumann;
    else if (adj == "moore")
      cfg.domain.adjacency = Adjacency::Moore;
    else
      throw ConfigError("config: adjacency must be vonneumann or moore");
  }

  if (j.contains("gev")) {
    const json& g = j.at("gev");
    check_known_keys(g, {"location", "scale", "shape"}, "gev");
    cfg.gev.location = g.value("location", cfg.gev.location);
    cfg.gev.scale = g.value("scale", cfg.gev.scale);
    cfg.gev.shape = g.value("shape", cfg.gev.shape);
  }

  if (j.contains("generating_params")) {
    const json& g = j.at("generating_params");
    check_known_keys(g, {"beta0", "beta1", "beta2", "alpha"},
                     "generating_params");
    cfg.generating = ModelParams::make(
        ModelVariant::SpatialInteractions, g.value("beta0", -6.0),
        g.value("beta1", 20.0), g.value("beta2", 4.0), g.value("alpha", 0.01));
  }

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_known_keys(g, {"years", "parcels", "modes"}, "grid");
    if (g.contains("years")) cfg.years_grid = g.at("years").get<std::vector<int>>();
    if (g.contains("parcels"))
      cfg.parcels_grid = g.at("parcels").get<std::vector<int>>();
    if (g.contains("modes")) {
      cfg.modes.clear();
      for (const auto& m : g.at("modes"))
        cfg.modes.push_back(data_mode_from_name(m.get<std::string>()));
    }
  }

  if (j.contains("variants")) {
    cfg.variants.clear();
    for (const auto& v : j.at("variants"))
      cfg.variants.push_back(variant_from_name(v.get<std::string>()));
  }

  if (j.contains("priors")) {
    const json& p = j.at("priors");
    check_known_keys(p, {"beta0", "beta1", "beta2", "alpha"}, "priors");
    if (p.contains("beta0")) cfg.priors.beta0 = parse_prior(p.at("beta0"), "beta0");
    if (p.contains("beta1")) cfg.priors.beta1 = parse_prior(p.at("beta1"), "beta1");
    if (p.contains("beta2")) cfg.priors.beta2 = parse_prior(p.at("beta2"), "beta2");
    if (p.contains("alpha")) cfg.priors.alpha = parse_prior(p.at("alpha"), "alpha");
  }

  if (j.contains("likelihood")) {
    const json& l = j.at("likelihood");
    check_known_keys(l, {"conditional_individual"}, "likelihood");
    cfg.likelihood.conditional_individual =
        l.value("conditional_individual", cfg.likelihood.conditional_individual);
  }

  if (j.contains("sampler")) {
    const json& s = j.at("sampler");
    check_known_keys(s,
                     {"warmup_iters", "production_iters", "target_accept",
                      "adaptation_decay", "thin", "burnin", "mle_starts",
                      "init_step"},
                     "sampler");
    cfg.sampler.warmup_iters = s.value("warmup_iters", cfg.sampler.warmup_iters);
    cfg.sampler.production_iters =
        s.value("production_iters", cfg.sampler.production_iters);
    cfg.sampler.target_accept = s.value("target_accept", cfg.sampler.target_accept);
    cfg.sampler.adaptation_decay =
        s.value("adaptation_decay", cfg.sampler.adaptation_decay);
    cfg.sampler.thin = s.value("thin", cfg.sampler.thin);
    cfg.sampler.burnin = s.value("burnin", cfg.sampler.burnin);
    cfg.sampler.mle_starts = s.value("mle_starts", cfg.sampler.mle_starts);
    cfg.sampler.init_step = s.value("init_step", cfg.sampler.init_step);
  }

  if (j.contains("selection")) {
    const json& s = j.at("selection");
    check_known_keys(s, {"bridge_samples", "waic_samples", "mc_correction_draws"},
                     "selection");
    cfg.selection.bridge_samples =
        s.value("bridge_samples", cfg.selection.bridge_samples);
    cfg.selection.waic_samples =
        s.value("waic_samples", cfg.selection.waic_samples);
    cfg.selection.mc_correction_draws =
        s.value("mc_correction_draws", cfg.selection.mc_correction_draws);
  }

  if (j.contains("hindcast")) {
    const json& h = j.at("hindcast");
    check_known_keys(h, {"draws"}, "hindcast");
    cfg.hindcast_draws = h.value("draws", cfg.hindcast_draws);
  }

  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(str_format("config: %s is not valid JSON (%s)",
                                 path.c_str(), e.what()));
  }
  return from_json(j);
}

std::string Scenario::id() const {
  std::string s = str_format("y%d_p%d_%s", years, parcels,
                             data_mode_name(mode).c_str());
  if (total_replicates > 1) s += str_format("_r%02d", replicate);
  return s;
}

std::string Scenario::data_key() const {
  std::string s = str_format("y%d_p%d", years, parcels);
  if (total_replicates > 1) s += str_format("_r%02d", replicate);
  return s;
}

bool matches_filter(const Scenario& s, const std::string& filter) {
  if (filter.empty()) return true;
  std::stringstream ss(filter);
  std::string term;
  while (std::getline(ss, term, ',')) {
    if (term.empty()) continue;
    std::string yp = term;
    std::string mode;
    if (const auto colon = term.find(':'); colon != std::string::npos) {
      yp = term.substr(0, colon);
      mode = term.substr(colon + 1);
    }
    bool ok = true;
    if (!yp.empty()) {
      const auto x = yp.find('x');
      if (x == std::string::npos)
        throw ConfigError("filter: expected <years>x<parcels>[:<mode>], got '" +
                          term + "'");
      try {
        if (std::stoi(yp.substr(0, x)) != s.years) ok = false;
        if (std::stoi(yp.substr(x + 1)) != s.parcels) ok = false;
      } catch (const std::exception&) {
        throw ConfigError("filter: bad numbers in '" + term + "'");
      }
    }
    if (!mode.empty() && data_mode_from_name(mode) != s.mode) ok = false;
    if (ok) return true;
  }
  return false;
}

RunStage run_stage_from_name(const std::string& name) {
  if (name == "generate") return RunStage::Generate;
  if (name == "calibrate") return RunStage::Calibrate;
  if (name == "hindcast") return RunStage::Hindcast;
  if (name == "select") return RunStage::Select;
  if (name == "grid") return RunStage::Grid;
  throw ConfigError("unknown command: " + name);
}

bool stage_has_calibration(RunStage s) { return s != RunStage::Generate; }
bool stage_has_selection(RunStage s) {
  return s == RunStage::Select || s == RunStage::Grid;
}
bool stage_has_hindcast(RunStage s) {
  return s == RunStage::Hindcast || s == RunStage::Grid;
}

const VariantOutput* ScenarioResult::variant_output(ModelVariant v) const {
  for (const auto& out : variants)
    if (out.variant == v) return &out;
  return nullptr;
}

Engine::Engine(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  DomainConfig dc = cfg_.domain;
  dc.seed = RngStream::derive(cfg_.environment_seed, "domain").seed();
  domain_ = generate_domain(dc, cfg_.gev);
  const int max_years =
      *std::max_element(cfg_.years_grid.begin(), cfg_.years_grid.end());
  RngStream flood_rng = RngStream::derive(cfg_.environment_seed, "floods");
  floods_ =
      simulate_flood_series(cfg_.gev, cfg_.spin_up_years, max_years, flood_rng);
}

std::vector<Scenario> Engine::scenarios(const std::string& only_filter) const {
  std::vector<Scenario> all;
  for (int years : cfg_.years_grid)
    for (int parcels : cfg_.parcels_grid)
      for (DataMode mode : cfg_.modes)
        for (int rep = 0; rep < cfg_.replicates; ++rep) {
          Scenario s;
          s.years = years;
          s.parcels = parcels;
          s.mode = mode;
          s.replicate = rep;
          s.total_replicates = cfg_.replicates;
          if (matches_filter(s, only_filter)) all.push_back(s);
        }
  return all;
}

ParcelDomain Engine::scenario_domain(const Scenario& s) const {
  const int idx = domain_.subdomain_index(s.parcels);
  if (idx < 0)
    throw ConfigError(
        str_format("scenario %s: no %d-parcel subdomain", s.id().c_str(),
                   s.parcels));
  return domain_.restricted(idx);
}

std::pair<ObservationSet, ObservationSet> Engine::generate_pseudo_observations(
    const Scenario& s) const {
  const ParcelDomain sub = scenario_domain(s);
  RngStream rng =
      RngStream::derive(cfg_.master_seed, "data/" + s.data_key());
  const Trajectory traj =
      simulate_forward(sub, cfg_.generating, floods_,
                       ModelVariant::SpatialInteractions, s.years, rng);
  std::vector<int> ids;
  ids.reserve(sub.parcels.size());
  for (const auto& p : sub.parcels) ids.push_back(p.id);
  ObservationSet ind = individual_view(traj, ids);
  ObservationSet agg = aggregate_view(ind);
  return {std::move(ind), std::move(agg)};
}

namespace {

std::vector<int> even_rows(int total, int take) {
  std::vector<int> idx(static_cast<std::size_t>(take));
  if (take == 1) {
    idx[0] = total - 1;
    return idx;
  }
  for (int k = 0; k < take; ++k)
    idx[static_cast<std::size_t>(k)] = static_cast<int>(
        (static_cast<long long>(k) * (total - 1)) / (take - 1));
  return idx;
}

WaicResult compute_waic(const LikelihoodContext& ctx, const PosteriorChain& chain,
                        int samples, int workers) {
  const int take = std::min(samples, chain.length());
  const auto idx = even_rows(chain.length(), take);
  WaicAccumulator acc(ctx.n_data());
  const int block = 256;
  std::vector<Eigen::VectorXd> rows(static_cast<std::size_t>(block));
  for (int start = 0; start < take; start += block) {
    const int count = std::min(block, take - start);
    parallel_for(count, workers, [&](int k) {
      rows[static_cast<std::size_t>(k)] = ctx.pointwise_log_lik(
          chain.params_at(idx[static_cast<std::size_t>(start + k)]));
    });
    for (int k = 0; k < count; ++k)
      acc.add_draw(rows[static_cast<std::size_t>(k)]);
  }
  return acc.finalize();
}

std::array<double, 5> year_quantiles(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  return {stats::quantile_sorted(values, 0.05),
          stats::quantile_sorted(values, 0.25),
          stats::quantile_sorted(values, 0.50),
          stats::quantile_sorted(values, 0.75),
          stats::quantile_sorted(values, 0.95)};
}

}  // namespace

ScenarioResult Engine::run_scenario(const Scenario& s, RunStage stage,
                                    int inner_workers) const {
  const auto t_start = std::chrono::steady_clock::now();
  ScenarioResult result;
  result.scenario = s;
  result.id = s.id();
  result.flagged = s.parcels == 25;

  try {
    const ParcelDomain sub = scenario_domain(s);
    auto [ind, agg] = generate_pseudo_observations(s);
    result.vacant_counts = agg.counts;
    result.observations = s.mode == DataMode::Individual ? ind : agg;
    result.data_digest = observations_digest(result.observations);

    if (stage_has_calibration(stage)) {
      for (ModelVariant variant : cfg_.variants) {
        VariantOutput out;
        out.variant = variant;
        LikelihoodOptions lik_opts = cfg_.likelihood;
        if (result.observations.mode != DataMode::Individual)
          lik_opts.conditional_individual = false;
        const LikelihoodContext ctx(result.observations, floods_, sub, variant,
                                    lik_opts);
        RngStream calib_rng = RngStream::derive(
            cfg_.master_seed,
            s.id() + "/calibrate/" + variant_name(variant));
        CalibrationResult calib = calibrate(ctx, cfg_.priors, cfg_.sampler, calib_rng);
        out.mle = calib.mle;
        out.mle_loglik = calib.mle_objective;
        out.chain = std::move(calib.chain);
        out.diagnostics = std::move(calib.diagnostics);
        if (variant == ModelVariant::SpatialInteractions)
          out.loglik_at_generating = ctx.log_lik(cfg_.generating);

        if (stage_has_selection(stage)) {
          RngStream sel_rng = RngStream::derive(
              cfg_.master_seed,
              s.id() + "/selection/" + variant_name(variant));
          RngStream fit_rng = sel_rng.child("importance-fit");
          const ImportanceDensity density = fit_importance_density(
              out.chain, fit_rng, cfg_.selection.mc_correction_draws);
          RngStream bridge_rng = sel_rng.child("bridge");
          auto log_q = [&](const Eigen::VectorXd& theta) {
            const ModelParams p = unpack_params(theta, variant);
            if (p.alpha < 0.0 || p.alpha > 1.0)
              return -std::numeric_limits<double>::infinity();
            return ctx.log_posterior(p, cfg_.priors);
          };
          out.logml = bridge_sampling_logml(out.chain, density, log_q,
                                            cfg_.selection.bridge_samples,
                                            bridge_rng);
          out.waic = compute_waic(ctx, out.chain, cfg_.selection.waic_samples,
                                  inner_workers);
          out.has_selection = true;
        }

        if (stage_has_hindcast(stage)) {
          RngStream hind_rng = RngStream::derive(
              cfg_.master_seed,
              s.id() + "/hindcast/" + variant_name(variant));
          out.hindcast = hindcast_bands(ctx, out.chain, sub, variant, hind_rng,
                                        inner_workers);
          out.has_hindcast = true;
        }
        result.variants.push_back(std::move(out));
      }

      const VariantOutput* spatial =
          result.variant_output(ModelVariant::SpatialInteractions);
      const VariantOutput* none =
          result.variant_output(ModelVariant::NoInteractions);
      if (stage_has_selection(stage) && spatial && none &&
          spatial->has_selection && none->has_selection) {
        result.bayes = log_bayes_factor(spatial->logml, none->logml);
        std::tie(result.waic_delta, result.waic_delta_se) =
            waic_difference(spatial->waic, none->waic);
        result.has_comparison = true;
      }
    }
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

HindcastBands Engine::hindcast_bands(const LikelihoodContext& ctx,
                                     const PosteriorChain& chain,
                                     const ParcelDomain& sub,
                                     ModelVariant variant, RngStream& rng,
                                     int inner_workers) const {
  const int years = ctx.years();
  const int draws = std::min(cfg_.hindcast_draws, chain.length());
  const auto idx = even_rows(chain.length(), draws);

  // vacant-count trajectory per parameter draw, posterior then prior
  Eigen::MatrixXi post_counts(draws, years + 1);
  Eigen::MatrixXi prior_counts(draws, years + 1);
  const std::uint64_t base = rng.seed();

  parallel_for(draws, inner_workers, [&](int m) {
    RngStream post_rng = RngStream::derive(base, "posterior-sim",
                                           static_cast<std::uint64_t>(m));
    const ModelParams p = chain.params_at(idx[static_cast<std::size_t>(m)]);
    const Trajectory traj =
        simulate_forward(sub, p, floods_, variant, years, post_rng);
    for (int t = 0; t <= years; ++t) {
      int vacant = 0;
      for (auto st : traj[static_cast<std::size_t>(t)]) vacant += st ? 0 : 1;
      post_counts(m, t) = vacant;
    }
    RngStream prior_rng = RngStream::derive(base, "prior-sim",
                                            static_cast<std::uint64_t>(m));
    const ModelParams q = cfg_.priors.sample(variant, prior_rng);
    const Trajectory ptraj =
        simulate_forward(sub, q, floods_, variant, years, prior_rng);
    for (int t = 0; t <= years; ++t) {
      int vacant = 0;
      for (auto st : ptraj[static_cast<std::size_t>(t)]) vacant += st ? 0 : 1;
      prior_counts(m, t) = vacant;
    }
  });

  HindcastBands bands;
  bands.posterior.resize(static_cast<std::size_t>(years) + 1);
  bands.prior.resize(static_cast<std::size_t>(years) + 1);
  std::vector<double> column(static_cast<std::size_t>(draws));
  for (int t = 0; t <= years; ++t) {
    for (int m = 0; m < draws; ++m)
      column[static_cast<std::size_t>(m)] = post_counts(m, t);
    bands.posterior[static_cast<std::size_t>(t)] = year_quantiles(column);
    for (int m = 0; m < draws; ++m)
      column[static_cast<std::size_t>(m)] = prior_counts(m, t);
    bands.prior[static_cast<std::size_t>(t)] = year_quantiles(column);
  }
  return bands;
}

std::vector<ScenarioResult> Engine::run(RunStage stage,
                                        const std::string& only_filter) {
  const std::vector<Scenario> list = scenarios(only_filter);
  std::vector<ScenarioResult> results(list.size());
  if (list.empty()) return results;

  prepare_output_dir(cfg_.out_dir);
  write_environment_outputs(domain_, floods_, cfg_.out_dir);

  const int total_workers = cfg_.workers > 0 ? cfg_.workers : default_workers();
  const int outer =
      std::min<int>(total_workers, static_cast<int>(list.size()));
  const int inner = std::max(1, total_workers / outer);

  parallel_for(static_cast<int>(list.size()), outer, [&](int i) {
    ScenarioResult r = run_scenario(list[static_cast<std::size_t>(i)], stage, inner);
    try {
      write_scenario_outputs(r, cfg_, stage);
    } catch (const std::exception& e) {
      if (!r.failed) {
        r.failed = true;
        r.error = std::string("output write failed: ") + e.what();
      }
    }
    results[static_cast<std::size_t>(i)] = std::move(r);
  });

  if (stage == RunStage::Grid) write_grid_outputs(results, cfg_);
  return results;
}

}  // namespace abmcalib
