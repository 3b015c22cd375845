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

#include "outputs.hpp"

#include <filesystem>
#include <fstream>

#include "common.hpp"
#include "observations.hpp"
#include "svg.hpp"

namespace abmcalib {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double x) { return str_format("%.17g", x); }
std::string num_short(double x) { return str_format("%.10g", x); }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

template <class WriterFn>
void write_stream(const fs::path& path, WriterFn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  fn(out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_domain_csv(const ParcelDomain& domain, std::ostream& out) {
  out << "id,row,col,return_period,elevation";
  for (int s : domain.subdomain_sizes) out << ",mask_" << s;
  out << '\n';
  for (int i = 0; i < domain.size(); ++i) {
    const Parcel& p = domain.parcels[static_cast<std::size_t>(i)];
    out << p.id << ',' << p.row << ',' << p.col << ','
        << num_short(p.return_period) << ',' << num_short(p.elevation);
    for (const auto& mask : domain.subdomain_masks)
      out << ',' << int(mask[static_cast<std::size_t>(i)]);
    out << '\n';
  }
}

void write_floods_csv(const FloodSeries& floods, std::ostream& out) {
  out << "year,annual_max\n";
  for (int year = -(floods.spin_up_years() - 1); year <= floods.years(); ++year)
    out << year << ',' << num_short(floods.level(year)) << '\n';
}

void write_chain_csv(const PosteriorChain& chain, std::ostream& out) {
  const auto names = param_names(chain.variant);
  out << "iter";
  for (const auto& n : names) out << ',' << n;
  out << ",log_post,accepted\n";
  for (int i = 0; i < chain.length(); ++i) {
    out << (i + 1);
    for (int j = 0; j < chain.dim(); ++j) out << ',' << num(chain.samples(i, j));
    out << ',' << num(chain.log_post(i)) << ','
        << int(chain.accepted[static_cast<std::size_t>(i)]) << '\n';
  }
}

void write_hindcast_csv(const HindcastBands& bands,
                        const std::vector<int>& observed, std::ostream& out) {
  out << "year,observed,prior_q5,prior_q25,prior_q50,prior_q75,prior_q95,"
         "post_q5,post_q25,post_q50,post_q75,post_q95\n";
  for (std::size_t t = 0; t < bands.posterior.size(); ++t) {
    out << t << ',';
    if (t < observed.size())
      out << observed[t];
    out << ',';
    const auto& pr = bands.prior[t];
    const auto& po = bands.posterior[t];
    out << num_short(pr[0]) << ',' << num_short(pr[1]) << ','
        << num_short(pr[2]) << ',' << num_short(pr[3]) << ','
        << num_short(pr[4]) << ',' << num_short(po[0]) << ','
        << num_short(po[1]) << ',' << num_short(po[2]) << ','
        << num_short(po[3]) << ',' << num_short(po[4]) << '\n';
  }
}

void write_summary_csv(const std::vector<ScenarioResult>& results,
                       std::ostream& out) {
  out << "scenario,years,parcels,mode,status,flagged,data_digest,"
         "log_ml_none,log_ml_none_se,log_ml_spatial,log_ml_spatial_se,"
         "log_bf,evidence,waic_none,waic_spatial,delta_waic,delta_waic_se\n";
  for (const auto& r : results) {
    out << r.id << ',' << r.scenario.years << ',' << r.scenario.parcels << ','
        << data_mode_name(r.scenario.mode) << ','
        << (r.failed ? "failed" : "ok") << ',' << (r.flagged ? 1 : 0) << ','
        << r.data_digest;
    const VariantOutput* none = r.variant_output(ModelVariant::NoInteractions);
    const VariantOutput* spatial =
        r.variant_output(ModelVariant::SpatialInteractions);
    auto field = [&](const VariantOutput* v, auto getter) -> std::string {
      if (!v || !v->has_selection) return "";
      return num_short(getter(*v));
    };
    out << ','
        << field(none, [](const VariantOutput& v) { return v.logml.log_ml; })
        << ','
        << field(none, [](const VariantOutput& v) { return v.logml.std_error; })
        << ','
        << field(spatial, [](const VariantOutput& v) { return v.logml.log_ml; })
        << ','
        << field(spatial,
                 [](const VariantOutput& v) { return v.logml.std_error; });
    if (r.has_comparison) {
      out << ',' << num_short(r.bayes.log_bf) << ',' << r.bayes.label() << ','
          << field(none, [](const VariantOutput& v) { return v.waic.waic; })
          << ','
          << field(spatial, [](const VariantOutput& v) { return v.waic.waic; })
          << ',' << num_short(r.waic_delta) << ',' << num_short(r.waic_delta_se);
    } else {
      out << ",,,,,,";
    }
    out << '\n';
  }
}

json chain_sidecar_json(const VariantOutput& v, const SamplerConfig& sampler) {
  json j;
  j["variant"] = variant_name(v.variant);
  j["seed"] = v.chain.seed;
  j["length"] = v.chain.length();
  j["acceptance_rate"] = v.diagnostics.acceptance_rate;
  j["config"] = {{"warmup_iters", sampler.warmup_iters},
                 {"production_iters", sampler.production_iters},
                 {"target_accept", sampler.target_accept},
                 {"adaptation_decay", sampler.adaptation_decay},
                 {"thin", sampler.thin},
                 {"burnin", sampler.burnin}};
  json ess = json::object();
  json summary = json::object();
  for (const auto& p : v.diagnostics.params) {
    ess[p.name] = p.ess;
    summary[p.name] = {{"mean", p.mean}, {"sd", p.sd},   {"q5", p.q5},
                       {"q50", p.q50},   {"q95", p.q95}};
  }
  j["ess"] = ess;
  j["posterior"] = summary;
  return j;
}

namespace {

json params_json(const ModelParams& p, ModelVariant v) {
  json j;
  j["beta0"] = p.beta0;
  j["beta1"] = p.beta1;
  if (v == ModelVariant::SpatialInteractions) j["beta2"] = *p.beta2;
  j["alpha"] = p.alpha;
  return j;
}

}  // namespace

json result_json(const ScenarioResult& r, const ExperimentConfig& cfg) {
  json j;
  j["scenario"] = {{"id", r.id},
                   {"years", r.scenario.years},
                   {"parcels", r.scenario.parcels},
                   {"mode", data_mode_name(r.scenario.mode)},
                   {"replicate", r.scenario.replicate}};
  j["status"] = r.failed ? "failed" : "ok";
  if (r.failed) j["error"] = r.error;
  j["flagged"] = r.flagged;
  j["data"] = {{"digest", r.data_digest},
               {"final_vacant_count",
                r.vacant_counts.empty() ? 0 : r.vacant_counts.back()}};
  j["master_seed"] = cfg.master_seed;

  json variants = json::object();
  for (const auto& v : r.variants) {
    json vj;
    vj["mle"] = params_json(v.mle, v.variant);
    vj["mle_loglik"] = v.mle_loglik;
    if (v.loglik_at_generating)
      vj["loglik_at_generating"] = *v.loglik_at_generating;
    vj["acceptance_rate"] = v.diagnostics.acceptance_rate;
    json post = json::object();
    json ess = json::object();
    for (const auto& p : v.diagnostics.params) {
      post[p.name] = {{"mean", p.mean}, {"sd", p.sd},   {"q5", p.q5},
                      {"q50", p.q50},   {"q95", p.q95}};
      ess[p.name] = p.ess;
    }
    vj["posterior"] = post;
    vj["ess"] = ess;
    if (v.has_selection) {
      vj["log_ml"] = v.logml.log_ml;
      vj["log_ml_se"] = v.logml.std_error;
      vj["log_ml_converged"] = v.logml.converged;
      vj["log_ml_iterations"] = v.logml.iterations;
      vj["waic"] = {{"waic", v.waic.waic},
                    {"lppd", v.waic.lppd},
                    {"p_waic", v.waic.p_waic},
                    {"n_samples", v.waic.n_samples}};
    }
    variants[variant_name(v.variant)] = vj;
  }
  j["variants"] = variants;

  if (r.has_comparison) {
    j["comparison"] = {{"log_bf_spatial_vs_none", r.bayes.log_bf},
                       {"evidence", r.bayes.label()},
                       {"delta_waic_spatial_minus_none", r.waic_delta},
                       {"delta_waic_se", r.waic_delta_se}};
  }
  return j;
}

void prepare_output_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory " + out_dir +
                             ": " + ec.message());
  const fs::path probe = fs::path(out_dir) / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f)
      throw std::runtime_error("output directory not writable: " + out_dir);
  }
  fs::remove(probe, ec);
}

void write_environment_outputs(const ParcelDomain& domain,
                               const FloodSeries& floods,
                               const std::string& out_dir) {
  write_stream(fs::path(out_dir) / "domain.csv",
               [&](std::ostream& o) { write_domain_csv(domain, o); });
  write_stream(fs::path(out_dir) / "floods.csv",
               [&](std::ostream& o) { write_floods_csv(floods, o); });
}

void write_scenario_outputs(const ScenarioResult& r, const ExperimentConfig& cfg,
                            RunStage stage) {
  const fs::path dir = fs::path(cfg.out_dir) / r.id;
  fs::create_directories(dir);

  write_stream(dir / "data.csv", [&](std::ostream& o) {
    write_observations_csv(r.observations, o);
  });
  write_file(dir / "result.json", result_json(r, cfg).dump(2) + "\n");
  if (r.failed || !stage_has_calibration(stage)) return;

  const fs::path plots = dir / "plots";
  fs::create_directories(plots);

  // Data-generating reference values for the density plots.
  const Eigen::VectorXd generating =
      pack_params(cfg.generating, ModelVariant::SpatialInteractions);

  for (const auto& v : r.variants) {
    const std::string vn = variant_name(v.variant);
    write_stream(dir / ("chain_" + vn + ".csv"),
                 [&](std::ostream& o) { write_chain_csv(v.chain, o); });
    write_file(dir / ("chain_" + vn + ".json"),
               chain_sidecar_json(v, cfg.sampler).dump(2) + "\n");

    const auto names = param_names(v.variant);
    for (int p = 0; p < v.chain.dim(); ++p) {
      std::vector<double> samples(static_cast<std::size_t>(v.chain.length()));
      for (int i = 0; i < v.chain.length(); ++i)
        samples[static_cast<std::size_t>(i)] = v.chain.samples(i, p);
      const PriorDist& prior = cfg.priors.component(p, v.variant);
      // Reference: beta2 has no counterpart in the no-interactions fit.
      double ref;
      if (v.variant == ModelVariant::SpatialInteractions) {
        ref = generating(p);
      } else {
        ref = p == 0 ? cfg.generating.beta0
                     : (p == 1 ? cfg.generating.beta1 : cfg.generating.alpha);
      }
      write_file(plots / ("density_" + vn + "_" +
                          names[static_cast<std::size_t>(p)] + ".svg"),
                 svg::density_plot(r.id + " " + vn + " " +
                                       names[static_cast<std::size_t>(p)],
                                   prior, samples, ref));
    }

    if (v.has_hindcast) {
      write_stream(dir / ("hindcast_" + vn + ".csv"), [&](std::ostream& o) {
        write_hindcast_csv(v.hindcast, r.vacant_counts, o);
      });
      write_file(plots / ("hindcast_" + vn + ".svg"),
                 svg::fan_chart(r.id + " hindcast (" + vn + ")",
                                v.hindcast.prior, v.hindcast.posterior,
                                r.vacant_counts));
    }
  }
}

void write_grid_outputs(const std::vector<ScenarioResult>& results,
                        const ExperimentConfig& cfg) {
  write_stream(fs::path(cfg.out_dir) / "summary.csv",
               [&](std::ostream& o) { write_summary_csv(results, o); });

  std::vector<svg::BarEntry> entries;
  for (const auto& r : results) {
    if (!r.has_comparison) continue;
    svg::BarEntry e;
    e.label = str_format("%dy x %dp %s", r.scenario.years, r.scenario.parcels,
                         r.scenario.mode == DataMode::Individual ? "ind" : "agg");
    e.value = r.bayes.log_bf;
    entries.push_back(std::move(e));
  }
  if (!entries.empty()) {
    const fs::path plots = fs::path(cfg.out_dir) / "plots";
    fs::create_directories(plots);
    write_file(plots / "logbf.svg",
               svg::bar_chart("log Bayes factors: spatial vs no-interactions",
                              "log BF", entries, {1.0, 3.0, 5.0}));
  }
}

}  // namespace abmcalib
