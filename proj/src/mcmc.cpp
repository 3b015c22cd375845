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

#include "mcmc.hpp"

#include <cmath>
#include <stdexcept>

#include "common.hpp"
#include "stats.hpp"

namespace abmcalib {

void SamplerConfig::validate() const {
  if (warmup_iters < 0 || production_iters <= 0)
    throw ConfigError("sampler: iteration counts must be positive");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw ConfigError("sampler: target acceptance must be in (0,1)");
  if (!(adaptation_decay > 0.0 && adaptation_decay <= 1.0))
    throw ConfigError("sampler: adaptation decay must be in (0,1]");
  if (thin <= 0) throw ConfigError("sampler: thin must be >= 1");
  if (burnin < 0) throw ConfigError("sampler: burnin must be >= 0");
  if (mle_starts <= 0) throw ConfigError("sampler: mle_starts must be >= 1");
  if (!(init_step > 0.0)) throw ConfigError("sampler: init_step must be > 0");
}

double Chain::acceptance_rate() const {
  if (accepted.empty()) return 0.0;
  double s = 0.0;
  for (auto a : accepted) s += a ? 1.0 : 0.0;
  return s / static_cast<double>(accepted.size());
}

namespace {

Eigen::VectorXd standard_normal_vector(int d, RngStream& rng) {
  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z(i) = rng.normal();
  return z;
}

Eigen::MatrixXd cholesky_or_throw(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(
        str_format("%s: covariance not positive-definite", what));
  return llt.matrixL();
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::MatrixXd> adaptive_warmup(
    const LogDensity& logpost, const Eigen::VectorXd& init,
    const SamplerConfig& cfg, RngStream& rng,
    const Eigen::MatrixXd* initial_cov) {
  cfg.validate();
  const int d = static_cast<int>(init.size());

  Eigen::MatrixXd factor;
  if (initial_cov) {
    factor = cholesky_or_throw(*initial_cov, "adaptive_warmup");
  } else {
    factor = cfg.init_step * Eigen::MatrixXd::Identity(d, d);
  }

  Eigen::VectorXd x = init;
  double lp = logpost(x);
  if (!std::isfinite(lp))
    throw std::invalid_argument(
        "adaptive_warmup: log-density not finite at the initial state");

  int resets = 0;
  for (int t = 1; t <= cfg.warmup_iters; ++t) {
    const Eigen::VectorXd u = standard_normal_vector(d, rng);
    const Eigen::VectorXd step = factor * u;
    const Eigen::VectorXd proposal = x + step;
    const double lp_prop = logpost(proposal);
    double accept_prob = 0.0;
    if (std::isfinite(lp_prop))
      accept_prob = std::min(1.0, std::exp(lp_prop - lp));
    if (rng.uniform01() < accept_prob) {
      x = proposal;
      lp = lp_prop;
    }

    // Rank-one shape update: S S^T <- S (I + eta (a - a*) u u^T / |u|^2) S^T.
    const double eta = std::min(
        1.0, static_cast<double>(d) * std::pow(static_cast<double>(t),
                                               -cfg.adaptation_decay));
    const double coef = eta * (accept_prob - cfg.target_accept);
    const double u2 = u.squaredNorm();
    if (u2 > 0.0) {
      Eigen::MatrixXd updated =
          factor * factor.transpose() +
          (coef / u2) * step * step.transpose();
      Eigen::LLT<Eigen::MatrixXd> llt(updated);
      if (llt.info() == Eigen::Success) {
        factor = llt.matrixL();
      } else {
        ++resets;  // keep the last valid factor
      }
    }
  }
  if (resets > 0)
    log_warn(str_format("adaptive warm-up: %d non-positive-definite updates "
                        "skipped",
                        resets));
  return {x, factor * factor.transpose()};
}

Chain metropolis_run(const LogDensity& logpost, const Eigen::VectorXd& init,
                     const Eigen::MatrixXd& proposal_cov,
                     const SamplerConfig& cfg, RngStream& rng) {
  cfg.validate();
  const int d = static_cast<int>(init.size());
  if (proposal_cov.rows() != d || proposal_cov.cols() != d)
    throw std::invalid_argument("metropolis_run: proposal dimension mismatch");
  const Eigen::MatrixXd factor = cholesky_or_throw(proposal_cov, "metropolis_run");

  Eigen::VectorXd x = init;
  double lp = logpost(x);
  if (!std::isfinite(lp))
    throw std::invalid_argument(
        "metropolis_run: log-density not finite at the initial state");

  const int recorded_total = cfg.production_iters / cfg.thin;
  const int kept = std::max(0, recorded_total - cfg.burnin);

  Chain chain;
  chain.samples.resize(kept, d);
  chain.log_post.resize(kept);
  chain.accepted.reserve(static_cast<std::size_t>(kept));
  chain.proposal_cov = proposal_cov;
  chain.seed = rng.seed();

  int recorded = 0;
  for (int t = 1; t <= cfg.production_iters; ++t) {
    const Eigen::VectorXd proposal =
        x + factor * standard_normal_vector(d, rng);
    const double lp_prop = logpost(proposal);
    bool accepted = false;
    if (std::isfinite(lp_prop) &&
        std::log(rng.uniform01()) < lp_prop - lp) {
      x = proposal;
      lp = lp_prop;
      accepted = true;
    }
    if (t % cfg.thin == 0) {
      const int slot = recorded - cfg.burnin;
      if (slot >= 0 && slot < kept) {
        chain.samples.row(slot) = x.transpose();
        chain.log_post(slot) = lp;
        chain.accepted.push_back(accepted ? 1 : 0);
      }
      ++recorded;
    }
  }
  return chain;
}

ChainDiagnostics chain_diagnostics(const Eigen::MatrixXd& samples,
                                   const std::vector<std::uint8_t>& accepted,
                                   const std::vector<std::string>& names) {
  const int n = static_cast<int>(samples.rows());
  const int d = static_cast<int>(samples.cols());
  if (n == 0) throw std::invalid_argument("chain_diagnostics: empty chain");

  ChainDiagnostics diag;
  diag.params.reserve(static_cast<std::size_t>(d));
  std::vector<double> col(static_cast<std::size_t>(n));
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = samples(i, j);
    ParamSummary s;
    s.name = j < static_cast<int>(names.size()) ? names[static_cast<std::size_t>(j)]
                                                : str_format("param%d", j);
    s.mean = stats::mean(col);
    s.sd = stats::sd(col);
    s.q5 = stats::quantile(col, 0.05);
    s.q50 = stats::quantile(col, 0.50);
    s.q95 = stats::quantile(col, 0.95);
    s.ess = stats::effective_sample_size(col);
    diag.params.push_back(std::move(s));
  }
  double acc = 0.0;
  for (auto a : accepted) acc += a ? 1.0 : 0.0;
  diag.acceptance_rate =
      accepted.empty() ? 0.0 : acc / static_cast<double>(accepted.size());
  return diag;
}

}  // namespace abmcalib
