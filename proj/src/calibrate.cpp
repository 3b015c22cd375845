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

#include "calibrate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "optim.hpp"

namespace abmcalib {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Keeps logit(alpha) finite when an optimizer walks toward the boundary.
constexpr double kAlphaFloor = 1e-12;
}  // namespace

std::vector<std::string> param_names(ModelVariant v) {
  if (v == ModelVariant::SpatialInteractions)
    return {"beta0", "beta1", "beta2", "alpha"};
  return {"beta0", "beta1", "alpha"};
}

Eigen::VectorXd pack_params(const ModelParams& p, ModelVariant v) {
  p.validate(v);
  Eigen::VectorXd x(param_count(v));
  x(0) = p.beta0;
  x(1) = p.beta1;
  if (v == ModelVariant::SpatialInteractions) {
    x(2) = *p.beta2;
    x(3) = p.alpha;
  } else {
    x(2) = p.alpha;
  }
  return x;
}

ModelParams unpack_params(const Eigen::VectorXd& x, ModelVariant v) {
  if (x.size() != param_count(v))
    throw std::invalid_argument("unpack_params: dimension mismatch");
  ModelParams p;
  p.beta0 = x(0);
  p.beta1 = x(1);
  if (v == ModelVariant::SpatialInteractions) {
    p.beta2 = x(2);
    p.alpha = x(3);
  } else {
    p.alpha = x(2);
  }
  return p;
}

Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& natural) {
  Eigen::VectorXd x = natural;
  const auto last = x.size() - 1;
  const double a =
      std::clamp(natural(last), kAlphaFloor, 1.0 - kAlphaFloor);
  x(last) = logit(a);
  return x;
}

Eigen::VectorXd to_natural(const Eigen::VectorXd& unconstrained) {
  Eigen::VectorXd x = unconstrained;
  const auto last = x.size() - 1;
  x(last) = inverse_logit(unconstrained(last));
  return x;
}

ModelParams find_mle(const std::function<double(const ModelParams&)>& objective,
                     const PriorSpec& prior, ModelVariant variant, int starts,
                     RngStream& rng, double* best_value) {
  if (starts <= 0) throw std::invalid_argument("find_mle: starts must be >= 1");
  auto unconstrained_objective = [&](const Eigen::VectorXd& x) {
    return objective(unpack_params(to_natural(x), variant));
  };

  bool any_finite = false;
  NelderMeadResult best;
  best.value = kNegInf;
  for (int s = 0; s < starts; ++s) {
    const ModelParams draw = prior.sample(variant, rng);
    const Eigen::VectorXd start =
        to_unconstrained(pack_params(draw, variant));
    if (!std::isfinite(unconstrained_objective(start))) continue;
    any_finite = true;
    NelderMeadResult res =
        nelder_mead_maximize(unconstrained_objective, start, 0.5, 1e-8, 5000);
    if (res.value > best.value) best = res;
  }
  if (!any_finite || !std::isfinite(best.value))
    throw std::runtime_error(
        "find_mle: objective was -inf at every prior draw; check priors and "
        "data for inconsistency");
  if (best_value) *best_value = best.value;
  return unpack_params(to_natural(best.x), variant);
}

ModelParams PosteriorChain::params_at(int i) const {
  return unpack_params(samples.row(i).transpose(), variant);
}

double PosteriorChain::acceptance_rate() const {
  if (accepted.empty()) return 0.0;
  double s = 0.0;
  for (auto a : accepted) s += a ? 1.0 : 0.0;
  return s / static_cast<double>(accepted.size());
}

CalibrationResult calibrate(const LikelihoodContext& ctx, const PriorSpec& prior,
                            const SamplerConfig& cfg, RngStream& rng) {
  cfg.validate();
  const ModelVariant variant = ctx.variant();
  const int d = param_count(variant);

  // Log-posterior in the sampling space, with the logit Jacobian.
  auto logpost_unconstrained = [&](const Eigen::VectorXd& x) {
    const double alpha = inverse_logit(x(x.size() - 1));
    if (alpha <= 0.0 || alpha >= 1.0) return kNegInf;
    const ModelParams p = unpack_params(to_natural(x), variant);
    const double lp = ctx.log_posterior(p, prior);
    if (!std::isfinite(lp)) return kNegInf;
    return lp + std::log(alpha) + std::log1p(-alpha);
  };

  CalibrationResult out;

  RngStream mle_rng = rng.child("mle");
  auto likelihood_objective = [&](const ModelParams& p) {
    return ctx.log_lik(p);
  };
  out.mle = find_mle(likelihood_objective, prior, variant, cfg.mle_starts,
                     mle_rng, &out.mle_objective);

  ModelParams init = out.mle;
  init.alpha = std::clamp(init.alpha, 1e-9, 1.0 - 1e-9);
  Eigen::VectorXd x0 = to_unconstrained(pack_params(init, variant));
  if (!std::isfinite(logpost_unconstrained(x0))) {
    // MLE can sit outside the prior support edge cases; fall back to the
    // prior center which always has positive density.
    ModelParams center;
    center.beta0 = prior.beta0.a;
    center.beta1 = prior.beta1.a;
    if (variant == ModelVariant::SpatialInteractions) center.beta2 = prior.beta2.a;
    center.alpha = 0.05;
    x0 = to_unconstrained(pack_params(center, variant));
  }

  RngStream warmup_rng = rng.child("warmup");
  auto [state, cov] =
      adaptive_warmup(logpost_unconstrained, x0, cfg, warmup_rng);

  RngStream prod_rng = rng.child("production");
  Chain raw = metropolis_run(logpost_unconstrained, state, cov, cfg, prod_rng);

  PosteriorChain& chain = out.chain;
  chain.variant = variant;
  chain.samples.resize(raw.length(), d);
  chain.log_post.resize(raw.length());
  chain.accepted = raw.accepted;
  chain.proposal_cov = raw.proposal_cov;
  chain.seed = raw.seed;
  for (int i = 0; i < raw.length(); ++i) {
    const Eigen::VectorXd natural = to_natural(raw.samples.row(i).transpose());
    chain.samples.row(i) = natural.transpose();
    const double alpha = natural(d - 1);
    chain.log_post(i) =
        raw.log_post(i) - std::log(alpha) - std::log1p(-alpha);
  }

  out.diagnostics =
      chain_diagnostics(chain.samples, chain.accepted, param_names(variant));
  return out;
}

}  // namespace abmcalib
