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

#include "likelihood.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "common.hpp"
#include "stats.hpp"

namespace abmcalib {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double PriorDist::logpdf(double x) const {
  return kind == Kind::Normal ? stats::normal_logpdf(x, a, b)
                              : stats::beta_logpdf(x, a, b);
}

double PriorDist::sample(RngStream& rng) const {
  return kind == Kind::Normal ? a + b * rng.normal() : rng.beta(a, b);
}

double PriorDist::quantile(double p) const {
  return kind == Kind::Normal ? a + b * stats::normal_quantile(p)
                              : stats::beta_quantile(p, a, b);
}

double PriorDist::stddev() const {
  if (kind == Kind::Normal) return b;
  const double s = a + b;
  return std::sqrt(a * b / (s * s * (s + 1.0)));
}

ModelParams PriorSpec::sample(ModelVariant v, RngStream& rng) const {
  ModelParams p;
  p.beta0 = beta0.sample(rng);
  p.beta1 = beta1.sample(rng);
  if (v == ModelVariant::SpatialInteractions) p.beta2 = beta2.sample(rng);
  p.alpha = alpha.sample(rng);
  return p;
}

const PriorDist& PriorSpec::component(int index, ModelVariant v) const {
  const int d = param_count(v);
  if (index < 0 || index >= d)
    throw std::out_of_range("PriorSpec: component index");
  if (index == 0) return beta0;
  if (index == 1) return beta1;
  if (index == d - 1) return alpha;
  return beta2;
}

double log_prior(const ModelParams& params, const PriorSpec& prior,
                 ModelVariant variant) {
  if ((variant == ModelVariant::SpatialInteractions) != params.beta2.has_value())
    throw std::invalid_argument(
        "log_prior: beta2 must be present exactly for the "
        "spatial-interactions variant");
  // Out-of-support values are impossible, not erroneous.
  if (!(params.alpha >= 0.0 && params.alpha <= 1.0)) return kNegInf;
  double lp = prior.beta0.logpdf(params.beta0) + prior.beta1.logpdf(params.beta1);
  if (variant == ModelVariant::SpatialInteractions)
    lp += prior.beta2.logpdf(*params.beta2);
  lp += prior.alpha.logpdf(params.alpha);
  return lp;
}

LikelihoodContext::LikelihoodContext(const ObservationSet& obs,
                                     const FloodSeries& floods,
                                     const ParcelDomain& domain,
                                     ModelVariant variant,
                                     LikelihoodOptions opts)
    : variant_(variant), obs_(obs), domain_(domain), opts_(opts) {
  obs_.validate();
  if (obs_.parcel_ids.empty()) {
    for (const auto& p : domain_.parcels) obs_.parcel_ids.push_back(p.id);
  }
  if (obs_.n_parcels() != domain_.size())
    throw ConfigError(
        str_format("likelihood: %d observed parcels but domain has %d",
                   obs_.n_parcels(), domain_.size()));
  for (int i = 0; i < domain_.size(); ++i)
    if (obs_.parcel_ids[static_cast<std::size_t>(i)] !=
        domain_.parcels[static_cast<std::size_t>(i)].id)
      throw ConfigError("likelihood: observed parcel ids do not match domain");
  if (floods.years() < obs_.years)
    throw ConfigError("likelihood: flood record shorter than observations");
  if (!(opts_.initial_p_vacant >= 0.0 && opts_.initial_p_vacant <= 1.0))
    throw ConfigError("likelihood: initial vacancy probability outside [0,1]");

  const FloodExceedance exceed(domain_, floods);
  if (obs_.mode == DataMode::Individual) {
    const auto tables = covariates_from_states(obs_.individual, domain_, exceed);
    r_ = tables.r;
    v_ = tables.v;
  } else {
    if (opts_.conditional_individual)
      throw ConfigError(
          "likelihood: conditional transitions require individual data");
    r_ = exogenous_flood_rates(exceed, obs_.years);
  }
}

int LikelihoodContext::n_data() const {
  return obs_.mode == DataMode::Individual ? obs_.years * domain_.size()
                                           : obs_.years;
}

template <class Visitor>
void LikelihoodContext::propagate(const ModelParams& params,
                                  Visitor&& visit) const {
  const int years = obs_.years;
  const int n = domain_.size();
  const double p0v = opts_.initial_p_vacant;
  const double alpha = params.alpha;
  const bool spatial = variant_ == ModelVariant::SpatialInteractions;
  const double b2 = spatial ? params.beta2.value() : 0.0;

  if (obs_.mode == DataMode::Individual) {
    for (int i = 0; i < n; ++i) {
      double pv = p0v;
      for (int t = 1; t <= years; ++t) {
        const double y =
            params.beta0 + params.beta1 * r_(t, i) + b2 * v_(t, i);
        const double p10 = inverse_logit(y);
        pv = (1.0 - alpha) * pv + p10 * (1.0 - pv);
        visit(t, i, pv);
      }
    }
    return;
  }

  // Aggregate data: parcels are coupled through the mean-field neighbor
  // term, so propagate all of them year by year (synchronously).
  std::vector<double> pv(static_cast<std::size_t>(n), p0v);
  std::vector<double> pv_next(static_cast<std::size_t>(n), 0.0);
  for (int t = 1; t <= years; ++t) {
    for (int i = 0; i < n; ++i) {
      double v = 0.0;
      if (spatial) {
        const auto& nb = domain_.adjacency[static_cast<std::size_t>(i)];
        if (!nb.empty()) {
          double s = 0.0;
          for (int j : nb) s += pv[static_cast<std::size_t>(j)];
          v = s / static_cast<double>(nb.size());
        }
      }
      const double y = params.beta0 + params.beta1 * r_(t, i) + b2 * v;
      const double p10 = inverse_logit(y);
      pv_next[static_cast<std::size_t>(i)] =
          (1.0 - alpha) * pv[static_cast<std::size_t>(i)] +
          p10 * (1.0 - pv[static_cast<std::size_t>(i)]);
    }
    std::swap(pv, pv_next);
    for (int i = 0; i < n; ++i) visit(t, i, pv[static_cast<std::size_t>(i)]);
  }
}

Eigen::MatrixXd LikelihoodContext::marginal_vacancy_probs(
    const ModelParams& params) const {
  params.validate(variant_);
  Eigen::MatrixXd table(obs_.years + 1, domain_.size());
  table.row(0).setConstant(opts_.initial_p_vacant);
  propagate(params, [&](int t, int i, double pv) { table(t, i) = pv; });
  return table;
}

double LikelihoodContext::log_lik(const ModelParams& params) const {
  params.validate(variant_);
  const int n = domain_.size();

  if (obs_.mode == DataMode::Individual && opts_.conditional_individual) {
    double total = 0.0;
    const double alpha = params.alpha;
    const double b2 = variant_ == ModelVariant::SpatialInteractions
                          ? params.beta2.value()
                          : 0.0;
    for (int i = 0; i < n; ++i) {
      for (int t = 1; t <= obs_.years; ++t) {
        const bool prev = obs_.individual[static_cast<std::size_t>(t - 1)]
                                         [static_cast<std::size_t>(i)] != 0;
        const bool cur = obs_.individual[static_cast<std::size_t>(t)]
                                        [static_cast<std::size_t>(i)] != 0;
        if (prev) {
          const double p10 = inverse_logit(params.beta0 +
                                           params.beta1 * r_(t, i) +
                                           b2 * v_(t, i));
          total += cur ? std::log1p(-p10) : std::log(p10);
        } else {
          total += cur ? std::log(alpha) : std::log1p(-alpha);
        }
      }
    }
    return total;
  }

  if (obs_.mode == DataMode::Individual) {
    double total = 0.0;
    propagate(params, [&](int t, int i, double pv) {
      const bool occupied = obs_.individual[static_cast<std::size_t>(t)]
                                           [static_cast<std::size_t>(i)] != 0;
      total += occupied ? std::log1p(-pv) : std::log(pv);
    });
    return total;
  }

  std::vector<double> lambda(static_cast<std::size_t>(obs_.years) + 1, 0.0);
  propagate(params,
            [&](int t, int /*i*/, double pv) { lambda[static_cast<std::size_t>(t)] += pv; });
  double total = 0.0;
  for (int t = 1; t <= obs_.years; ++t) {
    const double lam = lambda[static_cast<std::size_t>(t)];
    const int k = obs_.counts[static_cast<std::size_t>(t)];
    if (lam <= 0.0) {
      if (k > 0) return kNegInf;
      continue;  // k == 0 contributes -lambda == 0
    }
    total += k * std::log(lam) - lam - std::lgamma(static_cast<double>(k) + 1.0);
  }
  return total;
}

Eigen::VectorXd LikelihoodContext::pointwise_log_lik(
    const ModelParams& params) const {
  params.validate(variant_);
  const int n = domain_.size();
  Eigen::VectorXd out(n_data());

  if (obs_.mode == DataMode::Individual && opts_.conditional_individual) {
    const double alpha = params.alpha;
    const double b2 = variant_ == ModelVariant::SpatialInteractions
                          ? params.beta2.value()
                          : 0.0;
    for (int i = 0; i < n; ++i) {
      for (int t = 1; t <= obs_.years; ++t) {
        const bool prev = obs_.individual[static_cast<std::size_t>(t - 1)]
                                         [static_cast<std::size_t>(i)] != 0;
        const bool cur = obs_.individual[static_cast<std::size_t>(t)]
                                        [static_cast<std::size_t>(i)] != 0;
        double term;
        if (prev) {
          const double p10 = inverse_logit(params.beta0 +
                                           params.beta1 * r_(t, i) +
                                           b2 * v_(t, i));
          term = cur ? std::log1p(-p10) : std::log(p10);
        } else {
          term = cur ? std::log(alpha) : std::log1p(-alpha);
        }
        out((t - 1) * n + i) = term;
      }
    }
    return out;
  }

  if (obs_.mode == DataMode::Individual) {
    propagate(params, [&](int t, int i, double pv) {
      const bool occupied = obs_.individual[static_cast<std::size_t>(t)]
                                           [static_cast<std::size_t>(i)] != 0;
      out((t - 1) * n + i) = occupied ? std::log1p(-pv) : std::log(pv);
    });
    return out;
  }

  std::vector<double> lambda(static_cast<std::size_t>(obs_.years) + 1, 0.0);
  propagate(params,
            [&](int t, int /*i*/, double pv) { lambda[static_cast<std::size_t>(t)] += pv; });
  for (int t = 1; t <= obs_.years; ++t) {
    const double lam = lambda[static_cast<std::size_t>(t)];
    const int k = obs_.counts[static_cast<std::size_t>(t)];
    if (lam <= 0.0) {
      out(t - 1) = k > 0 ? kNegInf : 0.0;
      continue;
    }
    out(t - 1) =
        k * std::log(lam) - lam - std::lgamma(static_cast<double>(k) + 1.0);
  }
  return out;
}

double LikelihoodContext::log_posterior(const ModelParams& params,
                                        const PriorSpec& prior) const {
  const double lp = log_prior(params, prior, variant_);
  if (!std::isfinite(lp)) return kNegInf;
  const double ll = log_lik(params);
  if (!std::isfinite(ll)) return kNegInf;
  return lp + ll;
}

Eigen::MatrixXd marginal_vacancy_probs(const ModelParams& params,
                                       const ObservationSet& obs,
                                       const FloodSeries& floods,
                                       const ParcelDomain& domain,
                                       ModelVariant variant) {
  return LikelihoodContext(obs, floods, domain, variant)
      .marginal_vacancy_probs(params);
}

double log_lik_individual(const ModelParams& params, const ObservationSet& obs,
                          const FloodSeries& floods, const ParcelDomain& domain,
                          ModelVariant variant) {
  if (obs.mode != DataMode::Individual)
    throw std::invalid_argument("log_lik_individual: individual data required");
  return LikelihoodContext(obs, floods, domain, variant).log_lik(params);
}

double log_lik_aggregate(const ModelParams& params, const ObservationSet& obs,
                         const FloodSeries& floods, const ParcelDomain& domain,
                         ModelVariant variant) {
  if (obs.mode != DataMode::Aggregate)
    throw std::invalid_argument("log_lik_aggregate: aggregate data required");
  return LikelihoodContext(obs, floods, domain, variant).log_lik(params);
}

double log_posterior(const ModelParams& params, const ObservationSet& obs,
                     const FloodSeries& floods, const ParcelDomain& domain,
                     const PriorSpec& prior, ModelVariant variant) {
  if (obs.years == 0) return log_prior(params, prior, variant);
  return LikelihoodContext(obs, floods, domain, variant)
      .log_posterior(params, prior);
}

}  // namespace abmcalib
