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

#ifndef ABMCALIB_LIKELIHOOD_HPP
#define ABMCALIB_LIKELIHOOD_HPP

#include <string>

#include <Eigen/Dense>

#include "flood.hpp"
#include "model.hpp"
#include "observations.hpp"
#include "rng.hpp"

namespace abmcalib {

struct PriorDist {
  enum class Kind { Normal, Beta } kind = Kind::Normal;
  double a = 0.0;  // mean (Normal) or first shape (Beta)
  double b = 1.0;  // sd (Normal) or second shape (Beta)

  double logpdf(double x) const;
  double sample(RngStream& rng) const;
  double quantile(double p) const;
  double stddev() const;
};

struct PriorSpec {
  PriorDist beta0{PriorDist::Kind::Normal, -7.0, 1.0};
  PriorDist beta1{PriorDist::Kind::Normal, 19.0, 2.0};
  PriorDist beta2{PriorDist::Kind::Normal, 5.0, 2.0};
  PriorDist alpha{PriorDist::Kind::Beta, 1.0, 10.0};

  ModelParams sample(ModelVariant v, RngStream& rng) const;
  const PriorDist& component(int index, ModelVariant v) const;
};

double log_prior(const ModelParams& params, const PriorSpec& prior,
                 ModelVariant variant);

struct LikelihoodOptions {
  // Replace the marginal per-observation probabilities with the Markov
  // transition probabilities conditional on the previous observed state
  // (sensitivity study; individual mode only).
  bool conditional_individual = false;
  double initial_p_vacant = 0.01;
};

// Precomputed evaluation state for one data set. Immutable once built and
// safe to share across threads.
//
// Covariates feeding the vacancy recursion depend on the data mode:
// individual records supply the flood rate (with occupancy resets) and the
// neighbor vacancy fraction directly from the observed states, while
// aggregate records fall back to exogenous flood rates and a mean-field
// neighbor term built from the propagated vacancy probabilities.
class LikelihoodContext {
public:
  LikelihoodContext(const ObservationSet& obs, const FloodSeries& floods,
                    const ParcelDomain& domain, ModelVariant variant,
                    LikelihoodOptions opts = {});

  ModelVariant variant() const { return variant_; }
  DataMode mode() const { return obs_.mode; }
  int years() const { return obs_.years; }
  int parcels() const { return domain_.size(); }
  const ObservationSet& observations() const { return obs_; }

  /// Number of pointwise likelihood terms (parcel-years or years).
  int n_data() const;

  /// Vacancy probability table, rows 0..years (row 0 is the fixed initial
  /// distribution), one column per parcel.
  Eigen::MatrixXd marginal_vacancy_probs(const ModelParams& params) const;

  double log_lik(const ModelParams& params) const;
  Eigen::VectorXd pointwise_log_lik(const ModelParams& params) const;
  double log_posterior(const ModelParams& params, const PriorSpec& prior) const;

private:
  template <class Visitor>
  void propagate(const ModelParams& params, Visitor&& visit) const;

  ModelVariant variant_;
  ObservationSet obs_;
  ParcelDomain domain_;
  LikelihoodOptions opts_;
  Eigen::MatrixXd r_;  // (years+1) x parcels
  Eigen::MatrixXd v_;  // observed neighbor vacancy (individual mode only)
};

// Free-function forms assembling a context per call (convenient for tests
// and small data; the pipeline keeps a context alive instead).
Eigen::MatrixXd marginal_vacancy_probs(const ModelParams& params,
                                       const ObservationSet& obs,
                                       const FloodSeries& floods,
                                       const ParcelDomain& domain,
                                       ModelVariant variant);
double log_lik_individual(const ModelParams& params, const ObservationSet& obs,
                          const FloodSeries& floods, const ParcelDomain& domain,
                          ModelVariant variant);
double log_lik_aggregate(const ModelParams& params, const ObservationSet& obs,
                         const FloodSeries& floods, const ParcelDomain& domain,
                         ModelVariant variant);
double log_posterior(const ModelParams& params, const ObservationSet& obs,
                     const FloodSeries& floods, const ParcelDomain& domain,
                     const PriorSpec& prior, ModelVariant variant);

}  // namespace abmcalib

#endif
