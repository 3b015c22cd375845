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

#ifndef ABMCALIB_SELECTION_HPP
#define ABMCALIB_SELECTION_HPP

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "calibrate.hpp"
#include "mcmc.hpp"
#include "rng.hpp"

namespace abmcalib {

// Multivariate normal fitted to posterior output, optionally truncated to
// [0,1] along one coordinate (the vacancy-fill probability). The
// normalization correction is the log of the probability mass retained by
// the truncation.
struct ImportanceDensity {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::optional<int> trunc_dim;
  double normalization_correction = 0.0;

  double logpdf(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(RngStream& rng) const;

  // cached factorization
  Eigen::MatrixXd chol;
  double log_det_half = 0.0;
};

/// Moment-matched (optionally truncated) normal from posterior samples;
/// the retained mass is estimated with `mc_draws` Monte-Carlo draws.
ImportanceDensity fit_importance_density(const Eigen::MatrixXd& samples,
                                         std::optional<int> trunc_dim,
                                         RngStream& rng, int mc_draws = 100000);
ImportanceDensity fit_importance_density(const PosteriorChain& chain,
                                         RngStream& rng, int mc_draws = 100000);

struct MarginalLikelihoodEstimate {
  double log_ml = 0.0;
  double std_error = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Iterative optimal-bridge estimate of the log marginal likelihood from
// n_samples posterior draws (thinned evenly from `posterior_samples`) and
// n_samples fresh importance draws. `log_q` is the unnormalized
// log-posterior on the natural parameter space; it is re-evaluated at the
// thinned draws. The standard error combines the relative variances of the
// bridge weights, with the posterior-side term inflated by the draws'
// integrated autocorrelation time.
MarginalLikelihoodEstimate bridge_sampling_logml(
    const Eigen::MatrixXd& posterior_samples, const ImportanceDensity& density,
    const LogDensity& log_q, int n_samples, RngStream& rng);
MarginalLikelihoodEstimate bridge_sampling_logml(const PosteriorChain& chain,
                                                 const ImportanceDensity& density,
                                                 const LogDensity& log_q,
                                                 int n_samples, RngStream& rng);

enum class Evidence { Indeterminate, None, Weak, Positive, Strong, VeryStrong };

struct BayesFactorResult {
  double log_bf = 0.0;  // log ml_a - log ml_b
  Evidence category = Evidence::Indeterminate;
  bool favors_b = false;

  /// e.g. "strong", "very strong for model b", "weak/none", "indeterminate".
  std::string label() const;
};

/// Kass-Raftery style categories on the natural-log scale (1 / 3 / 5).
BayesFactorResult log_bayes_factor(const MarginalLikelihoodEstimate& ml_a,
                                   const MarginalLikelihoodEstimate& ml_b);

struct WaicResult {
  double waic = 0.0;
  double lppd = 0.0;
  double p_waic = 0.0;
  Eigen::VectorXd pointwise_lppd;
  Eigen::VectorXd pointwise_p;
  int n_samples = 0;

  Eigen::VectorXd pointwise_waic() const {
    return -2.0 * (pointwise_lppd - pointwise_p);
  }
};

// Streaming accumulator over posterior draws of pointwise log-likelihood
// rows; avoids materializing the S x N table for large data sets.
class WaicAccumulator {
public:
  explicit WaicAccumulator(int n_data);
  void add_draw(const Eigen::VectorXd& pointwise_log_lik);
  WaicResult finalize() const;
  int draws() const { return draws_; }

private:
  int n_ = 0;
  int draws_ = 0;
  Eigen::VectorXd max_, sumexp_, mean_, m2_;
};

/// WAIC from a full S x N pointwise log-likelihood table (S >= 2).
WaicResult waic(const Eigen::MatrixXd& pointwise_log_lik);

/// (waic_a - waic_b, sqrt(N) * sd of pointwise differences).
std::pair<double, double> waic_difference(const WaicResult& a,
                                          const WaicResult& b);

}  // namespace abmcalib

#endif
