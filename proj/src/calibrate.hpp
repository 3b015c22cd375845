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

#ifndef ABMCALIB_CALIBRATE_HPP
#define ABMCALIB_CALIBRATE_HPP

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "likelihood.hpp"
#include "mcmc.hpp"
#include "model.hpp"

namespace abmcalib {

std::vector<std::string> param_names(ModelVariant v);

// Natural space: (beta0, beta1[, beta2], alpha).
Eigen::VectorXd pack_params(const ModelParams& p, ModelVariant v);
ModelParams unpack_params(const Eigen::VectorXd& x, ModelVariant v);

// Sampling space replaces alpha with logit(alpha); the Jacobian
// log(alpha (1 - alpha)) is added to the log-posterior during sampling.
Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& natural);
Eigen::VectorXd to_natural(const Eigen::VectorXd& unconstrained);

// Multi-start Nelder-Mead maximization of an arbitrary parameter-space
// objective, run in the unconstrained space with starts drawn from the
// prior. Throws if no start has a finite objective value.
ModelParams find_mle(const std::function<double(const ModelParams&)>& objective,
                     const PriorSpec& prior, ModelVariant variant, int starts,
                     RngStream& rng, double* best_value = nullptr);

// Posterior sample in natural parameter space. log_post holds the
// unnormalized log-posterior (prior + likelihood) without the sampling
// Jacobian; proposal_cov is the unconstrained-space proposal actually used.
struct PosteriorChain {
  ModelVariant variant = ModelVariant::NoInteractions;
  Eigen::MatrixXd samples;
  Eigen::VectorXd log_post;
  std::vector<std::uint8_t> accepted;
  Eigen::MatrixXd proposal_cov;
  std::uint64_t seed = 0;

  int length() const { return static_cast<int>(samples.rows()); }
  int dim() const { return static_cast<int>(samples.cols()); }
  ModelParams params_at(int i) const;
  double acceptance_rate() const;
};

struct CalibrationResult {
  ModelParams mle;
  double mle_objective = 0.0;
  PosteriorChain chain;
  ChainDiagnostics diagnostics;
};

// MLE -> adaptive warm-up -> fixed-proposal production run. Sub-streams
// are derived from `rng` per phase, so results do not depend on how many
// draws each phase consumes.
CalibrationResult calibrate(const LikelihoodContext& ctx, const PriorSpec& prior,
                            const SamplerConfig& cfg, RngStream& rng);

}  // namespace abmcalib

#endif
