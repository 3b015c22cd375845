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

#ifndef ABMCALIB_MCMC_HPP
#define ABMCALIB_MCMC_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace abmcalib {

using LogDensity = std::function<double(const Eigen::VectorXd&)>;

struct SamplerConfig {
  int warmup_iters = 30000;
  int production_iters = 150000;
  double target_accept = 0.234;
  double adaptation_decay = 2.0 / 3.0;
  int thin = 1;
  int burnin = 0;          // recorded states dropped from the front
  int mle_starts = 8;
  double init_step = 0.1;  // initial proposal scale before adaptation

  void validate() const;
};

// Raw sampler output in whatever space the target density lives in.
struct Chain {
  Eigen::MatrixXd samples;   // recorded states, one row per draw
  Eigen::VectorXd log_post;  // target log-density at each draw
  std::vector<std::uint8_t> accepted;
  Eigen::MatrixXd proposal_cov;
  std::uint64_t seed = 0;

  int length() const { return static_cast<int>(samples.rows()); }
  int dim() const { return static_cast<int>(samples.cols()); }
  double acceptance_rate() const;
};

// Robust adaptive Metropolis warm-up (rank-one proposal-shape updates with
// step size min(1, d * t^-decay), steering acceptance toward the target).
// Returns the last state and the adapted proposal covariance.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> adaptive_warmup(
    const LogDensity& logpost, const Eigen::VectorXd& init,
    const SamplerConfig& cfg, RngStream& rng,
    const Eigen::MatrixXd* initial_cov = nullptr);

/// Fixed-proposal random-walk Metropolis-Hastings production run.
Chain metropolis_run(const LogDensity& logpost, const Eigen::VectorXd& init,
                     const Eigen::MatrixXd& proposal_cov,
                     const SamplerConfig& cfg, RngStream& rng);

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q5 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
  double ess = 0.0;
};

struct ChainDiagnostics {
  std::vector<ParamSummary> params;
  double acceptance_rate = 0.0;
};

ChainDiagnostics chain_diagnostics(const Eigen::MatrixXd& samples,
                                   const std::vector<std::uint8_t>& accepted,
                                   const std::vector<std::string>& names);

}  // namespace abmcalib

#endif
