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

#ifndef ABMCALIB_MODEL_HPP
#define ABMCALIB_MODEL_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flood.hpp"
#include "rng.hpp"

namespace abmcalib {

// Two nested decision rules: abandonment driven by experienced flooding
// alone, or by flooding plus the vacancy of neighboring parcels.
enum class ModelVariant { NoInteractions, SpatialInteractions };

int param_count(ModelVariant v);
std::string variant_name(ModelVariant v);
ModelVariant variant_from_name(const std::string& name);

struct ModelParams {
  double beta0 = 0.0;            // logistic intercept
  double beta1 = 0.0;            // flood-frequency coefficient
  std::optional<double> beta2;   // neighboring-vacancy coefficient
  double alpha = 0.0;            // vacancy-fill probability per year

  static ModelParams make(ModelVariant v, double b0, double b1, double b2,
                          double a);

  /// Throws invalid_argument unless the parameter set matches the variant
  /// and alpha lies in [0,1].
  void validate(ModelVariant v) const;
};

struct OccupancyDistribution {
  double p_vacant = 0.0;
  double p_occupied = 1.0;
};

/// 2x2 column-stochastic matrix; columns indexed by previous state
/// (vacant, occupied), rows by next state.
struct TransitionMatrix {
  double m[2][2];
};

/// Numerically stable logistic function; exact down to |y| ~ 700.
double inverse_logit(double y);
double logit(double p);

/// P(occupied -> vacant) for covariates r (flood rate) and v (neighbor
/// vacancy fraction). In strict mode a nonzero v passed to the
/// no-interactions variant is rejected; otherwise v is ignored there.
double abandonment_prob(const ModelParams& params, double r, double v,
                        ModelVariant variant, bool strict = false);

TransitionMatrix transition_matrix(double p10, double p01);

OccupancyDistribution step_marginal(const OccupancyDistribution& dist,
                                    const TransitionMatrix& m);

// Flood rate over the lookback window w = max(10, residency_years):
// (hits in the last w entries) / w. flood_hits is oldest-first. Vacant
// parcels always carry rate 0.
double update_flood_rate(std::span<const std::uint8_t> flood_hits,
                         int residency_years, bool occupied);

/// Fraction of a parcel's neighbors vacant in previous_states (1=occupied).
/// A parcel with no neighbors yields 0 (warned once per process).
double neighbor_vacancy_fraction(int parcel,
                                 std::span<const std::uint8_t> previous_states,
                                 const ParcelDomain& domain);

// Per-parcel exceedance indicators of the flood record against parcel
// elevations, indexed by calendar year -(S-1)..Y.
class FloodExceedance {
public:
  FloodExceedance(const ParcelDomain& domain, const FloodSeries& floods);

  bool hit(int parcel, int year) const {
    return hits_[static_cast<std::size_t>(parcel)]
                [static_cast<std::size_t>(year + spin_up_ - 1)] != 0;
  }
  int spin_up_years() const { return spin_up_; }
  int years() const { return years_; }
  int parcels() const { return static_cast<int>(hits_.size()); }

  /// Full oldest-first hit sequence for one parcel (years -(S-1)..Y).
  std::span<const std::uint8_t> sequence(int parcel) const {
    return hits_[static_cast<std::size_t>(parcel)];
  }

private:
  int spin_up_ = 0;
  int years_ = 0;
  std::vector<std::vector<std::uint8_t>> hits_;
};

// Arrival sentinel for occupants present since before the record began:
// their flood experience extends through the spin-up window.
inline constexpr int kResidentFromStart = std::numeric_limits<int>::min();

// Flood rate used for the year-t transition of a parcel occupied at t-1.
// `arrival` is the year the current occupant moved in (kResidentFromStart
// for year-0 residents). Only floods since arrival count; the window
// denominator is still w = max(10, residency).
double flood_rate_at(const FloodExceedance& exceed, int parcel, int t,
                     int arrival);

using Trajectory = std::vector<std::vector<std::uint8_t>>;  // [year][parcel]

enum class CovariateMode {
  Realized,       // flood rate resets with occupancy turnover (model dynamics)
  ExogenousOnly,  // flood rate from the forcing alone, no resets
};

struct SimulateOptions {
  CovariateMode covariates = CovariateMode::Realized;
  double initial_occupied_prob = 0.99;
  std::optional<std::vector<std::uint8_t>> initial_states;
};

// Stochastic forward run over `years` annual steps; row t of the result is
// the occupancy at year t (row 0 = initial draw). Covariates for the year-t
// transition use year t-1 states and flood history through year t-1.
Trajectory simulate_forward(const ParcelDomain& domain,
                            const ModelParams& params,
                            const FloodSeries& floods, ModelVariant variant,
                            int years, RngStream& rng,
                            const SimulateOptions& opts = {});

struct CovariateTables {
  Eigen::MatrixXd r;  // (years+1) x parcels; row 0 unused (zeros)
  Eigen::MatrixXd v;
};

/// Reconstructs the covariates implied by a full occupancy history,
/// matching what simulate_forward used when it produced the history.
CovariateTables covariates_from_states(const Trajectory& states,
                                       const ParcelDomain& domain,
                                       const FloodExceedance& exceed);

/// Flood rates from the exogenous forcing alone (no occupancy resets);
/// the residency clock runs uninterrupted from year 0.
Eigen::MatrixXd exogenous_flood_rates(const FloodExceedance& exceed,
                                      int years);

}  // namespace abmcalib

#endif
