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

#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "common.hpp"

namespace abmcalib {

int param_count(ModelVariant v) {
  return v == ModelVariant::SpatialInteractions ? 4 : 3;
}

std::string variant_name(ModelVariant v) {
  return v == ModelVariant::SpatialInteractions ? "spatial" : "none";
}

ModelVariant variant_from_name(const std::string& name) {
  if (name == "spatial" || name == "spatial-interactions")
    return ModelVariant::SpatialInteractions;
  if (name == "none" || name == "no-interactions")
    return ModelVariant::NoInteractions;
  throw ConfigError("unknown model variant: " + name);
}

ModelParams ModelParams::make(ModelVariant v, double b0, double b1, double b2,
                              double a) {
  ModelParams p;
  p.beta0 = b0;
  p.beta1 = b1;
  if (v == ModelVariant::SpatialInteractions) p.beta2 = b2;
  p.alpha = a;
  return p;
}

void ModelParams::validate(ModelVariant v) const {
  if ((v == ModelVariant::SpatialInteractions) != beta2.has_value())
    throw std::invalid_argument(
        "ModelParams: beta2 must be present exactly for the "
        "spatial-interactions variant");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("ModelParams: alpha must be in [0,1]");
  if (!std::isfinite(beta0) || !std::isfinite(beta1) ||
      (beta2 && !std::isfinite(*beta2)))
    throw std::invalid_argument("ModelParams: coefficients must be finite");
}

double inverse_logit(double y) {
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("logit: p must be in (0,1)");
  return std::log(p) - std::log1p(-p);
}

double abandonment_prob(const ModelParams& params, double r, double v,
                        ModelVariant variant, bool strict) {
  if (!(r >= 0.0 && r <= 1.0) || !(v >= 0.0 && v <= 1.0))
    throw std::domain_error("abandonment_prob: covariates must be in [0,1]");
  double y = params.beta0 + params.beta1 * r;
  if (variant == ModelVariant::SpatialInteractions) {
    y += params.beta2.value() * v;
  } else if (strict && v != 0.0) {
    throw std::domain_error(
        "abandonment_prob: nonzero neighbor vacancy passed to the "
        "no-interactions variant in strict mode");
  }
  return inverse_logit(y);
}

TransitionMatrix transition_matrix(double p10, double p01) {
  if (!(p10 >= 0.0 && p10 <= 1.0) || !(p01 >= 0.0 && p01 <= 1.0))
    throw std::domain_error("transition_matrix: probabilities outside [0,1]");
  // Columns: previous state (vacant, occupied); rows: next (vacant, occupied).
  TransitionMatrix t;
  t.m[0][0] = 1.0 - p01;
  t.m[1][0] = p01;
  t.m[0][1] = p10;
  t.m[1][1] = 1.0 - p10;
  return t;
}

OccupancyDistribution step_marginal(const OccupancyDistribution& dist,
                                    const TransitionMatrix& m) {
  OccupancyDistribution out;
  out.p_vacant = m.m[0][0] * dist.p_vacant + m.m[0][1] * dist.p_occupied;
  out.p_occupied = m.m[1][0] * dist.p_vacant + m.m[1][1] * dist.p_occupied;
  return out;
}

double update_flood_rate(std::span<const std::uint8_t> flood_hits,
                         int residency_years, bool occupied) {
  if (!occupied) return 0.0;
  if (residency_years < 0)
    throw std::invalid_argument("update_flood_rate: negative residency");
  const int w = std::max(10, residency_years);
  if (static_cast<int>(flood_hits.size()) < w)
    throw std::invalid_argument(
        str_format("update_flood_rate: need %d years of history, got %zu "
                   "(supply spin-up forcing)",
                   w, flood_hits.size()));
  int hits = 0;
  for (std::size_t i = flood_hits.size() - static_cast<std::size_t>(w);
       i < flood_hits.size(); ++i)
    hits += flood_hits[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(w);
}

double neighbor_vacancy_fraction(int parcel,
                                 std::span<const std::uint8_t> previous_states,
                                 const ParcelDomain& domain) {
  if (parcel < 0 || parcel >= domain.size())
    throw std::out_of_range("neighbor_vacancy_fraction: no such parcel");
  const auto& nb = domain.adjacency[static_cast<std::size_t>(parcel)];
  if (nb.empty()) {
    static bool warned = false;
    if (!warned) {
      warned = true;
      log_warn(str_format("parcel %d has no neighbors; vacancy fraction 0",
                          domain.parcels[static_cast<std::size_t>(parcel)].id));
    }
    return 0.0;
  }
  int vacant = 0;
  for (int j : nb)
    if (!previous_states[static_cast<std::size_t>(j)]) ++vacant;
  return static_cast<double>(vacant) / static_cast<double>(nb.size());
}

FloodExceedance::FloodExceedance(const ParcelDomain& domain,
                                 const FloodSeries& floods)
    : spin_up_(floods.spin_up_years()), years_(floods.years()) {
  if (spin_up_ < 10)
    throw std::invalid_argument(
        "FloodExceedance: at least 10 spin-up years required for the "
        "flood-rate lookback");
  const int total = spin_up_ + years_;
  hits_.assign(static_cast<std::size_t>(domain.size()),
               std::vector<std::uint8_t>(static_cast<std::size_t>(total), 0));
  for (int i = 0; i < domain.size(); ++i) {
    const double elev = domain.parcels[static_cast<std::size_t>(i)].elevation;
    for (int year = -(spin_up_ - 1); year <= years_; ++year) {
      if (floods.level(year) >= elev)
        hits_[static_cast<std::size_t>(i)]
             [static_cast<std::size_t>(year + spin_up_ - 1)] = 1;
    }
  }
}

double flood_rate_at(const FloodExceedance& exceed, int parcel, int t,
                     int arrival) {
  const int residency = (arrival == kResidentFromStart) ? t - 1 : t - arrival;
  const int w = std::max(10, residency);
  int start = t - w;  // first calendar year of the window
  if (arrival != kResidentFromStart) start = std::max(start, arrival);
  if (t - w < -(exceed.spin_up_years() - 1))
    throw std::runtime_error("flood_rate_at: window reaches before spin-up");
  int hits = 0;
  for (int year = start; year <= t - 1; ++year)
    hits += exceed.hit(parcel, year) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(w);
}

namespace {

struct OccupantState {
  int arrival = kResidentFromStart;  // meaningful only while occupied
};

}  // namespace

Trajectory simulate_forward(const ParcelDomain& domain,
                            const ModelParams& params,
                            const FloodSeries& floods, ModelVariant variant,
                            int years, RngStream& rng,
                            const SimulateOptions& opts) {
  params.validate(variant);
  if (years < 0) throw std::invalid_argument("simulate_forward: years < 0");
  if (floods.years() < years)
    throw std::invalid_argument("simulate_forward: flood record too short");
  const int n = domain.size();
  const FloodExceedance exceed(domain, floods);

  Trajectory states(static_cast<std::size_t>(years) + 1,
                    std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0));
  std::vector<OccupantState> occupants(static_cast<std::size_t>(n));

  if (opts.initial_states) {
    if (static_cast<int>(opts.initial_states->size()) != n)
      throw std::invalid_argument("simulate_forward: initial state size");
    states[0] = *opts.initial_states;
  } else {
    for (int i = 0; i < n; ++i)
      states[0][static_cast<std::size_t>(i)] =
          rng.uniform01() < opts.initial_occupied_prob ? 1 : 0;
  }

  for (int t = 1; t <= years; ++t) {
    const auto& prev = states[static_cast<std::size_t>(t - 1)];
    auto& cur = states[static_cast<std::size_t>(t)];
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform01();
      if (prev[static_cast<std::size_t>(i)]) {
        double r;
        if (opts.covariates == CovariateMode::ExogenousOnly) {
          r = flood_rate_at(exceed, i, t, kResidentFromStart);
        } else {
          r = flood_rate_at(exceed, i, t,
                            occupants[static_cast<std::size_t>(i)].arrival);
        }
        const double v =
            variant == ModelVariant::SpatialInteractions
                ? neighbor_vacancy_fraction(i, prev, domain)
                : 0.0;
        const double p10 = abandonment_prob(params, r, v, variant);
        cur[static_cast<std::size_t>(i)] = u < p10 ? 0 : 1;
      } else {
        cur[static_cast<std::size_t>(i)] = u < params.alpha ? 1 : 0;
        if (cur[static_cast<std::size_t>(i)])
          occupants[static_cast<std::size_t>(i)].arrival = t;
      }
    }
  }
  return states;
}

CovariateTables covariates_from_states(const Trajectory& states,
                                       const ParcelDomain& domain,
                                       const FloodExceedance& exceed) {
  if (states.empty()) throw std::invalid_argument("covariates: empty history");
  const int years = static_cast<int>(states.size()) - 1;
  const int n = domain.size();
  CovariateTables out;
  out.r = Eigen::MatrixXd::Zero(years + 1, n);
  out.v = Eigen::MatrixXd::Zero(years + 1, n);

  std::vector<int> arrival(static_cast<std::size_t>(n), kResidentFromStart);
  for (int t = 1; t <= years; ++t) {
    const auto& prev = states[static_cast<std::size_t>(t - 1)];
    for (int i = 0; i < n; ++i) {
      if (prev[static_cast<std::size_t>(i)])
        out.r(t, i) =
            flood_rate_at(exceed, i, t, arrival[static_cast<std::size_t>(i)]);
      out.v(t, i) = neighbor_vacancy_fraction(i, prev, domain);
    }
    // Track occupancy turnover after computing year-t covariates.
    const auto& cur = states[static_cast<std::size_t>(t)];
    for (int i = 0; i < n; ++i) {
      if (cur[static_cast<std::size_t>(i)] && !prev[static_cast<std::size_t>(i)])
        arrival[static_cast<std::size_t>(i)] = t;
    }
  }
  return out;
}

Eigen::MatrixXd exogenous_flood_rates(const FloodExceedance& exceed,
                                      int years) {
  const int n = exceed.parcels();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(years + 1, n);
  for (int t = 1; t <= years; ++t)
    for (int i = 0; i < n; ++i)
      r(t, i) = flood_rate_at(exceed, i, t, kResidentFromStart);
  return r;
}

}  // namespace abmcalib
