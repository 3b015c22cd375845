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

#ifndef ABMCALIB_FLOOD_HPP
#define ABMCALIB_FLOOD_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rng.hpp"

namespace abmcalib {

/// Generalized extreme value parameters for annual maximum river heights.
struct GevParams {
  double location = 865.0;
  double scale = 11.0;
  double shape = 0.02;

  void validate() const;
};

/// Quantile (inverse CDF) of the GEV distribution; p in (0,1).
double gev_quantile(double p, const GevParams& g);

/// One draw by inverse-CDF sampling.
double gev_sample(const GevParams& g, RngStream& rng);

// Annual maximum river heights. Years are indexed so that the spin-up
// window covers years -(S-1)..0 and the simulated record covers 1..Y;
// the extra history keeps every flood-rate lookback well defined from the
// first simulated year.
struct FloodSeries {
  std::vector<double> spin_up;   // years -(S-1)..0, oldest first
  std::vector<double> observed;  // years 1..Y

  int spin_up_years() const { return static_cast<int>(spin_up.size()); }
  int years() const { return static_cast<int>(observed.size()); }

  /// Water level for a calendar year in [-(S-1), Y].
  double level(int year) const;
};

FloodSeries simulate_flood_series(const GevParams& g, int spin_up_years,
                                  int years, RngStream& rng);

enum class Adjacency { VonNeumann, Moore };

struct DomainConfig {
  int rows = 10;
  int cols = 10;
  double return_period_min = 2.0;
  double return_period_max = 500.0;
  // How tightly flood risk tracks distance from the river: parcels are
  // ranked by col + risk_scatter * U(0,1) before return periods are dealt
  // out in ascending order. Small values give a clean monotone gradient,
  // larger ones a patchier floodplain.
  double risk_scatter = 1.5;
  std::vector<int> subdomain_sizes{25, 50, 100};
  Adjacency adjacency = Adjacency::VonNeumann;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Parcel {
  int id = 0;  // stable id in the full grid (row-major)
  int row = 0;
  int col = 0;
  double return_period = 0.0;
  double elevation = 0.0;
};

// Rectangular settlement next to a river along the col==0 edge. Return
// periods grow with distance from the river; elevation is the GEV level
// exceeded once per return period on average.
struct ParcelDomain {
  int rows = 0;
  int cols = 0;
  Adjacency adjacency_kind = Adjacency::VonNeumann;
  std::vector<Parcel> parcels;
  std::vector<std::vector<int>> adjacency;  // indices into parcels
  std::vector<int> subdomain_sizes;
  std::vector<std::vector<std::uint8_t>> subdomain_masks;  // per size, per parcel

  int size() const { return static_cast<int>(parcels.size()); }

  /// Index into subdomain_sizes for an exact parcel count; -1 if absent.
  int subdomain_index(int n_parcels) const;

  // Sub-settlement containing only the masked parcels, with adjacency
  // truncated at the new boundary. Parcel ids are preserved.
  ParcelDomain restricted(int subdomain_idx) const;
};

ParcelDomain generate_domain(const DomainConfig& cfg, const GevParams& g);

}  // namespace abmcalib

#endif
