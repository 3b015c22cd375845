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

#ifndef ABMCALIB_OBSERVATIONS_HPP
#define ABMCALIB_OBSERVATIONS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "model.hpp"

namespace abmcalib {

enum class DataMode { Individual, Aggregate };

std::string data_mode_name(DataMode m);
DataMode data_mode_from_name(const std::string& name);

// Observed record of the settlement. Year 0 is the initial condition;
// years 1..Y are the observation period. Individual mode keeps the full
// occupancy table, aggregate mode only the per-year vacant counts.
struct ObservationSet {
  DataMode mode = DataMode::Individual;
  int years = 0;
  std::vector<int> parcel_ids;  // stable ids of the observed parcels
  std::vector<std::vector<std::uint8_t>> individual;  // (years+1) x parcels
  std::vector<int> counts;                            // (years+1)

  int n_parcels() const { return static_cast<int>(parcel_ids.size()); }
  void validate() const;
};

/// Individual-mode view of a simulated trajectory.
ObservationSet individual_view(const Trajectory& states,
                               const std::vector<int>& parcel_ids);

/// Aggregate view (per-year vacant counts) of an individual record.
ObservationSet aggregate_view(const ObservationSet& individual);

// CSV schemas: individual `year,parcel_id,occupied`; aggregate
// `year,vacant_count`.
void write_observations_csv(const ObservationSet& obs, std::ostream& out);
ObservationSet read_observations_csv(std::istream& in, DataMode mode);

std::string observations_digest(const ObservationSet& obs);

}  // namespace abmcalib

#endif
