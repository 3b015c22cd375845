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

#include "observations.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "common.hpp"

namespace abmcalib {

std::string data_mode_name(DataMode m) {
  return m == DataMode::Individual ? "individual" : "aggregate";
}

DataMode data_mode_from_name(const std::string& name) {
  if (name == "individual") return DataMode::Individual;
  if (name == "aggregate") return DataMode::Aggregate;
  throw ConfigError("unknown data mode: " + name);
}

void ObservationSet::validate() const {
  if (years < 0) throw std::invalid_argument("observations: negative years");
  const auto rows = static_cast<std::size_t>(years) + 1;
  if (mode == DataMode::Individual) {
    if (individual.size() != rows)
      throw std::invalid_argument("observations: individual table rows");
    for (const auto& row : individual)
      if (row.size() != parcel_ids.size())
        throw std::invalid_argument(
            "observations: individual table must be rectangular");
  } else {
    if (counts.size() != rows)
      throw std::invalid_argument("observations: count rows");
    for (int c : counts)
      if (c < 0 || c > n_parcels())
        throw std::invalid_argument(
            "observations: vacant count outside [0, parcels]");
  }
}

ObservationSet individual_view(const Trajectory& states,
                               const std::vector<int>& parcel_ids) {
  if (states.empty()) throw std::invalid_argument("individual_view: empty");
  ObservationSet obs;
  obs.mode = DataMode::Individual;
  obs.years = static_cast<int>(states.size()) - 1;
  obs.parcel_ids = parcel_ids;
  obs.individual = states;
  obs.validate();
  return obs;
}

ObservationSet aggregate_view(const ObservationSet& individual) {
  if (individual.mode != DataMode::Individual)
    throw std::invalid_argument("aggregate_view: individual input required");
  individual.validate();
  ObservationSet obs;
  obs.mode = DataMode::Aggregate;
  obs.years = individual.years;
  obs.parcel_ids = individual.parcel_ids;
  obs.counts.reserve(individual.individual.size());
  for (const auto& row : individual.individual) {
    int vacant = 0;
    for (auto s : row) vacant += s ? 0 : 1;
    obs.counts.push_back(vacant);
  }
  return obs;
}

void write_observations_csv(const ObservationSet& obs, std::ostream& out) {
  obs.validate();
  if (obs.mode == DataMode::Individual) {
    out << "year,parcel_id,occupied\n";
    for (int t = 0; t <= obs.years; ++t)
      for (int i = 0; i < obs.n_parcels(); ++i)
        out << t << ',' << obs.parcel_ids[static_cast<std::size_t>(i)] << ','
            << int(obs.individual[static_cast<std::size_t>(t)]
                                 [static_cast<std::size_t>(i)])
            << '\n';
  } else {
    out << "year,vacant_count\n";
    for (int t = 0; t <= obs.years; ++t)
      out << t << ',' << obs.counts[static_cast<std::size_t>(t)] << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

int parse_int(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const int value = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument(str_format("observations csv: bad %s '%s'",
                                           what, s.c_str()));
  }
}

}  // namespace

ObservationSet read_observations_csv(std::istream& in, DataMode mode) {
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("observations csv: empty file");

  ObservationSet obs;
  obs.mode = mode;
  if (mode == DataMode::Individual) {
    if (line != "year,parcel_id,occupied")
      throw std::invalid_argument("observations csv: unexpected header");
    std::map<int, std::map<int, std::uint8_t>> table;  // year -> id -> state
    std::set<int> ids;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() != 3)
        throw std::invalid_argument("observations csv: expected 3 fields");
      const int year = parse_int(f[0], "year");
      const int id = parse_int(f[1], "parcel id");
      const int occ = parse_int(f[2], "occupancy flag");
      if (occ != 0 && occ != 1)
        throw std::invalid_argument("observations csv: occupancy must be 0/1");
      table[year][id] = static_cast<std::uint8_t>(occ);
      ids.insert(id);
    }
    if (table.empty()) throw std::invalid_argument("observations csv: no rows");
    obs.years = table.rbegin()->first;
    obs.parcel_ids.assign(ids.begin(), ids.end());
    obs.individual.assign(static_cast<std::size_t>(obs.years) + 1,
                          std::vector<std::uint8_t>(ids.size(), 0));
    for (int t = 0; t <= obs.years; ++t) {
      const auto it = table.find(t);
      if (it == table.end() || it->second.size() != ids.size())
        throw std::invalid_argument(
            str_format("observations csv: year %d incomplete", t));
      int col = 0;
      for (int id : obs.parcel_ids)
        obs.individual[static_cast<std::size_t>(t)]
                      [static_cast<std::size_t>(col++)] = it->second.at(id);
    }
  } else {
    if (line != "year,vacant_count")
      throw std::invalid_argument("observations csv: unexpected header");
    std::map<int, int> table;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() != 2)
        throw std::invalid_argument("observations csv: expected 2 fields");
      table[parse_int(f[0], "year")] = parse_int(f[1], "count");
    }
    if (table.empty()) throw std::invalid_argument("observations csv: no rows");
    obs.years = table.rbegin()->first;
    obs.counts.assign(static_cast<std::size_t>(obs.years) + 1, 0);
    for (int t = 0; t <= obs.years; ++t) {
      const auto it = table.find(t);
      if (it == table.end())
        throw std::invalid_argument(
            str_format("observations csv: year %d missing", t));
      obs.counts[static_cast<std::size_t>(t)] = it->second;
    }
    // Parcel ids unknown in aggregate files; callers attach them from the
    // domain when needed.
  }
  return obs;
}

std::string observations_digest(const ObservationSet& obs) {
  std::uint64_t h = fnv1a64(data_mode_name(obs.mode));
  h = fnv1a64(&obs.years, sizeof obs.years, h);
  for (int id : obs.parcel_ids) h = fnv1a64(&id, sizeof id, h);
  if (obs.mode == DataMode::Individual) {
    for (const auto& row : obs.individual) h = fnv1a64(row.data(), row.size(), h);
  } else {
    for (int c : obs.counts) h = fnv1a64(&c, sizeof c, h);
  }
  return str_format("%016llx", static_cast<unsigned long long>(h));
}

}  // namespace abmcalib
