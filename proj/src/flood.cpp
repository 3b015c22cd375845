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

#include "flood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "common.hpp"

namespace abmcalib {

void GevParams::validate() const {
  if (!(scale > 0.0)) throw std::invalid_argument("GEV scale must be > 0");
  if (!std::isfinite(location) || !std::isfinite(shape))
    throw std::invalid_argument("GEV parameters must be finite");
}

double gev_quantile(double p, const GevParams& g) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("gev_quantile: p must be in (0,1)");
  g.validate();
  const double neg_log_p = -std::log(p);
  // Gumbel limit for vanishing shape.
  if (std::fabs(g.shape) < 1e-9)
    return g.location - g.scale * std::log(neg_log_p);
  return g.location +
         (g.scale / g.shape) * (std::pow(neg_log_p, -g.shape) - 1.0);
}

double gev_sample(const GevParams& g, RngStream& rng) {
  return gev_quantile(rng.uniform01(), g);
}

double FloodSeries::level(int year) const {
  const int s = spin_up_years();
  if (year <= 0) {
    const int idx = year + s - 1;
    if (idx < 0) throw std::out_of_range("FloodSeries: year before spin-up");
    return spin_up[static_cast<std::size_t>(idx)];
  }
  if (year > years()) throw std::out_of_range("FloodSeries: year after record");
  return observed[static_cast<std::size_t>(year - 1)];
}

FloodSeries simulate_flood_series(const GevParams& g, int spin_up_years,
                                  int years, RngStream& rng) {
  if (years <= 0) throw std::invalid_argument("flood series: years must be > 0");
  if (spin_up_years < 0)
    throw std::invalid_argument("flood series: spin-up must be >= 0");
  FloodSeries out;
  out.spin_up.reserve(static_cast<std::size_t>(spin_up_years));
  out.observed.reserve(static_cast<std::size_t>(years));
  for (int i = 0; i < spin_up_years; ++i) out.spin_up.push_back(gev_sample(g, rng));
  for (int i = 0; i < years; ++i) out.observed.push_back(gev_sample(g, rng));
  return out;
}

void DomainConfig::validate() const {
  if (rows <= 0 || cols <= 0)
    throw ConfigError("domain: grid dimensions must be positive");
  if (!(return_period_min > 1.0))
    throw ConfigError("domain: return_period_min must exceed 1 year");
  if (!(return_period_max > return_period_min))
    throw ConfigError("domain: return_period_max must exceed the minimum");
  if (!(risk_scatter >= 0.0))
    throw ConfigError("domain: risk_scatter must be >= 0");
  const int n = rows * cols;
  for (int s : subdomain_sizes)
    if (s <= 0 || s > n)
      throw ConfigError(
          str_format("domain: subdomain size %d outside grid of %d parcels", s, n));
  if (!std::is_sorted(subdomain_sizes.begin(), subdomain_sizes.end()))
    throw ConfigError("domain: subdomain sizes must be ascending");
}

int ParcelDomain::subdomain_index(int n_parcels) const {
  for (std::size_t i = 0; i < subdomain_sizes.size(); ++i)
    if (subdomain_sizes[i] == n_parcels) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::vector<int>> build_adjacency(int rows, int cols,
                                              Adjacency kind) {
  const int n = rows * cols;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  auto idx = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      auto& nb = adj[static_cast<std::size_t>(idx(r, c))];
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (kind == Adjacency::VonNeumann && dr != 0 && dc != 0) continue;
          const int rr = r + dr;
          const int cc = c + dc;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          nb.push_back(idx(rr, cc));
        }
      }
    }
  }
  return adj;
}

// Nested anchored rectangles when the sizes factor cleanly; otherwise a
// column-major prefix (columns hug the river), which is nested for any sizes.
std::vector<std::vector<std::uint8_t>> build_masks(int rows, int cols,
                                                   const std::vector<int>& sizes) {
  const int n = rows * cols;
  std::vector<std::pair<int, int>> rects;
  bool rect_ok = true;
  int prev_r = 0, prev_c = 0;
  for (int target : sizes) {
    int best_r = -1, best_c = -1;
    for (int r = std::max(1, prev_r); r <= rows; ++r) {
      if (target % r != 0) continue;
      const int c = target / r;
      if (c < prev_c || c > cols) continue;
      if (best_r < 0 || std::abs(r - c) < std::abs(best_r - best_c)) {
        best_r = r;
        best_c = c;
      }
    }
    if (best_r < 0) {
      rect_ok = false;
      break;
    }
    rects.emplace_back(best_r, best_c);
    prev_r = best_r;
    prev_c = best_c;
  }

  std::vector<std::vector<std::uint8_t>> masks;
  if (rect_ok) {
    for (auto [mr, mc] : rects) {
      std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
      for (int r = 0; r < mr; ++r)
        for (int c = 0; c < mc; ++c)
          mask[static_cast<std::size_t>(r * cols + c)] = 1;
      masks.push_back(std::move(mask));
    }
    return masks;
  }

  for (int target : sizes) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
    int placed = 0;
    for (int c = 0; c < cols && placed < target; ++c)
      for (int r = 0; r < rows && placed < target; ++r, ++placed)
        mask[static_cast<std::size_t>(r * cols + c)] = 1;
    masks.push_back(std::move(mask));
  }
  return masks;
}

}  // namespace

ParcelDomain generate_domain(const DomainConfig& cfg, const GevParams& g) {
  cfg.validate();
  g.validate();
  const int n = cfg.rows * cfg.cols;
  RngStream rng = RngStream::derive(cfg.seed, "domain");

  // Log-uniform return periods, assigned so short periods cluster near the
  // river (col 0) with mild cross-column mixing.
  std::vector<double> periods(static_cast<std::size_t>(n));
  const double log_min = std::log(cfg.return_period_min);
  const double log_max = std::log(cfg.return_period_max);
  for (auto& t : periods)
    t = std::exp(log_min + (log_max - log_min) * rng.uniform01());
  std::sort(periods.begin(), periods.end());

  std::vector<double> placement_key(static_cast<std::size_t>(n));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < n; ++i)
    placement_key[static_cast<std::size_t>(i)] =
        static_cast<double>(i % cfg.cols) + cfg.risk_scatter * rng.uniform01();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return placement_key[static_cast<std::size_t>(a)] <
           placement_key[static_cast<std::size_t>(b)];
  });

  ParcelDomain dom;
  dom.rows = cfg.rows;
  dom.cols = cfg.cols;
  dom.adjacency_kind = cfg.adjacency;
  dom.parcels.resize(static_cast<std::size_t>(n));
  for (int rank = 0; rank < n; ++rank) {
    const int id = order[static_cast<std::size_t>(rank)];
    Parcel& p = dom.parcels[static_cast<std::size_t>(id)];
    p.id = id;
    p.row = id / cfg.cols;
    p.col = id % cfg.cols;
    p.return_period = periods[static_cast<std::size_t>(rank)];
    p.elevation = gev_quantile(1.0 - 1.0 / p.return_period, g);
  }
  dom.adjacency = build_adjacency(cfg.rows, cfg.cols, cfg.adjacency);
  dom.subdomain_sizes = cfg.subdomain_sizes;
  dom.subdomain_masks = build_masks(cfg.rows, cfg.cols, cfg.subdomain_sizes);
  return dom;
}

ParcelDomain ParcelDomain::restricted(int subdomain_idx) const {
  if (subdomain_idx < 0 ||
      subdomain_idx >= static_cast<int>(subdomain_masks.size()))
    throw std::out_of_range("restricted: no such subdomain");
  const auto& mask = subdomain_masks[static_cast<std::size_t>(subdomain_idx)];

  std::vector<int> keep;
  std::vector<int> local(parcels.size(), -1);
  for (std::size_t i = 0; i < parcels.size(); ++i) {
    if (mask[i]) {
      local[i] = static_cast<int>(keep.size());
      keep.push_back(static_cast<int>(i));
    }
  }

  ParcelDomain out;
  out.rows = rows;
  out.cols = cols;
  out.adjacency_kind = adjacency_kind;
  out.parcels.reserve(keep.size());
  out.adjacency.resize(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto i = static_cast<std::size_t>(keep[k]);
    out.parcels.push_back(parcels[i]);
    for (int nb : adjacency[i])
      if (local[static_cast<std::size_t>(nb)] >= 0)
        out.adjacency[k].push_back(local[static_cast<std::size_t>(nb)]);
  }
  out.subdomain_sizes = {static_cast<int>(keep.size())};
  out.subdomain_masks = {
      std::vector<std::uint8_t>(keep.size(), std::uint8_t{1})};
  return out;
}

}  // namespace abmcalib
