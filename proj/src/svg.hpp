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

#ifndef ABMCALIB_SVG_HPP
#define ABMCALIB_SVG_HPP

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "likelihood.hpp"

namespace abmcalib::svg {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal static SVG plotting; no external dependencies. Every plot also
// has its source data emitted as CSV elsewhere, these are quick-look views.

/// Axis range covering the 0.1%..99.9% quantiles of the prior and the
/// posterior sample, with a small margin.
std::pair<double, double> density_plot_range(const PriorDist& prior,
                                             std::vector<double> samples);

/// Gaussian KDE evaluated on a uniform grid (Silverman bandwidth).
Series kernel_density(std::vector<double> samples, double lo, double hi,
                      int grid_points = 201);

/// Prior curve vs posterior KDE with a dashed line at the reference value.
std::string density_plot(const std::string& title, const PriorDist& prior,
                         const std::vector<double>& posterior_samples,
                         double reference_value);

// Fan chart of per-year quantile bands (5-95 and 25-75) around the median,
// the observed counts drawn on top. `quantiles` holds rows per year with
// columns (q5, q25, q50, q75, q95).
std::string fan_chart(const std::string& title,
                      const std::vector<std::array<double, 5>>& prior_bands,
                      const std::vector<std::array<double, 5>>& posterior_bands,
                      const std::vector<int>& observed);

struct BarEntry {
  std::string label;
  double value = 0.0;
};

/// Horizontal-threshold bar chart for log Bayes factors (lines at 1/3/5).
std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<BarEntry>& entries,
                      const std::vector<double>& thresholds);

}  // namespace abmcalib::svg

#endif
