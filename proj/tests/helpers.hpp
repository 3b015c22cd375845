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

// Test-only oracles kept independent of the implementation paths they check.

#ifndef ABMCALIB_TESTS_HELPERS_HPP
#define ABMCALIB_TESTS_HELPERS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "flood.hpp"

namespace testutil {

/// GEV CDF (independent of the production quantile code).
inline double gev_cdf(double x, const abmcalib::GevParams& g) {
  const double z = (x - g.location) / g.scale;
  if (std::fabs(g.shape) < 1e-12) return std::exp(-std::exp(-z));
  const double t = 1.0 + g.shape * z;
  if (t <= 0.0) return g.shape > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::pow(t, -1.0 / g.shape));
}

/// Kolmogorov-Smirnov statistic of a sample against an analytic CDF.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::fabs((static_cast<double>(i) + 1.0) / n - f));
    d = std::max(d, std::fabs(static_cast<double>(i) / n - f));
  }
  return d;
}

// Tiny well-formedness check for emitted SVG/XML: balanced tags, quoted
// attribute values, a single root element.
inline bool xml_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  int roots = 0;
  auto skip_until = [&](const std::string& end) {
    const auto pos = text.find(end, i);
    if (pos == std::string::npos) return false;
    i = pos + end.size();
    return true;
  };
  while (i < text.size()) {
    if (text[i] != '<') {
      ++i;
      continue;
    }
    if (text.compare(i, 2, "<?") == 0) {
      if (!skip_until("?>")) return false;
      continue;
    }
    if (text.compare(i, 4, "<!--") == 0) {
      if (!skip_until("-->")) return false;
      continue;
    }
    const auto close = text.find('>', i);
    if (close == std::string::npos) return false;
    std::string tag = text.substr(i + 1, close - i - 1);
    i = close + 1;
    if (tag.empty()) return false;
    // quotes must pair up inside the tag
    if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
    if (tag.front() == '/') {
      if (stack.empty()) return false;
      const std::string name = tag.substr(1);
      if (stack.back() != name) return false;
      stack.pop_back();
      if (stack.empty()) ++roots;
      continue;
    }
    const bool self_closing = tag.back() == '/';
    if (self_closing) tag.pop_back();
    std::string name = tag.substr(0, tag.find_first_of(" \t\n\r"));
    if (name.empty()) return false;
    if (self_closing) {
      if (stack.empty()) ++roots;
      continue;
    }
    stack.push_back(name);
  }
  return stack.empty() && roots == 1;
}

}  // namespace testutil

#endif
