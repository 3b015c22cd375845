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

#include "optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace abmcalib {

namespace {

struct Simplex {
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;  // maximized objective
  std::vector<int> order;    // descending by value

  void sort() {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return vals[static_cast<std::size_t>(a)] >
             vals[static_cast<std::size_t>(b)];
    });
  }
  const Eigen::VectorXd& best() const {
    return pts[static_cast<std::size_t>(order.front())];
  }
  double best_val() const { return vals[static_cast<std::size_t>(order.front())]; }
  double worst_val() const { return vals[static_cast<std::size_t>(order.back())]; }
};

NelderMeadResult run_once(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& start, double step, double tol,
                          int max_evals, int& evals) {
  const int d = static_cast<int>(start.size());
  const double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

  Simplex s;
  s.pts.reserve(static_cast<std::size_t>(d) + 1);
  s.pts.push_back(start);
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd p = start;
    p(i) += step * (1.0 + std::fabs(start(i)));
    s.pts.push_back(p);
  }
  s.vals.resize(s.pts.size());
  s.order.resize(s.pts.size());
  for (std::size_t i = 0; i < s.pts.size(); ++i) {
    s.vals[i] = f(s.pts[i]);
    ++evals;
  }
  s.sort();

  NelderMeadResult res;
  while (evals < max_evals) {
    if (std::isfinite(s.best_val()) && std::isfinite(s.worst_val()) &&
        s.best_val() - s.worst_val() < tol) {
      res.converged = true;
      break;
    }
    // Centroid of all but the worst point.
    const int worst = s.order.back();
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int idx : s.order)
      if (idx != worst) centroid += s.pts[static_cast<std::size_t>(idx)];
    centroid /= static_cast<double>(d);

    const Eigen::VectorXd& xw = s.pts[static_cast<std::size_t>(worst)];
    Eigen::VectorXd xr = centroid + kReflect * (centroid - xw);
    const double fr = f(xr);
    ++evals;

    const double fbest = s.best_val();
    const double fsecond = s.vals[static_cast<std::size_t>(s.order[s.order.size() - 2])];

    if (fr > fbest) {
      Eigen::VectorXd xe = centroid + kExpand * (xr - centroid);
      const double fe = f(xe);
      ++evals;
      if (fe > fr) {
        s.pts[static_cast<std::size_t>(worst)] = std::move(xe);
        s.vals[static_cast<std::size_t>(worst)] = fe;
      } else {
        s.pts[static_cast<std::size_t>(worst)] = std::move(xr);
        s.vals[static_cast<std::size_t>(worst)] = fr;
      }
    } else if (fr > fsecond) {
      s.pts[static_cast<std::size_t>(worst)] = std::move(xr);
      s.vals[static_cast<std::size_t>(worst)] = fr;
    } else {
      Eigen::VectorXd xc = centroid + kContract * (xw - centroid);
      const double fc = f(xc);
      ++evals;
      if (fc > s.vals[static_cast<std::size_t>(worst)]) {
        s.pts[static_cast<std::size_t>(worst)] = std::move(xc);
        s.vals[static_cast<std::size_t>(worst)] = fc;
      } else {
        const Eigen::VectorXd xb = s.best();
        for (int idx : s.order) {
          if (idx == s.order.front()) continue;
          auto& p = s.pts[static_cast<std::size_t>(idx)];
          p = xb + kShrink * (p - xb);
          s.vals[static_cast<std::size_t>(idx)] = f(p);
          ++evals;
        }
      }
    }
    s.sort();
  }

  res.x = s.best();
  res.value = s.best_val();
  res.evaluations = evals;
  return res;
}

}  // namespace

NelderMeadResult nelder_mead_maximize(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& start, double initial_step, double tol,
    int max_evals) {
  int evals = 0;
  NelderMeadResult res = run_once(f, start, initial_step, tol, max_evals, evals);
  // Restart with a tight simplex around the incumbent; cheap and it
  // recovers the last digits a stalled simplex leaves on the table.
  while (evals < max_evals) {
    NelderMeadResult again =
        run_once(f, res.x, 1e-3 * initial_step, tol, max_evals, evals);
    again.evaluations = evals;
    const bool improved = again.value > res.value + tol;
    if (again.value >= res.value) res = again;
    if (!improved) break;
  }
  res.evaluations = evals;
  return res;
}

}  // namespace abmcalib
