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

#ifndef ABMCALIB_OPTIM_HPP
#define ABMCALIB_OPTIM_HPP

#include <functional>

#include <Eigen/Dense>

namespace abmcalib {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Maximizes f by Nelder-Mead. Stops when the simplex value spread falls
// below `tol` or the evaluation budget is spent; a shrunken restart around
// the incumbent sharpens the final point when budget remains.
NelderMeadResult nelder_mead_maximize(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& start, double initial_step = 0.5,
    double tol = 1e-8, int max_evals = 5000);

}  // namespace abmcalib

#endif
