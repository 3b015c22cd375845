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

#ifndef ABMCALIB_STATS_HPP
#define ABMCALIB_STATS_HPP

#include <span>
#include <vector>

namespace abmcalib::stats {

double normal_logpdf(double x, double mean, double sd);
double beta_logpdf(double x, double a, double b);

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile (Acklam approximation + Newton polish).
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b) via Lentz continued fraction.
double incomplete_beta(double a, double b, double x);

double beta_cdf(double x, double a, double b);
double beta_quantile(double p, double a, double b);

double log_sum_exp(std::span<const double> xs);

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased (n-1)
double sd(std::span<const double> xs);

/// Type-7 (linear interpolation) quantile of an unsorted sample.
double quantile(std::span<const double> xs, double p);
double quantile_sorted(std::span<const double> sorted, double p);

/// Effective sample size via Geyer's initial-positive-sequence truncation
/// of the autocorrelation function. Returns 1 for constant inputs,
/// clamped to [1, n].
double effective_sample_size(std::span<const double> xs);

/// Integrated autocorrelation time n / ESS (>= some small floor).
double integrated_autocorr_time(std::span<const double> xs);

}  // namespace abmcalib::stats

#endif
