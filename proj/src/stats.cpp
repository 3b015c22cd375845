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

#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace abmcalib::stats {

namespace {
constexpr double kLn2Pi = 1.8378770664093454835606594728112;
}

double normal_logpdf(double x, double mean, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("normal_logpdf: sd must be > 0");
  const double z = (x - mean) / sd;
  return -0.5 * (kLn2Pi + z * z) - std::log(sd);
}

double beta_logpdf(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("beta_logpdf: shape parameters must be > 0");
  if (x < 0.0 || x > 1.0) return -std::numeric_limits<double>::infinity();
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  double term = log_norm;
  if (a != 1.0) term += (a - 1.0) * std::log(x);
  if (b != 1.0) term += (b - 1.0) * std::log1p(-x);
  return term;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  // Acklam's rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against the exact CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0)
    throw std::invalid_argument("incomplete_beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double beta_cdf(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return incomplete_beta(a, b, x);
}

double beta_quantile(double p, double a, double b) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("beta_quantile: p must be in (0,1)");
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (beta_cdf(mid, a, b) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

bool is_constant(std::span<const double> xs) {
  for (double x : xs)
    if (x != xs.front()) return false;
  return true;
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2 || is_constant(xs)) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double sd(std::span<const double> xs) { return std::sqrt(variance(xs)); }

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = p * (static_cast<double>(sorted.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double quantile(std::span<const double> xs, double p) {
  std::vector<double> copy(xs.begin(), xs.end());
  std::sort(copy.begin(), copy.end());
  return quantile_sorted(copy, p);
}

namespace {

// Autocovariance at lag k, normalized by n.
double autocov(std::span<const double> xs, double m, int k) {
  const int n = static_cast<int>(xs.size());
  double s = 0.0;
  for (int t = 0; t + k < n; ++t) s += (xs[t] - m) * (xs[t + k] - m);
  return s / static_cast<double>(n);
}

}  // namespace

double integrated_autocorr_time(std::span<const double> xs) {
  const int n = static_cast<int>(xs.size());
  if (n < 4) return 1.0;
  if (is_constant(xs)) return static_cast<double>(n);
  const double m = mean(xs);
  const double g0 = autocov(xs, m, 0);
  if (!(g0 > 0.0)) return static_cast<double>(n);  // constant chain
  double sigma2 = -g0;
  const int max_pair = std::min(n / 2 - 1, 5000);
  for (int k = 0; k <= max_pair; ++k) {
    const double gamma_pair = autocov(xs, m, 2 * k) + autocov(xs, m, 2 * k + 1);
    if (gamma_pair <= 0.0) break;
    sigma2 += 2.0 * gamma_pair;
  }
  const double tau = sigma2 / g0;
  return std::max(tau, 1.0 / static_cast<double>(n));
}

double effective_sample_size(std::span<const double> xs) {
  const int n = static_cast<int>(xs.size());
  if (n == 0) return 0.0;
  if (is_constant(xs)) return 1.0;
  const double m = mean(xs);
  const double g0 = autocov(xs, m, 0);
  if (!(g0 > 0.0)) return 1.0;
  const double ess = static_cast<double>(n) / integrated_autocorr_time(xs);
  return std::clamp(ess, 1.0, static_cast<double>(n));
}

}  // namespace abmcalib::stats
