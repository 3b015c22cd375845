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

#include "selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "common.hpp"
#include "stats.hpp"

namespace abmcalib {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2Pi = 1.8378770664093454835606594728112;

Eigen::MatrixXd cholesky_with_ridge(Eigen::MatrixXd cov) {
  const int d = static_cast<int>(cov.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  double ridge = 1e-8 * cov.trace() / static_cast<double>(d);
  if (!(ridge > 0.0)) ridge = 1e-8;
  log_warn(str_format("importance density: singular covariance, ridge %g added",
                      ridge));
  for (int k = 0; k < 40; ++k) {
    cov += ridge * Eigen::MatrixXd::Identity(d, d);
    llt.compute(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    ridge *= 10.0;
  }
  throw std::runtime_error("importance density: covariance not repairable");
}

/// Evenly spaced row indices, endpoints included.
std::vector<int> even_indices(int total, int take) {
  std::vector<int> idx(static_cast<std::size_t>(take));
  if (take == 1) {
    idx[0] = total - 1;
    return idx;
  }
  for (int k = 0; k < take; ++k)
    idx[static_cast<std::size_t>(k)] = static_cast<int>(
        (static_cast<long long>(k) * (total - 1)) / (take - 1));
  return idx;
}

}  // namespace

double ImportanceDensity::logpdf(const Eigen::VectorXd& x) const {
  if (trunc_dim && (x(*trunc_dim) < 0.0 || x(*trunc_dim) > 1.0)) return kNegInf;
  const Eigen::VectorXd diff = x - mean;
  const Eigen::VectorXd y =
      chol.triangularView<Eigen::Lower>().solve(diff);
  const double d = static_cast<double>(mean.size());
  return -0.5 * (d * kLn2Pi + y.squaredNorm()) - log_det_half -
         normalization_correction;
}

Eigen::VectorXd ImportanceDensity::sample(RngStream& rng) const {
  const int d = static_cast<int>(mean.size());
  Eigen::VectorXd z(d);
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    for (int i = 0; i < d; ++i) z(i) = rng.normal();
    Eigen::VectorXd x = mean + chol * z;
    if (!trunc_dim || (x(*trunc_dim) >= 0.0 && x(*trunc_dim) <= 1.0)) return x;
  }
  throw std::runtime_error(
      "importance density: truncation rejection rate too high");
}

ImportanceDensity fit_importance_density(const Eigen::MatrixXd& samples,
                                         std::optional<int> trunc_dim,
                                         RngStream& rng, int mc_draws) {
  const int n = static_cast<int>(samples.rows());
  const int d = static_cast<int>(samples.cols());
  if (n < 1000)
    throw std::invalid_argument(
        "fit_importance_density: at least 1000 posterior draws required");
  if (trunc_dim && (*trunc_dim < 0 || *trunc_dim >= d))
    throw std::invalid_argument("fit_importance_density: bad truncation dim");

  ImportanceDensity g;
  g.trunc_dim = trunc_dim;
  g.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - g.mean.transpose();
  g.covariance =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
  g.chol = cholesky_with_ridge(g.covariance);
  g.covariance = g.chol * g.chol.transpose();  // ridge included if applied
  g.log_det_half = g.chol.diagonal().array().log().sum();

  g.normalization_correction = 0.0;
  if (trunc_dim) {
    // Monte-Carlo estimate of the mass the box keeps.
    long long inside = 0;
    Eigen::VectorXd z(d);
    for (int k = 0; k < mc_draws; ++k) {
      for (int i = 0; i < d; ++i) z(i) = rng.normal();
      const double coord = g.mean(*trunc_dim) + (g.chol.row(*trunc_dim) * z).value();
      if (coord >= 0.0 && coord <= 1.0) ++inside;
    }
    const double mass =
        static_cast<double>(inside) / static_cast<double>(mc_draws);
    if (mass == 0.0)
      throw std::runtime_error(
          "fit_importance_density: no mass inside the truncation box");
    if (mass <= 1.0 - 1e-6) g.normalization_correction = std::log(mass);
  }
  return g;
}

ImportanceDensity fit_importance_density(const PosteriorChain& chain,
                                         RngStream& rng, int mc_draws) {
  // Truncate along the vacancy-fill coordinate (last column).
  return fit_importance_density(chain.samples, chain.dim() - 1, rng, mc_draws);
}

namespace {

// One bridge weight 1 / (s1 e^a + s2 e^b), computed with a max shift.
double inv_mix(double a, double b, double s1, double s2) {
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return 0.0;
  return std::exp(-m) / (s1 * std::exp(a - m) + s2 * std::exp(b - m));
}

}  // namespace

MarginalLikelihoodEstimate bridge_sampling_logml(
    const Eigen::MatrixXd& posterior_samples, const ImportanceDensity& density,
    const LogDensity& log_q, int n_samples, RngStream& rng) {
  const int total = static_cast<int>(posterior_samples.rows());
  if (n_samples <= 1)
    throw std::invalid_argument("bridge sampling: n_samples must be > 1");
  if (n_samples > total)
    throw std::invalid_argument(
        "bridge sampling: n_samples exceeds chain length");

  const int n1 = n_samples;  // posterior side
  const int n2 = n_samples;  // importance side
  const double s1 = static_cast<double>(n1) / static_cast<double>(n1 + n2);
  const double s2 = static_cast<double>(n2) / static_cast<double>(n1 + n2);

  // eta = log q - log g at posterior draws (kept in chain order) and at
  // fresh importance draws.
  std::vector<double> eta1(static_cast<std::size_t>(n1));
  const auto idx = even_indices(total, n1);
  for (int k = 0; k < n1; ++k) {
    const Eigen::VectorXd theta =
        posterior_samples.row(idx[static_cast<std::size_t>(k)]).transpose();
    eta1[static_cast<std::size_t>(k)] = log_q(theta) - density.logpdf(theta);
  }
  std::vector<double> eta2(static_cast<std::size_t>(n2));
  for (int k = 0; k < n2; ++k) {
    const Eigen::VectorXd theta = density.sample(rng);
    eta2[static_cast<std::size_t>(k)] = log_q(theta) - density.logpdf(theta);
  }

  // Center at the posterior-side median so the fixed point stays O(1).
  std::vector<double> sorted = eta1;
  std::nth_element(sorted.begin(), sorted.begin() + n1 / 2, sorted.end());
  const double shift = sorted[static_cast<std::size_t>(n1) / 2];

  double log_r = 0.0;
  int iterations = 0;
  bool converged = false;
  for (int it = 1; it <= 1000; ++it) {
    iterations = it;
    double num = 0.0;
    for (double e : eta2) {
      const double l2 = e - shift;
      num += std::exp(l2) * inv_mix(l2, log_r, s1, s2);
    }
    num /= static_cast<double>(n2);
    double den = 0.0;
    for (double e : eta1) den += inv_mix(e - shift, log_r, s1, s2);
    den /= static_cast<double>(n1);
    if (!(num > 0.0) || !(den > 0.0))
      throw std::runtime_error("bridge sampling: degenerate weights");
    const double log_r_new = std::log(num) - std::log(den);
    const bool done = std::fabs(log_r_new - log_r) <
                      1e-10 * std::max(1.0, std::fabs(log_r_new));
    log_r = log_r_new;
    if (done) {
      converged = true;
      break;
    }
  }
  const double log_ml = log_r + shift;

  // Relative-variance standard error; the posterior-side term carries the
  // integrated autocorrelation time of its weight series.
  std::vector<double> f1(static_cast<std::size_t>(n2));
  for (int k = 0; k < n2; ++k) {
    const double lp = eta2[static_cast<std::size_t>(k)] - shift - log_r;
    f1[static_cast<std::size_t>(k)] = std::exp(lp) * inv_mix(lp, 0.0, s1, s2);
  }
  std::vector<double> f2(static_cast<std::size_t>(n1));
  for (int k = 0; k < n1; ++k) {
    const double lp = eta1[static_cast<std::size_t>(k)] - shift - log_r;
    f2[static_cast<std::size_t>(k)] = inv_mix(lp, 0.0, s1, s2);
  }
  const double m1 = stats::mean(f1);
  const double m2 = stats::mean(f2);
  const double tau = stats::integrated_autocorr_time(f2);
  double re2 = 0.0;
  if (m1 > 0.0) re2 += stats::variance(f1) / (m1 * m1) / static_cast<double>(n2);
  if (m2 > 0.0)
    re2 += tau * stats::variance(f2) / (m2 * m2) / static_cast<double>(n1);

  MarginalLikelihoodEstimate est;
  est.log_ml = log_ml;
  est.std_error = std::sqrt(std::max(re2, 0.0));
  est.iterations = iterations;
  est.converged = converged;
  return est;
}

MarginalLikelihoodEstimate bridge_sampling_logml(const PosteriorChain& chain,
                                                 const ImportanceDensity& density,
                                                 const LogDensity& log_q,
                                                 int n_samples, RngStream& rng) {
  return bridge_sampling_logml(chain.samples, density, log_q, n_samples, rng);
}

std::string BayesFactorResult::label() const {
  switch (category) {
    case Evidence::Indeterminate:
      return "indeterminate";
    case Evidence::None:
      return "weak/none";
    case Evidence::Weak:
      return favors_b ? "weak for model b" : "weak";
    case Evidence::Positive:
      return favors_b ? "positive for model b" : "positive";
    case Evidence::Strong:
      return favors_b ? "strong for model b" : "strong";
    case Evidence::VeryStrong:
      return favors_b ? "very strong for model b" : "very strong";
  }
  return "indeterminate";
}

BayesFactorResult log_bayes_factor(const MarginalLikelihoodEstimate& ml_a,
                                   const MarginalLikelihoodEstimate& ml_b) {
  BayesFactorResult out;
  out.log_bf = ml_a.log_ml - ml_b.log_ml;
  if (!ml_a.converged || !ml_b.converged) {
    out.category = Evidence::Indeterminate;
    return out;
  }
  out.favors_b = out.log_bf < 0.0;
  const double a = std::fabs(out.log_bf);
  if (a == 0.0)
    out.category = Evidence::None;
  else if (a <= 1.0)
    out.category = Evidence::Weak;
  else if (a <= 3.0)
    out.category = Evidence::Positive;
  else if (a <= 5.0)
    out.category = Evidence::Strong;
  else
    out.category = Evidence::VeryStrong;
  return out;
}

WaicAccumulator::WaicAccumulator(int n_data) : n_(n_data) {
  if (n_ < 1) throw std::invalid_argument("waic: need at least one data point");
  max_ = Eigen::VectorXd::Constant(n_, kNegInf);
  sumexp_ = Eigen::VectorXd::Zero(n_);
  mean_ = Eigen::VectorXd::Zero(n_);
  m2_ = Eigen::VectorXd::Zero(n_);
}

void WaicAccumulator::add_draw(const Eigen::VectorXd& pointwise_log_lik) {
  if (static_cast<int>(pointwise_log_lik.size()) != n_)
    throw std::invalid_argument("waic: pointwise row length mismatch");
  ++draws_;
  for (int i = 0; i < n_; ++i) {
    const double x = pointwise_log_lik(i);
    if (!std::isfinite(x))
      throw std::invalid_argument(
          str_format("waic: non-finite log-likelihood at draw %d, datum %d",
                     draws_ - 1, i));
    if (x > max_(i)) {
      sumexp_(i) = sumexp_(i) * std::exp(max_(i) - x) + 1.0;
      max_(i) = x;
    } else {
      sumexp_(i) += std::exp(x - max_(i));
    }
    const double delta = x - mean_(i);
    mean_(i) += delta / static_cast<double>(draws_);
    m2_(i) += delta * (x - mean_(i));
  }
}

WaicResult WaicAccumulator::finalize() const {
  if (draws_ < 2)
    throw std::invalid_argument("waic: at least 2 posterior draws required");
  WaicResult r;
  r.n_samples = draws_;
  r.pointwise_lppd.resize(n_);
  r.pointwise_p.resize(n_);
  for (int i = 0; i < n_; ++i) {
    r.pointwise_lppd(i) =
        max_(i) + std::log(sumexp_(i) / static_cast<double>(draws_));
    r.pointwise_p(i) = m2_(i) / static_cast<double>(draws_ - 1);
  }
  r.lppd = r.pointwise_lppd.sum();
  r.p_waic = r.pointwise_p.sum();
  r.waic = -2.0 * (r.lppd - r.p_waic);
  return r;
}

WaicResult waic(const Eigen::MatrixXd& pointwise_log_lik) {
  const int s = static_cast<int>(pointwise_log_lik.rows());
  if (s < 2) throw std::invalid_argument("waic: need >= 2 posterior draws");
  WaicAccumulator acc(static_cast<int>(pointwise_log_lik.cols()));
  for (int i = 0; i < s; ++i)
    acc.add_draw(pointwise_log_lik.row(i).transpose());
  return acc.finalize();
}

std::pair<double, double> waic_difference(const WaicResult& a,
                                          const WaicResult& b) {
  const auto n = a.pointwise_lppd.size();
  if (n != b.pointwise_lppd.size())
    throw std::invalid_argument("waic_difference: mismatched data sizes");
  const Eigen::VectorXd diff = a.pointwise_waic() - b.pointwise_waic();
  const double delta = a.waic - b.waic;
  if (n < 2) return {delta, 0.0};
  const double mean = diff.mean();
  const double var =
      (diff.array() - mean).square().sum() / static_cast<double>(n - 1);
  const double se = std::sqrt(static_cast<double>(n)) * std::sqrt(var);
  return {delta, se};
}

}  // namespace abmcalib
