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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mcmc.hpp"
#include "rng.hpp"
#include "selection.hpp"
#include "stats.hpp"

using namespace abmcalib;

namespace {

// Conjugate toy: prior N(0,1), one observation y=0.5 with unit noise.
// Posterior N(0.25, 1/2); log marginal = ln N(0.5; 0, 2).
constexpr double kToyY = 0.5;
const double kToyLogMl = -0.5 * std::log(4.0 * M_PI) - 0.0625;

double toy_logq(const Eigen::VectorXd& x) {
  const double theta = x(0);
  return -0.5 * std::log(2.0 * M_PI) - 0.5 * theta * theta -
         0.5 * std::log(2.0 * M_PI) - 0.5 * (kToyY - theta) * (kToyY - theta);
}

Chain toy_chain(int iters, std::uint64_t seed) {
  SamplerConfig cfg;
  cfg.production_iters = iters;
  Eigen::MatrixXd prop(1, 1);
  prop(0, 0) = 1.2 * 1.2;
  RngStream rng(seed);
  return metropolis_run(toy_logq, Eigen::VectorXd::Constant(1, 0.25), prop, cfg,
                        rng);
}

}  // namespace

TEST_SUITE_BEGIN("selection");

TEST_CASE("fit_importance_density matches the sample moments") {
  RngStream rng(811);
  const int n = 20000;
  Eigen::MatrixXd samples(n, 2);
  // known normal: means (2, 0.5), sds (0.5, 0.1), independent; the second
  // coordinate's mass is far inside [0,1], so no truncation correction.
  for (int i = 0; i < n; ++i) {
    samples(i, 0) = 2.0 + 0.5 * rng.normal();
    samples(i, 1) = 0.5 + 0.1 * rng.normal();
  }
  RngStream mc(812);
  const ImportanceDensity g = fit_importance_density(samples, 1, mc);
  CHECK(g.mean(0) == doctest::Approx(2.0).epsilon(0.02));
  CHECK(g.mean(1) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(g.covariance(0, 0) == doctest::Approx(0.25).epsilon(0.05));
  CHECK(g.covariance(1, 1) == doctest::Approx(0.01).epsilon(0.05));
  CHECK(g.normalization_correction == 0.0);

  // the density integrates the truncation into logpdf support
  Eigen::VectorXd outside(2);
  outside << 2.0, 1.5;
  CHECK(std::isinf(g.logpdf(outside)));

  // samples honor the box
  RngStream draw(813);
  for (int k = 0; k < 1000; ++k) {
    const Eigen::VectorXd x = g.sample(draw);
    CHECK(x(1) >= 0.0);
    CHECK(x(1) <= 1.0);
  }
}

TEST_CASE("truncation correction approximates the retained mass") {
  RngStream rng(821);
  const int n = 50000;
  Eigen::MatrixXd samples(n, 1);
  // alpha-like coordinate: N(0, 0.5^2); box [0,1] keeps Phi(2) - Phi(0).
  for (int i = 0; i < n; ++i) samples(i, 0) = 0.5 * rng.normal();
  RngStream mc(822);
  const ImportanceDensity g = fit_importance_density(samples, 0, mc, 100000);
  const double expected =
      std::log(stats::normal_cdf(2.0) - stats::normal_cdf(0.0));
  // the fitted sd differs from 0.5 by sampling error; allow for both that
  // and the Monte-Carlo error of the mass estimate
  CHECK(g.normalization_correction == doctest::Approx(expected).epsilon(0.02));
  // and the spec-level sanity anchor: about half the mass survives
  CHECK(g.normalization_correction == doctest::Approx(std::log(0.5)).epsilon(0.1));
}

TEST_CASE("degenerate chain is repaired by the ridge") {
  Eigen::MatrixXd samples = Eigen::MatrixXd::Zero(1500, 2);
  samples.col(0).setConstant(-3.0);
  samples.col(1).setConstant(0.4);
  RngStream mc(831);
  const ImportanceDensity g = fit_importance_density(samples, 1, mc);
  CHECK(g.mean(0) == doctest::Approx(-3.0));
  CHECK(g.covariance(0, 0) > 0.0);
  CHECK(g.normalization_correction == doctest::Approx(0.0));
  // near-delta: a draw sits essentially at the point
  RngStream draw(832);
  const Eigen::VectorXd x = g.sample(draw);
  CHECK(x(0) == doctest::Approx(-3.0).epsilon(1e-3));
}

TEST_CASE("chain shorter than 1000 draws is rejected") {
  Eigen::MatrixXd samples = Eigen::MatrixXd::Zero(500, 2);
  RngStream mc(841);
  CHECK_THROWS_AS(fit_importance_density(samples, 1, mc),
                  std::invalid_argument);
}

TEST_CASE("bridge sampling recovers the conjugate evidence") {
  const Chain chain = toy_chain(60000, 900);
  RngStream fit_rng(901);
  const ImportanceDensity g =
      fit_importance_density(chain.samples, std::nullopt, fit_rng);
  RngStream bridge_rng(902);
  const MarginalLikelihoodEstimate est =
      bridge_sampling_logml(chain.samples, g, toy_logq, 5000, bridge_rng);
  CHECK(est.converged);
  CHECK(est.std_error < 1e-3);
  CHECK(std::fabs(est.log_ml - kToyLogMl) < 3.0 * est.std_error);
}

TEST_CASE("bridge converges immediately from the exact posterior density") {
  // Importance density set to the analytic posterior N(0.25, 0.5).
  ImportanceDensity g;
  g.mean = Eigen::VectorXd::Constant(1, 0.25);
  g.covariance = Eigen::MatrixXd::Constant(1, 1, 0.5);
  g.chol = Eigen::MatrixXd::Constant(1, 1, std::sqrt(0.5));
  g.log_det_half = std::log(std::sqrt(0.5));
  const Chain chain = toy_chain(20000, 903);
  RngStream bridge_rng(904);
  const MarginalLikelihoodEstimate est =
      bridge_sampling_logml(chain.samples, g, toy_logq, 5000, bridge_rng);
  CHECK(est.converged);
  CHECK(est.iterations <= 5);
  CHECK(est.log_ml == doctest::Approx(kToyLogMl).epsilon(1e-3));
}

TEST_CASE("bridge estimate is stable under doubling the sample count") {
  const Chain chain = toy_chain(60000, 905);
  RngStream fit_rng(906);
  const ImportanceDensity g =
      fit_importance_density(chain.samples, std::nullopt, fit_rng);
  RngStream r1(907), r2(908);
  const MarginalLikelihoodEstimate a =
      bridge_sampling_logml(chain.samples, g, toy_logq, 5000, r1);
  const MarginalLikelihoodEstimate b =
      bridge_sampling_logml(chain.samples, g, toy_logq, 10000, r2);
  const double se = std::sqrt(a.std_error * a.std_error +
                              b.std_error * b.std_error);
  CHECK(std::fabs(a.log_ml - b.log_ml) <= 3.0 * se + 1e-12);
}

TEST_CASE("log_bayes_factor categories") {
  auto ml = [](double value, bool converged = true) {
    MarginalLikelihoodEstimate est;
    est.log_ml = value;
    est.converged = converged;
    est.std_error = 1e-4;
    return est;
  };
  SUBCASE("equal evidence") {
    const BayesFactorResult r = log_bayes_factor(ml(-10.0), ml(-10.0));
    CHECK(r.log_bf == 0.0);
    CHECK(r.label() == "weak/none");
  }
  SUBCASE("strong evidence") {
    const BayesFactorResult r = log_bayes_factor(ml(-6.5), ml(-10.0));
    CHECK(r.log_bf == doctest::Approx(3.5));
    CHECK(r.label() == "strong");
  }
  SUBCASE("very strong for the second model") {
    const BayesFactorResult r = log_bayes_factor(ml(-16.0), ml(-10.0));
    CHECK(r.log_bf == doctest::Approx(-6.0));
    CHECK(r.label() == "very strong for model b");
  }
  SUBCASE("antisymmetry") {
    const BayesFactorResult ab = log_bayes_factor(ml(-6.0), ml(-10.0));
    const BayesFactorResult ba = log_bayes_factor(ml(-10.0), ml(-6.0));
    CHECK(ab.log_bf == -ba.log_bf);
  }
  SUBCASE("unconverged inputs are indeterminate") {
    const BayesFactorResult r = log_bayes_factor(ml(-6.0, false), ml(-10.0));
    CHECK(r.label() == "indeterminate");
  }
}

TEST_CASE("waic identities and toy values") {
  SUBCASE("identical rows: zero effective parameters") {
    Eigen::MatrixXd table(2, 3);
    table << -1.0, -2.0, -0.5, -1.0, -2.0, -0.5;
    const WaicResult r = waic(table);
    CHECK(r.p_waic == doctest::Approx(0.0));
    CHECK(r.waic == doctest::Approx(-2.0 * (-3.5)));
    CHECK(r.waic == doctest::Approx(-2.0 * (r.lppd - r.p_waic)).epsilon(1e-10));
  }
  SUBCASE("single datum at ln 0.5") {
    Eigen::MatrixXd table(2, 1);
    table << std::log(0.5), std::log(0.5);
    const WaicResult r = waic(table);
    CHECK(r.waic == doctest::Approx(-2.0 * std::log(0.5)).epsilon(1e-12));
  }
  SUBCASE("non-finite entries are reported with their location") {
    Eigen::MatrixXd table(2, 2);
    table << -1.0, -2.0, -1.0,
        -std::numeric_limits<double>::infinity();
    bool threw = false;
    try {
      waic(table);
    } catch (const std::invalid_argument& e) {
      threw = true;
      CHECK(std::string(e.what()).find("draw 1, datum 1") != std::string::npos);
    }
    CHECK(threw);
  }
  SUBCASE("normal toy model matches the analytic expectation") {
    // Posterior N(mu_n, s_n^2) with mu_n = 0.25, s_n^2 = 0.5; pointwise
    // log-likelihood at the single observation y = 0.5.
    // Analytic: lppd = ln N(y; mu_n, 1 + s_n^2),
    //           p_waic = s_n^4/2 + s_n^2 (y - mu_n)^2.
    const double mu_n = 0.25, s2 = 0.5, y = 0.5;
    const double lppd_true =
        -0.5 * std::log(2.0 * M_PI * (1.0 + s2)) -
        0.5 * (y - mu_n) * (y - mu_n) / (1.0 + s2);
    const double p_true = s2 * s2 / 2.0 + s2 * (y - mu_n) * (y - mu_n);
    const double waic_true = -2.0 * (lppd_true - p_true);

    const int reps = 5;
    std::vector<double> estimates;
    for (int rep = 0; rep < reps; ++rep) {
      RngStream rng(1000 + static_cast<std::uint64_t>(rep));
      const int s = 100000;
      WaicAccumulator acc(1);
      for (int i = 0; i < s; ++i) {
        const double theta = mu_n + std::sqrt(s2) * rng.normal();
        Eigen::VectorXd row(1);
        row(0) = -0.5 * std::log(2.0 * M_PI) - 0.5 * (y - theta) * (y - theta);
        acc.add_draw(row);
      }
      estimates.push_back(acc.finalize().waic);
    }
    const double mean_est = stats::mean(estimates);
    const double se_est = stats::sd(estimates) / std::sqrt(double(reps));
    CHECK(std::fabs(mean_est - waic_true) < 3.0 * se_est + 1e-3);
  }
}

TEST_CASE("waic_difference") {
  SUBCASE("identical results differ by zero") {
    Eigen::MatrixXd table(3, 4);
    table.setRandom();
    table.array() -= 2.0;
    const WaicResult a = waic(table);
    const auto [delta, se] = waic_difference(a, a);
    CHECK(delta == 0.0);
    CHECK(se == 0.0);
  }
  SUBCASE("one deviating datum against direct computation") {
    Eigen::MatrixXd ta(2, 4), tb(2, 4);
    ta << -1, -1, -1, -1, -2, -2, -2, -2;
    tb = ta;
    tb(0, 2) = -1.5;
    tb(1, 2) = -2.5;
    const WaicResult a = waic(ta);
    const WaicResult b = waic(tb);
    const auto [delta, se] = waic_difference(a, b);
    const Eigen::VectorXd dw = a.pointwise_waic() - b.pointwise_waic();
    CHECK(delta == doctest::Approx(a.waic - b.waic).epsilon(1e-12));
    const double mean = dw.mean();
    double var = 0.0;
    for (int i = 0; i < 4; ++i) var += (dw(i) - mean) * (dw(i) - mean);
    var /= 3.0;
    CHECK(se == doctest::Approx(std::sqrt(4.0) * std::sqrt(var)).epsilon(1e-12));
  }
  SUBCASE("mismatched sizes are rejected") {
    Eigen::MatrixXd ta(2, 4), tb(2, 3);
    ta.setConstant(-1.0);
    tb.setConstant(-1.0);
    CHECK_THROWS_AS(waic_difference(waic(ta), waic(tb)), std::invalid_argument);
  }
}

TEST_SUITE_END();
