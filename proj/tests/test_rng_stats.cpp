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
#include <vector>

#include "rng.hpp"
#include "stats.hpp"

using namespace abmcalib;

TEST_SUITE_BEGIN("rng_stats");

TEST_CASE("streams are deterministic and tag-separated") {
  RngStream a = RngStream::derive(42, "data");
  RngStream b = RngStream::derive(42, "data");
  RngStream c = RngStream::derive(42, "warmup");
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  bool differs = false;
  RngStream a2 = RngStream::derive(42, "data");
  for (int i = 0; i < 100; ++i) differs |= a2.next_u64() != c.next_u64();
  CHECK(differs);

  RngStream child1 = a.child("x", 3);
  RngStream child2 = RngStream::derive(a.seed(), "x", 3);
  CHECK(child1.next_u64() == child2.next_u64());
}

TEST_CASE("uniform01 stays inside the open interval") {
  RngStream rng(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal and gamma moments") {
  RngStream rng(11);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::fabs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));

  double gsum = 0.0, gsum2 = 0.0;
  const double shape = 3.5;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gamma(shape);
    gsum += g;
    gsum2 += g * g;
  }
  const double gmean = gsum / n;
  CHECK(gmean == doctest::Approx(shape).epsilon(0.02));
  CHECK(gsum2 / n - gmean * gmean == doctest::Approx(shape).epsilon(0.05));

  // Beta(1,10) mean 1/11
  double bsum = 0.0;
  for (int i = 0; i < n; ++i) bsum += rng.beta(1.0, 10.0);
  CHECK(bsum / n == doctest::Approx(1.0 / 11.0).epsilon(0.03));
}

TEST_CASE("normal quantile inverts the cdf") {
  for (double p : {1e-6, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0 - 1e-6}) {
    const double x = stats::normal_quantile(p);
    CHECK(stats::normal_cdf(x) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK(stats::normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("beta cdf/quantile round trip") {
  for (double p : {0.05, 0.3, 0.5, 0.9, 0.99}) {
    const double x = stats::beta_quantile(p, 1.0, 10.0);
    CHECK(stats::beta_cdf(x, 1.0, 10.0) == doctest::Approx(p).epsilon(1e-8));
  }
  // Beta(1,b) has the closed form F(x) = 1 - (1-x)^b.
  CHECK(stats::beta_cdf(0.2, 1.0, 10.0) ==
        doctest::Approx(1.0 - std::pow(0.8, 10)).epsilon(1e-12));
}

TEST_CASE("log_sum_exp matches direct evaluation with shifts") {
  std::vector<double> xs{-1000.0, -1001.0, -999.5};
  double direct = 0.0;
  for (double x : xs) direct += std::exp(x + 1000.0);
  CHECK(stats::log_sum_exp(xs) ==
        doctest::Approx(std::log(direct) - 1000.0).epsilon(1e-12));
}

TEST_CASE("quantile interpolates") {
  std::vector<double> xs{4.0, 1.0, 3.0, 2.0};
  CHECK(stats::quantile(xs, 0.0) == 1.0);
  CHECK(stats::quantile(xs, 1.0) == 4.0);
  CHECK(stats::quantile(xs, 0.5) == doctest::Approx(2.5));
}

TEST_CASE("effective sample size: iid near n, constant chain 1") {
  RngStream rng(5);
  const int n = 10000;
  std::vector<double> iid(n);
  for (auto& x : iid) x = rng.normal();
  const double ess = stats::effective_sample_size(iid);
  CHECK(ess > 0.9 * n);
  CHECK(ess <= n);

  std::vector<double> constant(n, 3.14);
  CHECK(stats::effective_sample_size(constant) == doctest::Approx(1.0));

  // strongly autocorrelated AR(1) should have a much smaller ess
  std::vector<double> ar(n);
  double prev = 0.0;
  for (auto& x : ar) {
    prev = 0.95 * prev + rng.normal();
    x = prev;
  }
  CHECK(stats::effective_sample_size(ar) < 0.2 * n);
}

TEST_SUITE_END();
