//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "rigidflow/error.hpp"
#include "rigidflow/flow_disc.hpp"

namespace rigidflow {
namespace {

Posterior uniform_posterior(int k, int v) {
  return Posterior::Constant(k, v, 1.0 / v);
}

Posterior dirac_posterior(const Tokens &m1, int v) {
  Posterior p = Posterior::Zero(static_cast<Eigen::Index>(m1.size()), v);
  for (std::size_t i = 0; i < m1.size(); ++i)
    p(static_cast<Eigen::Index>(i), m1[i] - 1) = 1;
  return p;
}

TEST_CASE("masking path samples") {
  Rng rng(51);
  for (int i = 0; i < 1000; ++i) {
    CHECK(conditional_path_sample(3, 0.0, rng) == kMaskToken);
    CHECK(conditional_path_sample(3, 1.0, rng) == 3);
  }
  int hit = 0;
  for (int i = 0; i < 100000; ++i)
    hit += conditional_path_sample(2, 0.3, rng) == 2;
  CHECK(std::abs(hit / 1e5 - 0.3) < 0.005);
  CHECK_THROWS_AS(conditional_path_sample(kMaskToken, 0.5, rng), Error);
}

TEST_CASE("marginal of the masking path over a data distribution") {
  Rng rng(52);
  const std::vector<double> data { 0.5, 0.3, 0.2 };
  const double t = 0.6;
  std::vector<double> counts(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    const int m1 = u < 0.5 ? 1 : (u < 0.8 ? 2 : 3);
    counts[conditional_path_sample(m1, t, rng)] += 1.0 / n;
  }
  double tv = std::abs(counts[0] - (1 - t));
  for (int c = 1; c <= 3; ++c)
    tv += std::abs(counts[c] - t * data[c - 1]);
  CHECK(tv / 2 < 0.01);
}

TEST_CASE("conditional rate indicator formula") {
  CHECK(conditional_rate(kMaskToken, 4, 4, 0.5) == 2.0);
  CHECK(conditional_rate(4, kMaskToken, 4, 0.9) == 0.0);
  CHECK(conditional_rate(kMaskToken, 3, 4, 0.2) == 0.0);
  CHECK(conditional_rate(2, 4, 4, 0.2) == 0.0);
  CHECK(conditional_rate_uniform(2, 4, 4, 0.5) == 2.0);
  CHECK(conditional_rate_uniform(4, 2, 4, 0.5) == 0.0);
}

TEST_CASE("kolmogorov forward equation holds for the conditional paths") {
  const int v = 5;
  for (int m1 = 1; m1 <= v; ++m1)
    for (int s = 0; s < 20; ++s) {
      const double t = 0.02 + 0.95 * s / 19.0;
      auto path = [&](double u) { return masking_path(m1, v, u); };
      auto rates = [&](double u) { return masking_rates(m1, v, u); };
      CHECK(kolmogorov_residual(path, rates, t, 1e-5) < 1e-6);
    }
  auto p0 = [](double u) { return masking_path(1, 3, u); };
  auto q0 = [](double u) { return masking_rates(1, 3, u); };
  CHECK(kolmogorov_residual(p0, q0, 0.0, 1e-5) < 1e-6);

  auto flat = [](double) { return Eigen::VectorXd::Constant(4, 0.25).eval(); };
  auto none = [](double) { return Eigen::MatrixXd::Zero(4, 4).eval(); };
  CHECK(kolmogorov_residual(flat, none, 0.4, 1e-5) == 0.0);

  // Uniform-noise ablation path with its own rates.
  auto up = [&](double u) {
    Eigen::VectorXd p = Eigen::VectorXd::Constant(v, (1 - u) / v);
    p[2] += u;
    return p;
  };
  auto uq = [&](double u) {
    Eigen::MatrixXd q(v, v);
    for (int j = 0; j < v; ++j)
      for (int l = 0; l < v; ++l)
        q(j, l) = conditional_rate_uniform(j + 1, l + 1, 3, u);
    return q;
  };
  CHECK(kolmogorov_residual(up, uq, 0.5, 1e-5) < 1e-6);

  // Wrong rates are caught.
  auto twice = [&](double u) { return (2 * masking_rates(2, v, u)).eval(); };
  auto p2 = [&](double u) { return masking_path(2, v, u); };
  CHECK(kolmogorov_residual(p2, twice, 0.5, 1e-5) > 0.1);
}

TEST_CASE("remasking satisfies detailed balance on the masking path") {
  for (double eta: { 0.5, 1.5 })
    for (double t = 0.05; t < 1; t += 0.1) {
      const Eigen::VectorXd p = masking_path(1, 2, t);
      CHECK(p[1] * eta == doctest::Approx(p[kMaskToken] * eta * t / (1 - t)));
    }
}

TEST_CASE("generative rates") {
  SamplingKnobs knobs;
  const auto q = generative_rates({ kMaskToken }, 0.5, uniform_posterior(1, 4), knobs);
  CHECK(q(0, kMaskToken) == 0.0);
  for (int l = 1; l <= 4; ++l)
    CHECK(q(0, l) == doctest::Approx(0.5));

  const auto fixed = generative_rates({ 2 }, 0.5, uniform_posterior(1, 4), knobs);
  CHECK(fixed.cwiseAbs().maxCoeff() == 0.0);

  knobs.eta = 1.5;
  const auto re = generative_rates({ 2, kMaskToken }, 0.5, uniform_posterior(2, 4), knobs);
  CHECK(re(0, kMaskToken) == 1.5);
  CHECK(re(1, 1) == doctest::Approx(0.25 * 1.75 / 0.5));

  Posterior skew(1, 3);
  skew << 0.7, 0.2, 0.1;
  knobs = {};
  knobs.temp_lo = knobs.temp_hi = 1e9;
  const auto hot = generative_rates({ kMaskToken }, 0.0, skew, knobs);
  for (int l = 1; l <= 3; ++l)
    CHECK(std::abs(hot(0, l) - 1.0 / 3) < 1e-6);
}

TEST_CASE("temperature keeps the argmax") {
  Rng rng(53);
  for (int trial = 0; trial < 200; ++trial) {
    Posterior p(1, 6);
    for (int c = 0; c < 6; ++c)
      p(0, c) = uniform01(rng) + 1e-3;
    p /= p.sum();
    Eigen::Index want, got;
    p.row(0).maxCoeff(&want);
    for (double temp: { 0.1, 0.7, 1.0, 1.5, 20.0 }) {
      const Posterior q = tempered(p, temp);
      q.row(0).maxCoeff(&got);
      CHECK(got == want);
      CHECK(q.sum() == doctest::Approx(1.0));
    }
  }
  CHECK_THROWS_AS(tempered(Posterior::Zero(1, 3), 1.0), Error);
  CHECK_THROWS_AS(tempered(uniform_posterior(1, 3), 0.0), Error);
}

TEST_CASE("ctmc steps") {
  Rng rng(54);
  const Tokens start { kMaskToken, 2, kMaskToken };
  CHECK(ctmc_step(start, RateMatrix::Zero(3, 4), 0.1, rng) == start);

  // Dirac posterior: the last step has jump probability h / (1 - t) = 1.
  const Tokens m1 { 3, 1, 2 };
  const int steps = 100;
  for (int n = 0; n < 1000; ++n) {
    Tokens x(3, kMaskToken);
    int masked = 3;
    for (int s = 0; s < steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      x = ctmc_step(x, generative_rates(x, t, dirac_posterior(m1, 3), {}),
                    1.0 / steps, rng);
      const int now = static_cast<int>(std::count(x.begin(), x.end(), kMaskToken));
      CHECK(now <= masked);
      masked = now;
    }
    CHECK(x == m1);
  }
}

TEST_CASE("remasking keeps the masking marginal") {
  Rng rng(55);
  SamplingKnobs knobs;
  knobs.eta = 1.5;
  const int steps = 500, n = 20000;
  const double stop = 0.5;
  int unmasked = 0;
  for (int i = 0; i < n; ++i) {
    Tokens x { kMaskToken };
    for (int s = 0; s < steps * stop; ++s) {
      const double t = static_cast<double>(s) / steps;
      x = ctmc_step(x, generative_rates(x, t, dirac_posterior({ 1 }, 2), knobs),
                    1.0 / steps, rng);
    }
    unmasked += x[0] == 1;
  }
  CHECK(std::abs(static_cast<double>(unmasked) / n - stop) < 0.02);
}

TEST_CASE("uniform prior ablation reaches the data token") {
  Rng rng(56);
  SamplingKnobs knobs;
  knobs.prior = DiscretePrior::kUniform;
  const int steps = 100;
  for (int n = 0; n < 500; ++n) {
    Tokens x { conditional_path_sample_uniform(2, 4, 0.0, rng) };
    CHECK(x[0] != kMaskToken);
    for (int s = 0; s < steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      x = ctmc_step(x, generative_rates(x, t, dirac_posterior({ 2 }, 4), knobs),
                    1.0 / steps, rng);
    }
    CHECK(x[0] == 2);
  }
}

TEST_CASE("force unmask fills remaining masks only") {
  Rng rng(57);
  const Tokens x { kMaskToken, 3 };
  const Tokens y = force_unmask(x, dirac_posterior({ 2, 1 }, 3), 1.0, rng);
  CHECK(y == Tokens { 2, 3 });
}

TEST_CASE("dfm loss") {
  CHECK(dfm_loss(dirac_posterior({ 1, 3 }, 3), { 1, 3 }, { true, true }) == 0.0);
  CHECK(dfm_loss(uniform_posterior(1, 7), { 4 }, { true }) == doctest::Approx(std::log(7.0)));
  CHECK(dfm_loss(uniform_posterior(2, 7), { 4, 1 }, { false, false }) == 0.0);
  CHECK_THROWS_AS(dfm_loss(uniform_posterior(2, 7), { 4 }, { true }), Error);
}

TEST_CASE("knob validation") {
  SamplingKnobs k;
  CHECK_NOTHROW(k.validate());
  k.temp_lo = 1.5;
  k.temp_hi = 1.0;
  CHECK_THROWS_AS(k.validate(), Error);
  k = {};
  k.eta = -1;
  CHECK_THROWS_AS(k.validate(), Error);
  k = {};
  k.temp_lo = 1.0;
  k.temp_hi = 1.5;
  CHECK(k.temperature(0.5) == doctest::Approx(1.25));
}

}  // namespace
}  // namespace rigidflow
