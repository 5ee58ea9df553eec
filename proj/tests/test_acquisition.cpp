/*
 * Copyright 2026 The bnne Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "bnne/acquisition.hpp"
#include "bnne/selftest.hpp"
#include "test_util.hpp"

namespace bnne {
namespace {

using testing::random_surrogate;
using testing::simpson;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double e : v) x(k++) = e;
  return x;
}

PlayerSurrogate single_point(double v, double c, const VectorXd& d, const VectorXd& at, double y = 0.7) {
  KernelParams p;
  p.v = v;
  p.c = c;
  p.d = d;
  MatrixXd X = at.transpose();
  return PlayerSurrogate::condition(p, X, VectorXd::Constant(1, y));
}

TEST(QVector, WorkedExample) {
  const PlayerSurrogate s = single_point(0.0, 1.0, vec({2, 2}), vec({0.5, 0.3}));
  const VectorXd q = q_vector(s, {0, 1}, vec({0.9, 0.3}));
  const double oracle = simpson([](double a) { return std::exp(-(a - 0.5) * (a - 0.5)); }, 0.0, 1.0);
  EXPECT_NEAR(q(0), oracle, 1e-10);
  EXPECT_NEAR(q(0), 0.92257, 1e-5);
  EXPECT_NEAR(q(0), std::sqrt(std::numbers::pi / 4) * 2 * std::erf(0.5), 1e-12);
}

TEST(QMatrix, WorkedExample) {
  const PlayerSurrogate s = single_point(0.0, 1.0, vec({2, 2}), vec({0.5, 0.3}));
  const MatrixXd Q = q_matrix(s, {0, 1}, vec({0.1, 0.3}));
  const double oracle = simpson([](double a) { return std::exp(-2 * (a - 0.5) * (a - 0.5)); }, 0.0, 1.0);
  EXPECT_NEAR(Q(0, 0), oracle, 1e-10);
  EXPECT_NEAR(Q(0, 0), 0.85562, 1e-5);
}

TEST(QVector, VanishingSignal) {
  Rng rng = make_rng(1);
  MatrixXd X = latin_hypercube(5, 2, rng);
  KernelParams p{0.0, 1e-300, vec({1, 1})};
  const PlayerSurrogate s = PlayerSurrogate::condition(p, X, VectorXd::LinSpaced(5, 0, 1));
  EXPECT_LE(q_vector(s, {0, 1}, vec({0.2, 0.4})).cwiseAbs().maxCoeff(), 1e-299);
  EXPECT_LE(q_matrix(s, {1, 1}, vec({0.2, 0.4})).cwiseAbs().maxCoeff(), 1e-299);
}

TEST(QVector, DecaysAwayFromOtherPlayers) {
  const PlayerSurrogate s = single_point(0.0, 1.0, vec({1, 100}), vec({0.5, 0.0}));
  const VectorXd q = q_vector(s, {0, 1}, vec({0.5, 1.0}));
  EXPECT_LT(q(0), 1e-12);
  EXPECT_GE(q(0), 0.0);
}

TEST(QVector, WhiteTermFiresOnlyOnCoincidence) {
  const PlayerSurrogate s = single_point(0.4, 1.0, vec({2, 2}), vec({0.5, 0.3}));
  const double base = q_vector(single_point(0.0, 1.0, vec({2, 2}), vec({0.5, 0.3})), {0, 1}, vec({0.0, 0.3}))(0);
  EXPECT_NEAR(q_vector(s, {0, 1}, vec({0.0, 0.3}))(0), base + 0.4, 1e-14);
  EXPECT_NEAR(q_vector(s, {0, 1}, vec({0.0, 0.30001}))(0),
              q_vector(single_point(0.0, 1.0, vec({2, 2}), vec({0.5, 0.3})), {0, 1}, vec({0.0, 0.30001}))(0),
              1e-14);
}

// Quadrature oracle over a one- or two-dimensional block, other coordinates at x.
double block_integral(const std::function<double(const VectorXd&)>& f, Block b, const VectorXd& x) {
  VectorXd z = x;
  if (b.size == 1) {
    return simpson([&](double a) { z(b.offset) = a; return f(z); }, 0.0, 1.0, 400);
  }
  return simpson(
      [&](double a) {
        return simpson([&](double c) { z(b.offset) = a; z(b.offset + 1) = c; return f(z); }, 0.0, 1.0, 200);
      },
      0.0, 1.0, 200);
}

TEST(ClosedForms, MatchQuadratureOffCoincidence) {
  Rng rng = make_rng(21);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const int n1 = 1 + trial % 2, n2 = 1 + (trial / 2) % 2;
    const double v = trial < 6 ? 0.0 : 0.3;
    PlayerSurrogate s = random_surrogate(rng, 6, n1 + n2, v);
    const Block b = trial % 3 == 0 ? Block{n1, n2} : Block{0, n1};
    VectorXd x(n1 + n2);
    for (auto& e : x) e = unif(rng);
    const VectorXd q = q_vector(s, b, x);
    const MatrixXd Q = q_matrix(s, b, x);
    const KernelParams& p = s.params();
    for (int j = 0; j < s.size(); ++j) {
      const VectorXd xj = s.train_x().row(j).transpose();
      const double oq = block_integral([&](const VectorXd& z) { return squared_exponential(p, z, xj); }, b, x);
      EXPECT_NEAR(q(j), oq, 1e-6 * std::max(oq, 1e-300));
      for (int k = 0; k <= j; ++k) {
        const VectorXd xk = s.train_x().row(k).transpose();
        const double oQ = block_integral(
            [&](const VectorXd& z) { return squared_exponential(p, z, xj) * squared_exponential(p, z, xk); }, b, x);
        EXPECT_NEAR(Q(j, k), oQ, 1e-6 * std::max(oQ, 1e-300));
        EXPECT_EQ(Q(j, k), Q(k, j));
      }
    }
  }
}

TEST(QMatrix, SymmetricPositiveSemidefinite) {
  Rng rng = make_rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const PlayerSurrogate s = random_surrogate(rng, 10, 3, trial % 2 ? 0.05 : 0.0);
    const VectorXd x = latin_hypercube(1, 3, rng).row(0).transpose();
    const MatrixXd Q = q_matrix(s, {0, 2}, x);
    EXPECT_TRUE(Q.isApprox(Q.transpose(), 0.0));
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Q);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8 * Q.norm());
  }
}

TEST(ClosedForms, OutOfRangeBlock) {
  Rng rng = make_rng(23);
  const PlayerSurrogate s = random_surrogate(rng, 4, 2, 0.0);
  EXPECT_THROW(q_vector(s, {1, 2}, vec({0.1, 0.2})), DomainError);
  EXPECT_THROW(q_vector(s, {0, 1}, vec({0.1, 0.2, 0.3})), DomainError);
}

TEST(Moments, ConstantPosteriorMean) {
  Rng rng = make_rng(24);
  const MatrixXd X = latin_hypercube(6, 2, rng);
  KernelParams p{0.01, 1.0, vec({3, 3})};
  const PlayerSurrogate s = PlayerSurrogate::condition(p, X, VectorXd::Constant(6, -1.75));
  const VectorXd x = vec({0.3, 0.8});
  EXPECT_DOUBLE_EQ(bar_mu_exact(s, {0, 1}, x), -1.75);
  EXPECT_EQ(bar_sigma_exact(s, {0, 1}, x), 0.0);
  for (int S : {2, 7, 100}) {
    const Moments m = sampled_moments(s, {1, 1}, x, S, rng);
    EXPECT_DOUBLE_EQ(m.mean, -1.75);
    EXPECT_EQ(m.std, 0.0);
  }
}

TEST(Moments, SinglePointAgainstPlainMonteCarlo) {
  MatrixXd X(2, 2);
  X << 0.35, 0.6, 0.9, 0.1;
  VectorXd y(2);
  y << 1.0, -0.5;
  const PlayerSurrogate s = PlayerSurrogate::condition({0.0, 1.3, vec({6, 2})}, X, y);
  const VectorXd x = vec({0.0, 0.45});
  const double exact = bar_mu_exact(s, {0, 1}, x);
  Rng rng = make_rng(25);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = 1000000;
  double sum = 0, sq = 0;
  VectorXd z = x;
  for (int k = 0; k < n; ++k) {
    z(0) = unif(rng);
    const double m = s.posterior_mean(z);
    sum += m;
    sq += m * m;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_LE(std::abs(exact - mean), 3 * se);
  const double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(bar_sigma_exact(s, {0, 1}, x), sd, 1e-3 * sd);
}

TEST(Moments, ExactAgreesWithSampledOnFittedSurrogates) {
  Rng rng = make_rng(26);
  const int S = 100000;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const int t = 5 + trial % 16;
    const MatrixXd X = latin_hypercube(t, n, rng);
    VectorXd y(t);
    for (int j = 0; j < t; ++j) y(j) = std::sin(5 * X(j, 0)) * X(j, n - 1) + X(j, 0);
    const PlayerSurrogate s = PlayerSurrogate::fit(X, y, 1, rng);
    const Block b{0, trial % 2 == 0 ? 1 : n - 1};
    const VectorXd x = latin_hypercube(1, n, rng).row(0).transpose();
    const double mu = bar_mu_exact(s, b, x), sigma = bar_sigma_exact(s, b, x);
    const Moments m = sampled_moments(s, b, x, S, rng);
    // Plug-in standard errors; the Latin hypercube only tightens these.
    EXPECT_LE(std::abs(mu - m.mean), 3 * m.std / std::sqrt(S) + 1e-12) << trial;
    EXPECT_LE(std::abs(sigma - m.std), 5 * m.std / std::sqrt(S) + 1e-12) << trial;
  }
}

TEST(Moments, SmallSampleSeedsDiffer) {
  Rng rng = make_rng(27);
  const PlayerSurrogate s = random_surrogate(rng, 10, 2, 0.0);
  const VectorXd x = vec({0.4, 0.6});
  Rng a = make_rng(1), b = make_rng(2);
  const Moments ma = sampled_moments(s, {0, 1}, x, 20, a);
  const Moments mb = sampled_moments(s, {0, 1}, x, 20, b);
  EXPECT_NE(ma.mean, mb.mean);
  const double mu = bar_mu_exact(s, {0, 1}, x), sigma = bar_sigma_exact(s, {0, 1}, x);
  for (const Moments& m : {ma, mb}) {
    EXPECT_LE(std::abs(m.mean - mu), 5 * sigma / std::sqrt(20.0));
    EXPECT_LE(std::abs(m.std - sigma), 5 * sigma / std::sqrt(20.0));
  }
  Rng c = make_rng(1);
  EXPECT_EQ(sampled_moments(s, {0, 1}, x, 20, c).mean, ma.mean);
}

TEST(Moments, SampledErrors) {
  Rng rng = make_rng(28);
  const PlayerSurrogate s = random_surrogate(rng, 4, 2, 0.0);
  EXPECT_THROW(bar_sigma_sampled(s, {0, 1}, vec({0.1, 0.1}), 1, rng), DomainError);
  EXPECT_THROW(bar_mu_sampled(s, {0, 1}, vec({0.1, 0.1}), 0, rng), DomainError);
  EXPECT_NO_THROW(bar_mu_sampled(s, {0, 1}, vec({0.1, 0.1}), 1, rng));
}

TEST(Moments, CachedMatchesFreeFunctions) {
  Rng rng = make_rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const PlayerSurrogate s = random_surrogate(rng, 9, 4, trial % 2 ? 0.2 : 0.0);
    const Block b{trial % 2 == 0 ? 0 : 2, 2};
    const IntegratedPosterior ip(s, b);
    for (int k = 0; k < 5; ++k) {
      VectorXd x = latin_hypercube(1, 4, rng).row(0).transpose();
      if (k == 0) x = s.train_x().row(0).transpose();
      const Moments m = ip.moments(x);
      EXPECT_NEAR(m.mean, bar_mu_exact(s, b, x), 1e-12);
      EXPECT_NEAR(m.std, bar_sigma_exact(s, b, x), 1e-9);
    }
  }
}

TEST(Moments, StdBoundedByHalfRange) {
  Rng rng = make_rng(30);
  for (int trial = 0; trial < 10; ++trial) {
    const PlayerSurrogate s = random_surrogate(rng, 8, 2, 0.0);
    const VectorXd x = latin_hypercube(1, 2, rng).row(0).transpose();
    VectorXd z = x;
    double lo = INFINITY, hi = -INFINITY;
    for (int k = 0; k <= 4000; ++k) {
      z(0) = k / 4000.0;
      const double m = s.posterior_mean(z);
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    EXPECT_LE(bar_sigma_exact(s, {0, 1}, x), 0.5 * (hi - lo) + 1e-9);
  }
}

TEST(LinearFixture, UniformMomentsAndMaximumRecovery) {
  const PlayerSurrogate s = make_linear_fixture();
  const VectorXd x = vec({1.0, 0.37});
  EXPECT_NEAR(s.posterior_mean(x), 1.0, 1e-3);
  EXPECT_NEAR(bar_mu_exact(s, {0, 1}, x), 0.5, 1e-3);
  EXPECT_NEAR(bar_sigma_exact(s, {0, 1}, x), 1.0 / std::sqrt(12.0), 1e-3);
  Rng rng = make_rng(31);
  EXPECT_NEAR(bar_sigma_sampled(s, {0, 1}, x, 100000, rng), 1.0 / std::sqrt(12.0), 1e-3);

  AcquisitionConfig cfg;
  cfg.gamma = std::sqrt(3.0);
  cfg.scaled = false;
  std::vector<PlayerSurrogate> ss{s};
  const RegretEstimate r = regret_hat(ss, {{0, 1}}, x, cfg);
  EXPECT_NEAR(r.per_player[0].term, 0.0, 1e-3);
}

std::vector<PlayerSurrogate> constant_pair(double a, double b) {
  Rng rng = make_rng(40);
  const MatrixXd X = latin_hypercube(7, 2, rng);
  KernelParams p{0.01, 1.0, vec({2, 2})};
  return {PlayerSurrogate::condition(p, X, VectorXd::Constant(7, a)),
          PlayerSurrogate::condition(p, X, VectorXd::Constant(7, b))};
}

TEST(RegretHat, ConstantMeansUnscaledIsZero) {
  const auto ss = constant_pair(1.0, -2.0);
  AcquisitionConfig cfg;
  cfg.scaled = false;
  const RegretEstimate r = regret_hat(ss, {{0, 1}, {1, 1}}, vec({0.2, 0.9}), cfg);
  EXPECT_EQ(r.value, 0.0);
  ASSERT_EQ(r.per_player.size(), 2u);
  EXPECT_DOUBLE_EQ(r.per_player[1].bar_mu, -2.0);
}

TEST(RegretHat, ScaledDegenerateStaysFinite) {
  const auto ss = constant_pair(1.0, -2.0);
  const RegretEstimate r = regret_hat(ss, {{0, 1}, {1, 1}}, vec({0.2, 0.9}), AcquisitionConfig{});
  EXPECT_TRUE(std::isfinite(r.value));
  // numerator gamma * 0 over the floor
  EXPECT_EQ(r.value, 0.0);
}

TEST(RegretHat, ValueIsMaxOfTermsAndScalingPerPlayer) {
  Rng rng = make_rng(41);
  const MatrixXd X = latin_hypercube(10, 2, rng);
  VectorXd y1(10), y2(10);
  for (int j = 0; j < 10; ++j) {
    y1(j) = X(j, 1) * X(j, 1) - X(j, 0) * X(j, 0);
    y2(j) = -y1(j) + 0.5 * X(j, 0);
  }
  KernelParams p{1e-4, 1.0, vec({3, 3})};
  std::vector<PlayerSurrogate> ss{PlayerSurrogate::condition(p, X, y1), PlayerSurrogate::condition(p, X, y2)};
  for (bool scaled : {true, false}) {
    AcquisitionConfig cfg;
    cfg.scaled = scaled;
    for (int k = 0; k < 20; ++k) {
      const VectorXd x = latin_hypercube(1, 2, rng).row(0).transpose();
      const RegretEstimate r = regret_hat(ss, {{0, 1}, {1, 1}}, x, cfg);
      double m = -INFINITY;
      for (const auto& t : r.per_player) {
        const double num = t.bar_mu + cfg.gamma * t.bar_sigma - t.mu;
        const double floor = 1e-9 * p.prior_variance();
        EXPECT_NEAR(t.term, scaled ? num / std::max(t.bar_sigma, floor) : num, 1e-12 * (1 + std::abs(t.term)));
        m = std::max(m, t.term);
      }
      EXPECT_EQ(r.value, m);
    }
  }
}

TEST(RegretHat, Errors) {
  Rng rng = make_rng(42);
  KernelParams p{1e-4, 1.0, vec({3, 3})};
  const PlayerSurrogate a = PlayerSurrogate::condition(p, latin_hypercube(5, 2, rng), VectorXd::Zero(5));
  const PlayerSurrogate b = PlayerSurrogate::condition(p, latin_hypercube(5, 2, rng), VectorXd::Zero(5));
  std::vector<PlayerSurrogate> mismatched{a, b};
  EXPECT_THROW(regret_hat(mismatched, {{0, 1}, {1, 1}}, vec({0.5, 0.5}), {}), DomainError);
  std::vector<PlayerSurrogate> ok{a, a};
  AcquisitionConfig sampled;
  sampled.mode = AcquisitionConfig::Mode::sampled;
  EXPECT_THROW(regret_hat(ok, {{0, 1}, {1, 1}}, vec({0.5, 0.5}), sampled), DomainError);
  EXPECT_NO_THROW(regret_hat(ok, {{0, 1}, {1, 1}}, vec({0.5, 0.5}), sampled, &rng));
  AcquisitionConfig negative;
  negative.gamma = -1;
  EXPECT_THROW(regret_hat(ok, {{0, 1}, {1, 1}}, vec({0.5, 0.5}), negative), DomainError);
  EXPECT_THROW(regret_hat(ok, {{0, 1}}, vec({0.5, 0.5}), {}), DomainError);
}

}  // namespace
}  // namespace bnne
