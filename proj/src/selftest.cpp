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

#include "bnne/selftest.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bnne/acquisition.hpp"
#include "bnne/sampling.hpp"

namespace bnne {

namespace {

using boost::math::quadrature::gauss_kronrod;

// Adaptive quadrature of f over [0,1]^dims (dims 1 or 2).
template <typename F>
double integrate_unit(const F& f, int dims) {
  constexpr double tol = 1e-12;
  if (dims == 1) {
    return gauss_kronrod<double, 31>::integrate([&](double a) { return f(a, 0.0); }, 0.0, 1.0, 15, tol);
  }
  return gauss_kronrod<double, 31>::integrate(
      [&](double a) {
        return gauss_kronrod<double, 31>::integrate([&](double b) { return f(a, b); }, 0.0, 1.0, 15, tol);
      },
      0.0, 1.0, 15, tol);
}

// Squared-exponential part of the kernel written out directly.
double se(const KernelParams& p, const VectorXd& a, const MatrixXd& X, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index l = 0; l < a.size(); ++l) s += p.d(l) * (a(l) - X(j, l)) * (a(l) - X(j, l));
  return p.c * std::exp(-0.5 * s);
}

struct RandomInstance {
  PlayerSurrogate surrogate;
  Block block;
  VectorXd x;
};

RandomInstance random_instance(Rng& rng, bool white) {
  std::uniform_int_distribution<int> dim_pick(1, 2), t_pick(1, 10);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n1 = dim_pick(rng), n2 = dim_pick(rng);
  const int n = n1 + n2, t = t_pick(rng);
  MatrixXd X(t, n);
  for (int j = 0; j < t; ++j)
    for (int l = 0; l < n; ++l) X(j, l) = unif(rng);
  VectorXd y(t);
  for (int j = 0; j < t; ++j) y(j) = unif(rng) - 0.5;
  KernelParams p;
  p.v = white ? std::pow(10.0, -3.0 + 3.0 * unif(rng)) : 0.0;
  p.c = std::pow(10.0, -1.0 + 2.0 * unif(rng));
  p.d.resize(n);
  for (int l = 0; l < n; ++l) p.d(l) = std::pow(10.0, -2.0 + 4.0 * unif(rng));
  PlayerSurrogate s = PlayerSurrogate::condition(p, X, y);
  const bool first = unif(rng) < 0.5;
  const Block b = first ? Block{0, n1} : Block{n1, n2};
  VectorXd x(n);
  for (int l = 0; l < n; ++l) x(l) = unif(rng);
  return {std::move(s), b, std::move(x)};
}

double relative_error(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

SelfTestCheck check_quadrature(const SelfTestOptions& opts, bool white) {
  Rng rng = make_rng(opts.seed, white ? 2 : 1);
  const int count = white ? opts.quadrature_instances_white : opts.quadrature_instances;
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    const RandomInstance inst = random_instance(rng, white);
    const KernelParams& p = inst.surrogate.params();
    const MatrixXd& X = inst.surrogate.train_x();
    const Block b = inst.block;
    const VectorXd q = q_vector(inst.surrogate, b, inst.x);
    const MatrixXd Q = q_matrix(inst.surrogate, b, inst.x);
    auto at = [&](double a0, double a1) {
      VectorXd z = inst.x;
      z(b.offset) = a0;
      if (b.size > 1) z(b.offset + 1) = a1;
      return z;
    };
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
      const double want = integrate_unit([&](double a0, double a1) { return se(p, at(a0, a1), X, j); }, b.size);
      worst = std::max(worst, relative_error(q(j), want));
      for (Eigen::Index m = 0; m <= j; ++m) {
        const double wq = integrate_unit(
            [&](double a0, double a1) {
              const VectorXd z = at(a0, a1);
              return se(p, z, X, j) * se(p, z, X, m);
            },
            b.size);
        worst = std::max({worst, relative_error(Q(j, m), wq), relative_error(Q(m, j), wq)});
      }
    }
  }
  std::ostringstream os;
  os << count << " instances, worst relative error " << worst;
  return {white ? "closed form vs quadrature (v > 0, off coincidence)" : "closed form vs quadrature (v = 0)",
          worst <= 1e-6, os.str()};
}

}  // namespace

PlayerSurrogate make_linear_fixture() {
  constexpr int K = 21;
  const double x2s[] = {0.0, 0.5, 1.0};
  MatrixXd X(3 * K, 2);
  VectorXd y(3 * K);
  int r = 0;
  for (double b : x2s) {
    for (int k = 0; k < K; ++k, ++r) {
      X(r, 0) = k / (K - 1.0);
      X(r, 1) = b;
      y(r) = X(r, 0);
    }
  }
  return PlayerSurrogate::condition({1e-8, 1.0, (VectorXd(2) << 4.0, 0.01).finished()}, X, y);
}

std::vector<SelfTestCheck> run_selftest(const SelfTestOptions& opts) {
  std::vector<SelfTestCheck> out;
  out.push_back(check_quadrature(opts, false));
  out.push_back(check_quadrature(opts, true));

  {
    Rng rng = make_rng(opts.seed, 3);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int bad_mu = 0, bad_sigma = 0;
    double worst_mu = 0.0, worst_sigma = 0.0;
    for (int k = 0; k < opts.consistency_instances; ++k) {
      const int n1 = 1 + static_cast<int>(rng() % 2), n2 = 1 + static_cast<int>(rng() % 2);
      const int n = n1 + n2;
      const int t = 5 + static_cast<int>(rng() % 16);
      const MatrixXd X = latin_hypercube(t, n, rng);
      const VectorXd w = VectorXd::NullaryExpr(n, [&](Eigen::Index) { return 4.0 * unif(rng) - 2.0; });
      VectorXd y(t);
      for (int j = 0; j < t; ++j) y(j) = std::sin(3.0 * X.row(j).dot(w)) + X(j, 0) * X(j, n - 1);
      const PlayerSurrogate s = PlayerSurrogate::fit(X, y, 1, rng);
      const Block b = unif(rng) < 0.5 ? Block{0, n1} : Block{n1, n2};
      const VectorXd x = VectorXd::NullaryExpr(n, [&](Eigen::Index) { return unif(rng); });

      const MatrixXd draws = latin_hypercube(opts.samples, b.size, rng);
      VectorXd mu(opts.samples);
      VectorXd z = x;
      for (int m = 0; m < opts.samples; ++m) {
        z.segment(b.offset, b.size) = draws.row(m).transpose();
        mu(m) = s.posterior_mean(z);
      }
      const double mean = mu.mean();
      const VectorXd dev = mu.array() - mean;
      const double var = dev.squaredNorm() / opts.samples;
      const double sd = std::sqrt(var);
      const double m4 = dev.array().pow(4).mean();
      const double se_mean = sd / std::sqrt(static_cast<double>(opts.samples));
      const double se_sd = std::sqrt(std::max(m4 - var * var, 0.0) / opts.samples) / (2.0 * std::max(sd, 1e-300));

      const double e_mu = std::abs(bar_mu_exact(s, b, x) - mean) / std::max(se_mean, 1e-15);
      const double e_sd = std::abs(bar_sigma_exact(s, b, x) - sd) / std::max(se_sd, 1e-15);
      worst_mu = std::max(worst_mu, e_mu);
      worst_sigma = std::max(worst_sigma, e_sd);
      bad_mu += e_mu > 3.0;
      bad_sigma += e_sd > 5.0;
    }
    std::ostringstream os;
    os << opts.consistency_instances << " surrogates, worst |diff|/SE: mean " << worst_mu << ", std "
       << worst_sigma;
    out.push_back({"exact vs sampled moments", bad_mu == 0 && bad_sigma == 0, os.str()});
  }

  {
    const PlayerSurrogate s = make_linear_fixture();
    const VectorXd x = (VectorXd(2) << 1.0, 0.37).finished();
    const double recovered = bar_mu_exact(s, {0, 1}, x) + std::sqrt(3.0) * bar_sigma_exact(s, {0, 1}, x);
    std::ostringstream os;
    os << "mean + sqrt(3) std = " << recovered << " (target 1)";
    out.push_back({"uniform maximum recovery", std::abs(recovered - 1.0) <= 1e-3, os.str()});
  }
  return out;
}

}  // namespace bnne
