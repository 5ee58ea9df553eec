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

#include "bnne/globalopt.hpp"
#include "bnne/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

namespace bnne {

namespace {

struct Strategy {
  int n;
  int lambda;
  int mu;
  VectorXd weights;
  double mu_eff;
  double c_sigma, d_sigma, c_c, c_1, c_mu, chi_n;

  Strategy(int dim, int lam) : n(dim), lambda(lam), mu(lam / 2) {
    mu = std::max(mu, 1);
    weights.resize(mu);
    for (int k = 0; k < mu; ++k) weights(k) = std::log(mu + 0.5) - std::log(k + 1.0);
    weights /= weights.sum();
    mu_eff = 1.0 / weights.squaredNorm();
    const double nd = n;
    c_sigma = (mu_eff + 2.0) / (nd + mu_eff + 5.0);
    d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (nd + 1.0)) - 1.0) + c_sigma;
    c_c = (4.0 + mu_eff / nd) / (nd + 4.0 + 2.0 * mu_eff / nd);
    c_1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + mu_eff);
    c_mu = std::min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nd + 2.0) * (nd + 2.0) + mu_eff));
    chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));
  }
};

// Counts evaluations and tracks the best point seen, in unit-cube coordinates.
class Tracker {
 public:
  Tracker(const Objective& f, const Box& box, int budget) : f_(f), box_(box), budget_(budget) {}

  bool exhausted() const { return used_ >= budget_; }
  int remaining() const { return budget_ - used_; }
  int used() const { return used_; }

  double operator()(const VectorXd& u) {
    const VectorXd x = box_.clip(box_.lower + (u.array() * box_.width().array()).matrix());
    const double v = f_(x);
    ++used_;
    // NaN only becomes the incumbent when nothing else has been seen
    if (best_x_.size() == 0 || v < best_value_ || (std::isnan(best_value_) && !std::isnan(v))) {
      best_value_ = v;
      best_x_ = x;
    }
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  }

  OptResult result() const { return {best_x_, best_value_, used_}; }

 private:
  const Objective& f_;
  const Box& box_;
  int budget_;
  int used_ = 0;
  double best_value_ = std::numeric_limits<double>::infinity();
  VectorXd best_x_;
};

// One CMA-ES descent from `mean` until stagnation or budget exhaustion.
void descend(Tracker& track, VectorXd mean, int lambda, Rng& rng) {
  const int n = static_cast<int>(mean.size());
  const Strategy st(n, lambda);
  std::normal_distribution<double> normal(0.0, 1.0);

  double sigma = 0.3;
  MatrixXd C = MatrixXd::Identity(n, n);
  MatrixXd B = MatrixXd::Identity(n, n);
  VectorXd D = VectorXd::Ones(n);
  VectorXd p_sigma = VectorXd::Zero(n);
  VectorXd p_c = VectorXd::Zero(n);

  const int history_len = 10 + static_cast<int>(std::ceil(30.0 * n / lambda));
  std::deque<double> best_history;

  MatrixXd xs(n, lambda);
  std::vector<double> fitness(static_cast<std::size_t>(lambda));
  std::vector<int> order(static_cast<std::size_t>(lambda));

  for (int gen = 0; !track.exhausted(); ++gen) {
    const int count = std::min(lambda, track.remaining());
    for (int k = 0; k < count; ++k) {
      VectorXd x;
      bool inside = false;
      for (int attempt = 0; attempt < 10 && !inside; ++attempt) {
        VectorXd z(n);
        for (int l = 0; l < n; ++l) z(l) = normal(rng);
        x = mean + sigma * (B * D.cwiseProduct(z));
        inside = (x.array() >= 0.0).all() && (x.array() <= 1.0).all();
      }
      if (!inside) x = x.cwiseMax(0.0).cwiseMin(1.0);
      xs.col(k) = x;
      fitness[static_cast<std::size_t>(k)] = track(x);
    }
    if (count < lambda) return;

    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return fitness[static_cast<std::size_t>(a)] < fitness[static_cast<std::size_t>(b)];
    });

    const VectorXd old_mean = mean;
    mean.setZero();
    for (int k = 0; k < st.mu; ++k) mean += st.weights(k) * xs.col(order[static_cast<std::size_t>(k)]);

    const VectorXd step = (mean - old_mean) / sigma;
    const VectorXd c_inv_half_step = B * (B.transpose() * step).cwiseQuotient(D);
    p_sigma = (1.0 - st.c_sigma) * p_sigma + std::sqrt(st.c_sigma * (2.0 - st.c_sigma) * st.mu_eff) * c_inv_half_step;
    const double ps_norm = p_sigma.norm();
    const bool h_sigma = ps_norm / std::sqrt(1.0 - std::pow(1.0 - st.c_sigma, 2.0 * (gen + 1))) <
                         (1.4 + 2.0 / (n + 1.0)) * st.chi_n;
    p_c = (1.0 - st.c_c) * p_c + (h_sigma ? std::sqrt(st.c_c * (2.0 - st.c_c) * st.mu_eff) : 0.0) * step;

    MatrixXd rank_mu = MatrixXd::Zero(n, n);
    for (int k = 0; k < st.mu; ++k) {
      const VectorXd y = (xs.col(order[static_cast<std::size_t>(k)]) - old_mean) / sigma;
      rank_mu += st.weights(k) * y * y.transpose();
    }
    const double delta_h = h_sigma ? 0.0 : st.c_c * (2.0 - st.c_c);
    C = (1.0 - st.c_1 - st.c_mu) * C + st.c_1 * (p_c * p_c.transpose() + delta_h * C) + st.c_mu * rank_mu;
    sigma *= std::exp((st.c_sigma / st.d_sigma) * (ps_norm / st.chi_n - 1.0));

    C = 0.5 * (C + C.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(C);
    if (eig.info() != Eigen::Success) return;
    VectorXd ev = eig.eigenvalues().cwiseMax(1e-300);
    B = eig.eigenvectors();
    D = ev.cwiseSqrt();

    // stagnation tests
    const double f_best = fitness[static_cast<std::size_t>(order.front())];
    const double f_worst = fitness[static_cast<std::size_t>(order.back())];
    best_history.push_back(f_best);
    if (static_cast<int>(best_history.size()) > history_len) best_history.pop_front();
    const auto [hmin, hmax] = std::minmax_element(best_history.begin(), best_history.end());
    const bool flat = static_cast<int>(best_history.size()) == history_len && (*hmax - *hmin) <= 1e-14 &&
                      (f_worst - f_best) <= 1e-14;
    const bool tiny_step = sigma * D.maxCoeff() < 1e-7;
    const bool ill_conditioned = ev.maxCoeff() > 1e14 * ev.minCoeff();
    const bool diverged = !std::isfinite(sigma) || sigma * D.maxCoeff() > 1e3;
    if (flat || tiny_step || ill_conditioned || diverged || !std::isfinite(f_best)) return;
  }
}

}  // namespace

OptResult minimize(const Objective& f, const Box& box, const OptBudget& budget) {
  if (budget.max_evals < 2) throw DomainError("minimize: budget must allow at least two evaluations");
  if (box.dim() < 1 || box.upper.size() != box.lower.size() ||
      !((box.upper.array() > box.lower.array()).all())) {
    throw DomainError("minimize: degenerate box");
  }
  const int n = box.dim();
  int lambda = budget.population.value_or(4 + static_cast<int>(std::floor(3.0 * std::log(n))));
  if (lambda < 2) throw DomainError("minimize: population must be >= 2");
  if (budget.max_evals < lambda) throw DomainError("minimize: budget smaller than population");

  Rng rng = make_rng(budget.seed, 0x43'4d'41);
  Tracker track(f, box, budget.max_evals);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  VectorXd start = VectorXd::Constant(n, 0.5);
  // Probe the center, the vertices when they are few, and a Latin hypercube;
  // descend from the best probe.
  if (budget.max_evals >= 4 * lambda) {
    const int probes = std::min(budget.max_evals / 5, 10 * n);
    double best = track(start);
    auto probe = [&](const VectorXd& u) {
      const double v = track(u);
      if (v < best) {
        best = v;
        start = u;
      }
    };
    int used = 1;
    if (n < 20 && (1 << n) <= (probes - 1) / 2) {
      for (int mask = 0; mask < (1 << n); ++mask, ++used) {
        VectorXd u(n);
        for (int l = 0; l < n; ++l) u(l) = (mask >> l) & 1;
        probe(u);
      }
    }
    if (probes > used) {
      const MatrixXd pts = latin_hypercube(probes - used, n, rng);
      for (int k = 0; k < pts.rows(); ++k) probe(pts.row(k).transpose());
    }
  }
  while (!track.exhausted()) {
    descend(track, start, lambda, rng);
    for (int l = 0; l < n; ++l) start(l) = unif(rng);
    lambda = std::min(2 * lambda, std::max(lambda, track.remaining() / 2));
    lambda = std::max(lambda, 2);
  }
  return track.result();
}

OptResult maximize(const Objective& f, const Box& box, const OptBudget& budget) {
  OptResult r = minimize([&f](const VectorXd& x) { return -f(x); }, box, budget);
  r.value = -r.value;
  return r;
}

}  // namespace bnne
