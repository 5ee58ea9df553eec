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

#include "bnne/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bnne/sampling.hpp"

namespace bnne {

namespace {

constexpr double kPi = std::numbers::pi;

// integral_0^1 exp(-d (u - a)^2 / 2) du
double se_integral(double d, double a) {
  const double r = std::sqrt(d / 2.0);
  return std::sqrt(kPi / (2.0 * d)) * (std::erf(a * r) + std::erf((1.0 - a) * r));
}

// integral_0^1 exp(-d (u - a)^2 / 2) exp(-d (u - b)^2 / 2) du
double se_product_integral(double d, double a, double b) {
  const double h = std::sqrt(d) / 2.0;
  return std::sqrt(kPi / (4.0 * d)) * std::exp(-d * (a - b) * (a - b) / 4.0) *
         (std::erf(h * (a + b)) - std::erf(h * (a + b - 2.0)));
}

void check_query(const PlayerSurrogate& s, Block b, const Eigen::Ref<const VectorXd>& x) {
  if (x.size() != s.dim()) throw DomainError("acquisition: query dimension mismatch");
  if (b.offset < 0 || b.size < 1 || b.offset + b.size > s.dim()) {
    throw DomainError("acquisition: player block outside the joint space");
  }
}

// Opponent-coordinate factor: SE restricted to coordinates outside the block,
// and whether those coordinates coincide exactly.
struct OpponentMatch {
  double se = 1.0;
  bool coincide = true;
};

OpponentMatch opponent_match(const KernelParams& p, Block b, const Eigen::Ref<const VectorXd>& x,
                             const MatrixXd& train_x, Eigen::Index j) {
  OpponentMatch m;
  double expo = 0.0;
  for (Eigen::Index l = 0; l < x.size(); ++l) {
    if (b.contains(static_cast<int>(l))) continue;
    const double diff = x(l) - train_x(j, l);
    expo += p.d(l) * diff * diff;
    if (diff != 0.0) m.coincide = false;
  }
  m.se = std::exp(-0.5 * expo);
  return m;
}

double block_q_factor(const KernelParams& p, Block b, const MatrixXd& train_x, Eigen::Index j) {
  double prod = 1.0;
  for (int l = b.offset; l < b.offset + b.size; ++l) prod *= se_integral(p.d(l), train_x(j, l));
  return prod;
}

double block_Q_factor(const KernelParams& p, Block b, const MatrixXd& train_x, Eigen::Index i,
                      Eigen::Index j) {
  double prod = 1.0;
  for (int l = b.offset; l < b.offset + b.size; ++l) {
    prod *= se_product_integral(p.d(l), train_x(i, l), train_x(j, l));
  }
  return prod;
}

double unit_se_between(const KernelParams& p, const MatrixXd& train_x, Eigen::Index i, Eigen::Index j) {
  return std::exp(-0.5 * (p.d.array() * (train_x.row(i) - train_x.row(j)).transpose().array().square()).sum());
}

}  // namespace

VectorXd q_vector(const PlayerSurrogate& s, Block b, const Eigen::Ref<const VectorXd>& x) {
  check_query(s, b, x);
  const KernelParams& p = s.params();
  const MatrixXd& X = s.train_x();
  VectorXd q(s.size());
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    const OpponentMatch m = opponent_match(p, b, x, X, j);
    q(j) = (m.coincide ? p.v : 0.0) + p.c * m.se * block_q_factor(p, b, X, j);
  }
  return q;
}

MatrixXd q_matrix(const PlayerSurrogate& s, Block b, const Eigen::Ref<const VectorXd>& x) {
  check_query(s, b, x);
  const KernelParams& p = s.params();
  const MatrixXd& X = s.train_x();
  const Eigen::Index t = s.size();
  std::vector<OpponentMatch> m;
  m.reserve(static_cast<std::size_t>(t));
  for (Eigen::Index j = 0; j < t; ++j) m.push_back(opponent_match(p, b, x, X, j));

  MatrixXd Q(t, t);
  for (Eigen::Index qi = 0; qi < t; ++qi) {
    for (Eigen::Index pi = 0; pi <= qi; ++pi) {
      const auto& mp = m[static_cast<std::size_t>(pi)];
      const auto& mq = m[static_cast<std::size_t>(qi)];
      double val = p.c * p.c * mp.se * mq.se * block_Q_factor(p, b, X, pi, qi);
      if (mp.coincide || mq.coincide) {
        const double se_pq = unit_se_between(p, X, pi, qi);
        if (mp.coincide && (X.row(pi).array() == X.row(qi).array()).all()) val += p.v * p.v;
        if (mp.coincide) val += p.v * p.c * se_pq;
        if (mq.coincide) val += p.v * p.c * se_pq;
      }
      Q(pi, qi) = val;
      Q(qi, pi) = val;
    }
  }
  return Q;
}

double bar_mu_exact(const PlayerSurrogate& s, Block b, const Eigen::Ref<const VectorXd>& x) {
  return s.y_offset() + q_vector(s, b, x).dot(s.alpha());
}

double bar_sigma_exact(const PlayerSurrogate& s, Block b, const Eigen::Ref<const VectorXd>& x) {
  const double centered_mean = q_vector(s, b, x).dot(s.alpha());
  const double second_moment = s.alpha().dot(q_matrix(s, b, x) * s.alpha());
  return std::sqrt(std::max(0.0, second_moment - centered_mean * centered_mean));
}

Moments sampled_moments(const PlayerSurrogate& s, Block b, const Eigen::Ref<const VectorXd>& x,
                        int samples, Rng& rng) {
  check_query(s, b, x);
  if (samples < 1) throw DomainError("sampled_moments: need at least one sample");
  const MatrixXd draws = latin_hypercube(samples, b.size, rng);
  VectorXd z = x;
  VectorXd mu(samples);
  for (int k = 0; k < samples; ++k) {
    z.segment(b.offset, b.size) = draws.row(k).transpose();
    mu(k) = s.posterior_mean(z);
  }
  const double mean = mu.mean();
  return {mean, std::sqrt((mu.array() - mean).square().mean())};
}

double bar_mu_sampled(const PlayerSurrogate& s, Block b, const Eigen::Ref<const VectorXd>& x, int samples,
                      Rng& rng) {
  return sampled_moments(s, b, x, samples, rng).mean;
}

double bar_sigma_sampled(const PlayerSurrogate& s, Block b, const Eigen::Ref<const VectorXd>& x,
                         int samples, Rng& rng) {
  if (samples < 2) throw DomainError("bar_sigma_sampled: need at least two samples");
  return sampled_moments(s, b, x, samples, rng).std;
}

IntegratedPosterior::IntegratedPosterior(const PlayerSurrogate& s, Block b) : s_(&s), block_(b) {
  if (b.offset < 0 || b.size < 1 || b.offset + b.size > s.dim()) {
    throw DomainError("IntegratedPosterior: player block outside the joint space");
  }
  const KernelParams& p = s.params();
  const MatrixXd& X = s.train_x();
  const Eigen::Index t = s.size();
  q_block_.resize(t);
  Q_block_.resize(t, t);
  se_train_.resize(t, t);
  for (Eigen::Index qi = 0; qi < t; ++qi) {
    q_block_(qi) = block_q_factor(p, b, X, qi);
    for (Eigen::Index pi = 0; pi <= qi; ++pi) {
      Q_block_(pi, qi) = Q_block_(qi, pi) = block_Q_factor(p, b, X, pi, qi);
      se_train_(pi, qi) = se_train_(qi, pi) = unit_se_between(p, X, pi, qi);
    }
  }
}

Moments IntegratedPosterior::moments(const Eigen::Ref<const VectorXd>& x) const {
  const PlayerSurrogate& s = *s_;
  check_query(s, block_, x);
  const KernelParams& p = s.params();
  const MatrixXd& X = s.train_x();
  const VectorXd& alpha = s.alpha();
  const Eigen::Index t = s.size();

  VectorXd e(t);
  std::vector<Eigen::Index> coincident;
  for (Eigen::Index j = 0; j < t; ++j) {
    const OpponentMatch m = opponent_match(p, block_, x, X, j);
    e(j) = m.se;
    if (m.coincide) coincident.push_back(j);
  }
  const VectorXd w = alpha.cwiseProduct(e);
  double mean = p.c * w.dot(q_block_);
  double second = p.c * p.c * w.dot(Q_block_ * w);
  for (Eigen::Index j : coincident) {
    mean += p.v * alpha(j);
    // v^2 term pairs j with every training point identical to it; the two
    // v c cross terms are symmetric in (p, q).
    for (Eigen::Index k = 0; k < t; ++k) {
      if ((X.row(j).array() == X.row(k).array()).all()) second += p.v * p.v * alpha(j) * alpha(k);
    }
    second += 2.0 * p.v * p.c * alpha(j) * se_train_.row(j).dot(alpha);
  }
  return {s.y_offset() + mean, std::sqrt(std::max(0.0, second - mean * mean))};
}

RegretModel::RegretModel(const std::vector<PlayerSurrogate>& surrogates, std::vector<Block> blocks,
                         AcquisitionConfig cfg)
    : surrogates_(&surrogates), blocks_(std::move(blocks)), cfg_(cfg) {
  if (surrogates.empty() || surrogates.size() != blocks_.size()) {
    throw DomainError("RegretModel: need one surrogate per player block");
  }
  if (cfg_.gamma < 0.0) throw DomainError("RegretModel: gamma must be >= 0");
  if (cfg_.samples_per_dim < 1) throw DomainError("RegretModel: samples_per_dim must be >= 1");
  const MatrixXd& X0 = surrogates.front().train_x();
  for (const auto& s : surrogates) {
    if (s.train_x().rows() != X0.rows() || s.train_x().cols() != X0.cols() || s.train_x() != X0) {
      throw DomainError("RegretModel: surrogates were trained on different profiles");
    }
  }
  if (cfg_.mode == AcquisitionConfig::Mode::exact) {
    exact_.reserve(surrogates.size());
    for (std::size_t i = 0; i < surrogates.size(); ++i) exact_.emplace_back(surrogates[i], blocks_[i]);
  }
}

RegretEstimate RegretModel::evaluate(const Eigen::Ref<const VectorXd>& x, Rng* rng) const {
  const auto& ss = *surrogates_;
  RegretEstimate out;
  out.value = -std::numeric_limits<double>::infinity();
  out.per_player.reserve(ss.size());
  for (std::size_t i = 0; i < ss.size(); ++i) {
    Moments m;
    if (cfg_.mode == AcquisitionConfig::Mode::exact) {
      m = exact_[i].moments(x);
    } else {
      if (rng == nullptr) throw DomainError("RegretModel: sampled mode needs a random stream");
      m = sampled_moments(ss[i], blocks_[i], x, cfg_.samples_per_dim * blocks_[i].size, *rng);
    }
    PlayerRegretTerm term{m.mean, m.std, ss[i].posterior_mean(x), 0.0};
    term.term = term.bar_mu + cfg_.gamma * term.bar_sigma - term.mu;
    if (cfg_.scaled) {
      const double floor = cfg_.sigma_floor.value_or(1e-9 * ss[i].params().prior_variance());
      term.term /= std::max(term.bar_sigma, floor);
    }
    out.value = std::max(out.value, term.term);
    out.per_player.push_back(term);
  }
  return out;
}

RegretEstimate regret_hat(const std::vector<PlayerSurrogate>& surrogates, const std::vector<Block>& blocks,
                          const Eigen::Ref<const VectorXd>& x, const AcquisitionConfig& cfg, Rng* rng) {
  return RegretModel(surrogates, blocks, cfg).evaluate(x, rng);
}

}  // namespace bnne
