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

#pragma once

#include <optional>
#include <vector>

#include "bnne/gp.hpp"
#include "bnne/linalg.hpp"

namespace bnne {

/// Settings of the approximate-regret acquisition
///   h(x) = max_i  mu_bar_i(x) + gamma sigma_bar_i(x) - mu_i(x),
/// where mu_bar_i / sigma_bar_i are the mean / std of player i's posterior
/// mean over its own (uniformly distributed) actions, others held at x.
struct AcquisitionConfig {
  enum class Mode { exact, sampled };

  /// 99th percentile of the standard normal.
  double gamma = 2.32635;
  Mode mode = Mode::exact;
  /// Sampled mode draws samples_per_dim * (player block size) points.
  int samples_per_dim = 10;
  /// Divide each player's term by its sigma_bar.
  bool scaled = true;
  /// Lower guard for sigma_bar when scaling; defaults to 1e-9 (c + v).
  std::optional<double> sigma_floor;
};

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

// Closed forms below assume inputs normalized to the unit cube and integrate
// against the uniform density on player i's block.

/// q_j = integral over the block of k((x_i', x_-i), x^(j)).
VectorXd q_vector(const PlayerSurrogate& s, Block player, const Eigen::Ref<const VectorXd>& x);

/// Q_pq = integral over the block of k((x_i', x_-i), x^(p)) k((x_i', x_-i), x^(q)).
MatrixXd q_matrix(const PlayerSurrogate& s, Block player, const Eigen::Ref<const VectorXd>& x);

double bar_mu_exact(const PlayerSurrogate& s, Block player, const Eigen::Ref<const VectorXd>& x);
double bar_sigma_exact(const PlayerSurrogate& s, Block player, const Eigen::Ref<const VectorXd>& x);

/// Plug-in mean / std of the posterior mean over `samples` Latin hypercube
/// draws of the player's block (std uses divisor `samples`).
Moments sampled_moments(const PlayerSurrogate& s, Block player, const Eigen::Ref<const VectorXd>& x,
                        int samples, Rng& rng);
double bar_mu_sampled(const PlayerSurrogate& s, Block player, const Eigen::Ref<const VectorXd>& x,
                      int samples, Rng& rng);
double bar_sigma_sampled(const PlayerSurrogate& s, Block player, const Eigen::Ref<const VectorXd>& x,
                         int samples, Rng& rng);

/// Exact mu_bar / sigma_bar with every x-independent factor precomputed,
/// O(t^2) per query. Holds a reference to the surrogate.
class IntegratedPosterior {
 public:
  IntegratedPosterior(const PlayerSurrogate& s, Block player);

  Moments moments(const Eigen::Ref<const VectorXd>& x) const;

 private:
  const PlayerSurrogate* s_;
  Block block_;
  VectorXd q_block_;   // per-point product of 1-D integrals over the block
  MatrixXd Q_block_;   // pairwise product of 1-D integrals over the block
  MatrixXd se_train_;  // unit-scale SE kernel between training points
};

struct PlayerRegretTerm {
  double bar_mu = 0.0;
  double bar_sigma = 0.0;
  double mu = 0.0;
  double term = 0.0;
};

struct RegretEstimate {
  double value = 0.0;
  std::vector<PlayerRegretTerm> per_player;
};

/// Approximate regret over a fixed set of surrogates (all trained on the same
/// profiles). Keeps references to `surrogates`; they must outlive the model.
class RegretModel {
 public:
  RegretModel(const std::vector<PlayerSurrogate>& surrogates, std::vector<Block> blocks,
              AcquisitionConfig cfg);

  /// `rng` is required in sampled mode and ignored in exact mode.
  RegretEstimate evaluate(const Eigen::Ref<const VectorXd>& x, Rng* rng = nullptr) const;

  const AcquisitionConfig& config() const { return cfg_; }

 private:
  const std::vector<PlayerSurrogate>* surrogates_;
  std::vector<Block> blocks_;
  AcquisitionConfig cfg_;
  std::vector<IntegratedPosterior> exact_;
};

RegretEstimate regret_hat(const std::vector<PlayerSurrogate>& surrogates, const std::vector<Block>& blocks,
                          const Eigen::Ref<const VectorXd>& x, const AcquisitionConfig& cfg,
                          Rng* rng = nullptr);

}  // namespace bnne
