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

#include <cstdint>
#include <vector>

#include "bnne/games.hpp"
#include "bnne/solver.hpp"

namespace bnne {

struct BRConfig {
  /// Utility evaluations per best-response search.
  int inner_budget = 2000;
  /// Additional independent searches per best response.
  int restarts = 0;
  std::uint64_t seed = 0;
};

struct BestResponse {
  VectorXd action;  // player's block
  double value = 0.0;
  int evals = 0;
};

/// Numeric argmax of u_i(., x_-i) over player i's box using the true utility.
BestResponse best_response(const GameSpec& game, int player, const Eigen::Ref<const VectorXd>& x,
                           const BRConfig& cfg);

/// max_i u_i(B_i(x), x_-i) - u_i(x), clamped at zero. Evaluation-side only.
double true_regret(const GameSpec& game, const Eigen::Ref<const VectorXd>& x, const BRConfig& cfg);

struct BRTrajectory {
  /// Start profile followed by the profile after each round that moved.
  std::vector<Profile> profiles;
  std::vector<double> regrets;
  /// Utility evaluations spent up to and including each entry.
  std::vector<int> cumulative_evals;
  int total_evals = 0;
};

/// Gauss-Seidel best-response dynamics from `start` (noiseless games only).
/// A block changes only when its best response strictly improves the
/// player's utility; stops at max_rounds or when a round moves the profile
/// by less than 1e-6.
BRTrajectory iterated_br(const GameSpec& game, const Profile& start, int max_rounds, const BRConfig& cfg);

/// total_fes Latin hypercube profiles; recommends the one with the lowest
/// true regret.
RunRecord random_baseline(const GameSpec& game, int total_fes, std::uint64_t seed, const BRConfig& eval = {});

/// Lattice {0, 1/(g-1), ..., 1}^n_X mapped onto the action box.
class Grid {
 public:
  static constexpr long long kMaxPoints = 1'000'000;

  Grid(const ActionSpace& space, int per_dim);

  long long size() const { return size_; }
  Profile point(long long index) const;
  /// Nearest lattice index of a profile.
  long long nearest(const Eigen::Ref<const VectorXd>& x) const;
  bool on_grid(const Eigen::Ref<const VectorXd>& x) const;

 private:
  const ActionSpace* space_;
  int per_dim_;
  long long size_;
};

/// The solver restricted to a lattice: the design is snapped to distinct
/// lattice points and each selection scores every lattice point.
RunRecord grid_solver(const GameSpec& game, const SolverConfig& cfg, int grid_per_dim);

/// Smallest true regret over all lattice points.
double grid_regret_floor(const GameSpec& game, int grid_per_dim, const BRConfig& cfg);

}  // namespace bnne
