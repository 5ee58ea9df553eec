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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bnne/linalg.hpp"

namespace bnne {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Product of per-player boxes. Player i owns the contiguous coordinate
/// block `block(i)` of the joint action vector.
class ActionSpace {
 public:
  ActionSpace() = default;
  ActionSpace(std::vector<int> dims_per_player, std::vector<Interval> bounds);

  /// Every player acts on [0,1]^dims[i].
  static ActionSpace unit(std::vector<int> dims_per_player);

  int players() const { return static_cast<int>(dims_.size()); }
  int dim() const { return static_cast<int>(bounds_.size()); }
  int player_dim(int player) const { return dims_.at(static_cast<std::size_t>(player)); }
  Block block(int player) const;
  const std::vector<Interval>& bounds() const { return bounds_; }
  const Box& box() const { return box_; }

  bool contains(const Eigen::Ref<const VectorXd>& x) const { return box_.contains(x); }
  /// Affine map of native coordinates onto the unit cube, and back.
  VectorXd to_unit(const Eigen::Ref<const VectorXd>& x) const;
  VectorXd from_unit(const Eigen::Ref<const VectorXd>& u) const;

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  std::vector<Interval> bounds_;
  Box box_;
};

using Utility = std::function<double(const Eigen::Ref<const VectorXd>&)>;

/// A normal-form game over box action spaces. Immutable once built.
struct GameSpec {
  std::string name;
  ActionSpace space;
  /// Empty for pure-oracle games whose payoffs are not available in closed form.
  std::vector<Utility> utilities;
  VectorXd noise_std;
  std::optional<Profile> known_ne;
  /// NE location for games built by make_saddle.
  std::optional<Profile> saddle_shift;

  int players() const { return space.players(); }
  bool has_utilities() const { return !utilities.empty(); }
  bool noiseless() const { return noise_std.size() == 0 || (noise_std.array() == 0.0).all(); }
  double utility(int player, const Eigen::Ref<const VectorXd>& x) const;
};

struct Observation {
  Profile profile;
  VectorXd payoffs;
};

/// Append-only design. Exact duplicate profiles are rejected unless allowed
/// (allowed only when the oracle is noisy).
class ObservationSet {
 public:
  explicit ObservationSet(int players = 0) : players_(players) {}

  void append(Observation obs, bool allow_duplicates);
  bool contains_profile(const Eigen::Ref<const VectorXd>& x) const;

  int size() const { return static_cast<int>(items_.size()); }
  bool empty() const { return items_.empty(); }
  const Observation& operator[](int k) const { return items_[static_cast<std::size_t>(k)]; }
  const std::vector<Observation>& items() const { return items_; }

  /// Profiles stacked as rows (t x n_X).
  MatrixXd profiles() const;
  /// Payoffs of one player across observations (length t).
  VectorXd payoffs(int player) const;

 private:
  int players_;
  std::vector<Observation> items_;
};

/// Noisy oracle: payoffs[i] = u_i(x) + N(0, noise_std[i]^2).
Observation oracle_eval(const GameSpec& game, const Eigen::Ref<const VectorXd>& x, Rng& rng);

/// Zero-sum hyperbolic paraboloid on [0,1]^{2 dims}, shifted so its unique
/// pure NE sits at `shift`:
///   u_1 = sum_l (x_{2,l} - s_{2,l})^2 - sum_l (x_{1,l} - s_{1,l})^2,  u_2 = -u_1.
GameSpec make_saddle(const Profile& shift, int dims_per_player, std::string name = "saddle");

/// Closed-form regret of a saddle game: the largest own-block squared
/// deviation from the shift.
double analytic_regret_saddle(const GameSpec& game, const Eigen::Ref<const VectorXd>& x);

/// Oracle-only slot for the two-player MOP benchmark (known NE and default
/// noise levels; payoffs must be supplied by the caller).
GameSpec make_mop();

/// Text-configurable problem selection.
struct ProblemConfig {
  std::string name = "saddle1";  // saddle1 | saddle2 | saddle3 | mop | custom
  bool noise = false;
  /// Per-player noise std overriding the problem default when noise is on.
  std::vector<double> noise_std;
};

GameSpec make_problem(const ProblemConfig& cfg);
bool is_known_problem(const std::string& name);
/// Function-evaluation budget of the benchmark problem.
int default_total_fes(const std::string& name);

}  // namespace bnne
