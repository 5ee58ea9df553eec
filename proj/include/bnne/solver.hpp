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
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "bnne/acquisition.hpp"
#include "bnne/games.hpp"
#include "bnne/gp.hpp"

namespace bnne {

struct SolverConfig {
  /// Oracle calls including the initial design.
  int total_fes = 40;
  /// Initial design size; 0 selects floor(total_fes / 4).
  int init_size = 0;
  /// Probability of the exploration branch.
  double epsilon = 0.05;
  /// Evaluations spent by the acquisition optimizer per iteration.
  int acq_budget = 250;
  AcquisitionConfig acq;
  int fit_restarts = 2;
  std::uint64_t seed = 0;

  int resolved_init_size() const { return init_size > 0 ? init_size : total_fes / 4; }
  /// Throws DomainError on inconsistent settings. epsilon = 0 is accepted.
  void validate() const;
};

enum class Branch { init, exploit, explore };

std::string_view to_string(Branch b);

struct RunRow {
  int iteration = 0;
  Profile profile;
  VectorXd payoffs;
  Branch branch = Branch::init;
  /// Approximate regret of the chosen profile at selection time (NaN for init rows).
  double regret_hat = 0.0;
  double wall_ms = 0.0;
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::vector<RunRow> rows;
  Profile recommended;
  int init_size = 0;
  int oracle_calls = 0;
  bool failed = false;
  std::string failure;

  /// Evaluated profiles in evaluation order.
  std::vector<Profile> profiles() const;
};

/// Latin hypercube design of n profiles in the joint action space.
std::vector<Profile> initial_design(const ActionSpace& space, int n, Rng& rng);

/// One surrogate per player, trained on unit-normalized profiles.
std::vector<PlayerSurrogate> fit_surrogates(const ObservationSet& data, const ActionSpace& space,
                                            int restarts, Rng& rng);

std::vector<Block> player_blocks(const ActionSpace& space);

struct Selection {
  Profile profile;  // native coordinates
  Branch branch = Branch::exploit;
  double regret_hat = 0.0;
};

/// epsilon-greedy choice of the next profile: minimize the approximate
/// regret with probability 1 - epsilon, otherwise maximize the largest
/// posterior standard deviation across players.
Selection select_next(const std::vector<PlayerSurrogate>& surrogates, const ActionSpace& space,
                      const SolverConfig& cfg, Rng& rng);

/// Customization points of the sequential loop.
struct LoopHooks {
  std::function<std::vector<Profile>(const ActionSpace&, int, Rng&)> design;
  std::function<Selection(const std::vector<PlayerSurrogate>&, const ObservationSet&, Rng&)> select;
  /// Nudge zero-noise duplicate proposals by up to 1e-6 box widths.
  bool perturb_duplicates = true;
};

/// Sequential loop: initial design, then refit / select / query until
/// exactly cfg.total_fes oracle calls have been made.
RunRecord run_loop(const GameSpec& game, const SolverConfig& cfg, const LoopHooks& hooks);

/// Bayesian-optimization search for a pure Nash equilibrium.
RunRecord run(const GameSpec& game, const SolverConfig& cfg);

/// Evaluated profile with the lowest approximate regret under `surrogates`
/// (ties go to the earliest). Sampled mode is replaced by the exact closed
/// form so the choice is deterministic.
Profile recommend(const RunRecord& record, const std::vector<PlayerSurrogate>& surrogates,
                  const ActionSpace& space, const AcquisitionConfig& acq);

}  // namespace bnne
