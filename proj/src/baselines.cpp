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

#include "bnne/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "bnne/globalopt.hpp"
#include "bnne/sampling.hpp"

namespace bnne {

BestResponse best_response(const GameSpec& game, int player, const Eigen::Ref<const VectorXd>& x,
                           const BRConfig& cfg) {
  if (!game.has_utilities()) throw UnsupportedError("best_response: game has no closed-form utilities");
  if (player < 0 || player >= game.players()) throw DomainError("best_response: player out of range");
  if (x.size() != game.space.dim()) throw DomainError("best_response: profile dimension mismatch");
  if (cfg.inner_budget < 2) throw DomainError("best_response: inner_budget must be >= 2");
  const Block b = game.space.block(player);
  const Box box{game.space.box().lower.segment(b.offset, b.size), game.space.box().upper.segment(b.offset, b.size)};

  VectorXd z = x;
  int evals = 0;
  auto objective = [&](const VectorXd& action) {
    z.segment(b.offset, b.size) = action;
    ++evals;
    return game.utility(player, z);
  };
  BestResponse best{VectorXd(), -std::numeric_limits<double>::infinity(), 0};
  for (int r = 0; r <= std::max(cfg.restarts, 0); ++r) {
    const std::uint64_t seed = cfg.seed * 1000003ULL + static_cast<std::uint64_t>(player) * 7919ULL +
                               static_cast<std::uint64_t>(r);
    OptResult res = maximize(objective, box, OptBudget{cfg.inner_budget, std::nullopt, seed});
    if (res.value > best.value) {
      best.value = res.value;
      best.action = res.x;
    }
  }
  best.evals = evals;
  return best;
}

double true_regret(const GameSpec& game, const Eigen::Ref<const VectorXd>& x, const BRConfig& cfg) {
  double regret = 0.0;
  for (int i = 0; i < game.players(); ++i) {
    const double gain = best_response(game, i, x, cfg).value - game.utility(i, x);
    regret = std::max(regret, gain);
  }
  return regret;
}

BRTrajectory iterated_br(const GameSpec& game, const Profile& start, int max_rounds, const BRConfig& cfg) {
  if (!game.has_utilities()) throw UnsupportedError("iterated_br: game has no closed-form utilities");
  if (!game.noiseless()) throw UnsupportedError("iterated_br: only defined for noiseless games");
  if (!game.space.contains(start)) throw DomainError("iterated_br: start outside the action space");
  BRTrajectory traj;
  traj.profiles.push_back(start);
  traj.regrets.push_back(true_regret(game, start, cfg));
  traj.cumulative_evals.push_back(0);

  Profile x = start;
  for (int round = 0; round < max_rounds; ++round) {
    const Profile before = x;
    for (int i = 0; i < game.players(); ++i) {
      BRConfig round_cfg = cfg;
      round_cfg.seed = cfg.seed + static_cast<std::uint64_t>(round) * 104729ULL;
      const BestResponse br = best_response(game, i, x, round_cfg);
      const double current = game.utility(i, x);
      traj.total_evals += br.evals + 1;
      if (br.value > current + 1e-12) {
        const Block b = game.space.block(i);
        x.segment(b.offset, b.size) = br.action;
      }
    }
    if ((x - before).norm() < 1e-6) break;
    traj.profiles.push_back(x);
    traj.regrets.push_back(true_regret(game, x, cfg));
    traj.cumulative_evals.push_back(traj.total_evals);
  }
  return traj;
}

RunRecord random_baseline(const GameSpec& game, int total_fes, std::uint64_t seed, const BRConfig& eval) {
  if (total_fes < 1) throw DomainError("random_baseline: total_fes must be >= 1");
  Rng design_rng = make_rng(seed, 1);
  Rng oracle_rng = make_rng(seed, 2);
  RunRecord record;
  record.seed = seed;
  record.init_size = total_fes;
  double best = std::numeric_limits<double>::infinity();
  for (const Profile& x : initial_design(game.space, total_fes, design_rng)) {
    Observation obs = oracle_eval(game, x, oracle_rng);
    ++record.oracle_calls;
    record.rows.push_back({static_cast<int>(record.rows.size()) + 1, obs.profile, obs.payoffs, Branch::init,
                           std::numeric_limits<double>::quiet_NaN(), 0.0});
    const double r = true_regret(game, x, eval);
    if (r < best) {
      best = r;
      record.recommended = x;
    }
  }
  return record;
}

Grid::Grid(const ActionSpace& space, int per_dim) : space_(&space), per_dim_(per_dim), size_(1) {
  if (per_dim < 2) throw DomainError("Grid: need at least two points per dimension");
  for (int l = 0; l < space.dim(); ++l) {
    size_ *= per_dim;
    if (size_ > kMaxPoints) {
      throw DomainError("Grid: " + std::to_string(per_dim) + "^" + std::to_string(space.dim()) +
                        " points exceeds the limit of " + std::to_string(kMaxPoints));
    }
  }
}

Profile Grid::point(long long index) const {
  const Box& box = space_->box();
  Profile x(box.dim());
  for (int l = 0; l < box.dim(); ++l) {
    const auto k = static_cast<double>(index % per_dim_);
    index /= per_dim_;
    x(l) = box.lower(l) + box.width()(l) * (k / (per_dim_ - 1.0));
  }
  return x;
}

long long Grid::nearest(const Eigen::Ref<const VectorXd>& x) const {
  const Box& box = space_->box();
  long long index = 0;
  long long stride = 1;
  for (int l = 0; l < box.dim(); ++l) {
    const double u = (x(l) - box.lower(l)) / box.width()(l);
    const long long k = std::clamp<long long>(std::llround(u * (per_dim_ - 1)), 0, per_dim_ - 1);
    index += k * stride;
    stride *= per_dim_;
  }
  return index;
}

bool Grid::on_grid(const Eigen::Ref<const VectorXd>& x) const { return point(nearest(x)) == x; }

RunRecord grid_solver(const GameSpec& game, const SolverConfig& cfg, int grid_per_dim) {
  const Grid grid(game.space, grid_per_dim);
  const ActionSpace& space = game.space;
  const bool noiseless = game.noiseless();

  LoopHooks hooks;
  hooks.perturb_duplicates = false;
  hooks.design = [&grid](const ActionSpace& sp, int n, Rng& rng) {
    if (n > grid.size()) throw DomainError("grid_solver: initial design larger than the grid");
    std::vector<Profile> out;
    std::unordered_set<long long> used;
    std::uniform_int_distribution<long long> any(0, grid.size() - 1);
    for (const Profile& x : initial_design(sp, n, rng)) {
      long long idx = grid.nearest(x);
      while (used.contains(idx)) idx = any(rng);
      used.insert(idx);
      out.push_back(grid.point(idx));
    }
    return out;
  };
  hooks.select = [&](const std::vector<PlayerSurrogate>& surrogates, const ObservationSet& data, Rng& rng) {
    const bool explore = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.epsilon;
    Rng acq_rng(rng());
    const RegretModel model(surrogates, player_blocks(space), cfg.acq);
    std::unordered_set<long long> visited;
    if (noiseless) {
      for (const auto& obs : data.items()) visited.insert(grid.nearest(obs.profile));
    }
    long long best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (long long idx = 0; idx < grid.size(); ++idx) {
      if (visited.contains(idx)) continue;
      const VectorXd u = space.to_unit(grid.point(idx));
      double score;
      if (explore) {
        score = 0.0;
        for (const auto& s : surrogates) score = std::max(score, s.posterior_std(u));
        score = -score;
      } else {
        score = model.evaluate(u, &acq_rng).value;
      }
      if (best < 0 || score < best_score) {
        best_score = score;
        best = idx;
      }
    }
    if (best < 0) throw DomainError("grid_solver: every lattice point has been evaluated");
    Selection sel;
    sel.branch = explore ? Branch::explore : Branch::exploit;
    sel.profile = grid.point(best);
    sel.regret_hat = model.evaluate(space.to_unit(sel.profile), &acq_rng).value;
    return sel;
  };
  return run_loop(game, cfg, hooks);
}

double grid_regret_floor(const GameSpec& game, int grid_per_dim, const BRConfig& cfg) {
  const Grid grid(game.space, grid_per_dim);
  double floor = std::numeric_limits<double>::infinity();
  for (long long idx = 0; idx < grid.size(); ++idx) {
    const Profile x = grid.point(idx);
    floor = std::min(floor, game.saddle_shift ? analytic_regret_saddle(game, x) : true_regret(game, x, cfg));
  }
  return floor;
}

}  // namespace bnne
