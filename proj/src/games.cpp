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

#include "bnne/games.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace bnne {

ActionSpace::ActionSpace(std::vector<int> dims_per_player, std::vector<Interval> bounds)
    : dims_(std::move(dims_per_player)), bounds_(std::move(bounds)) {
  if (dims_.empty()) throw DomainError("ActionSpace: at least one player required");
  int total = 0;
  for (int d : dims_) {
    if (d < 1) throw DomainError("ActionSpace: per-player dimension must be positive");
    offsets_.push_back(total);
    total += d;
  }
  if (static_cast<int>(bounds_.size()) != total) {
    throw DomainError("ActionSpace: expected " + std::to_string(total) + " intervals, got " +
                      std::to_string(bounds_.size()));
  }
  box_.lower.resize(total);
  box_.upper.resize(total);
  for (int l = 0; l < total; ++l) {
    const Interval& iv = bounds_[static_cast<std::size_t>(l)];
    if (!(iv.lo < iv.hi)) throw DomainError("ActionSpace: interval with lo >= hi");
    box_.lower(l) = iv.lo;
    box_.upper(l) = iv.hi;
  }
}

ActionSpace ActionSpace::unit(std::vector<int> dims_per_player) {
  int total = 0;
  for (int d : dims_per_player) total += d;
  return ActionSpace(std::move(dims_per_player),
                     std::vector<Interval>(static_cast<std::size_t>(std::max(total, 0))));
}

Block ActionSpace::block(int player) const {
  const auto k = static_cast<std::size_t>(player);
  return {offsets_.at(k), dims_.at(k)};
}

VectorXd ActionSpace::to_unit(const Eigen::Ref<const VectorXd>& x) const {
  return ((x - box_.lower).array() / box_.width().array()).matrix();
}

VectorXd ActionSpace::from_unit(const Eigen::Ref<const VectorXd>& u) const {
  return box_.lower + (u.array() * box_.width().array()).matrix();
}

double GameSpec::utility(int player, const Eigen::Ref<const VectorXd>& x) const {
  if (!has_utilities()) throw UnsupportedError("game '" + name + "' has no closed-form utilities");
  return utilities.at(static_cast<std::size_t>(player))(x);
}

void ObservationSet::append(Observation obs, bool allow_duplicates) {
  if (players_ > 0 && obs.payoffs.size() != players_) {
    throw DomainError("ObservationSet: payoff vector length does not match player count");
  }
  if (!allow_duplicates && contains_profile(obs.profile)) {
    throw DomainError("ObservationSet: duplicate profile under a noiseless oracle");
  }
  items_.push_back(std::move(obs));
}

bool ObservationSet::contains_profile(const Eigen::Ref<const VectorXd>& x) const {
  return std::any_of(items_.begin(), items_.end(),
                     [&](const Observation& o) { return o.profile == x; });
}

MatrixXd ObservationSet::profiles() const {
  if (items_.empty()) return {};
  MatrixXd out(size(), items_.front().profile.size());
  for (int k = 0; k < size(); ++k) out.row(k) = items_[static_cast<std::size_t>(k)].profile.transpose();
  return out;
}

VectorXd ObservationSet::payoffs(int player) const {
  VectorXd out(size());
  for (int k = 0; k < size(); ++k) out(k) = items_[static_cast<std::size_t>(k)].payoffs(player);
  return out;
}

Observation oracle_eval(const GameSpec& game, const Eigen::Ref<const VectorXd>& x, Rng& rng) {
  if (!game.has_utilities()) {
    throw UnsupportedError("oracle_eval: game '" + game.name + "' has no utilities to evaluate");
  }
  if (!game.space.contains(x)) throw DomainError("oracle_eval: profile outside the action space");
  Observation obs{x, VectorXd(game.players())};
  for (int i = 0; i < game.players(); ++i) {
    double payoff = game.utility(i, x);
    const double sd = game.noise_std.size() > i ? game.noise_std(i) : 0.0;
    if (sd > 0.0) payoff += std::normal_distribution<double>(0.0, sd)(rng);
    obs.payoffs(i) = payoff;
  }
  return obs;
}

GameSpec make_saddle(const Profile& shift, int dims_per_player, std::string name) {
  if (dims_per_player < 1) throw DomainError("make_saddle: dims_per_player must be >= 1");
  if (shift.size() != 2 * dims_per_player) throw DomainError("make_saddle: shift has wrong length");
  if ((shift.array() < 0.0).any() || (shift.array() > 1.0).any()) {
    throw DomainError("make_saddle: shift must lie in [0,1]");
  }
  GameSpec game;
  game.name = std::move(name);
  game.space = ActionSpace::unit({dims_per_player, dims_per_player});
  game.noise_std = VectorXd::Zero(2);
  game.known_ne = shift;
  game.saddle_shift = shift;
  const int n = dims_per_player;
  auto u1 = [shift, n](const Eigen::Ref<const VectorXd>& x) {
    return (x.segment(n, n) - shift.segment(n, n)).squaredNorm() -
           (x.segment(0, n) - shift.segment(0, n)).squaredNorm();
  };
  game.utilities = {u1, [u1](const Eigen::Ref<const VectorXd>& x) { return -u1(x); }};
  return game;
}

double analytic_regret_saddle(const GameSpec& game, const Eigen::Ref<const VectorXd>& x) {
  if (!game.saddle_shift) throw UnsupportedError("analytic_regret_saddle: not a saddle game");
  const Profile& s = *game.saddle_shift;
  double regret = 0.0;
  for (int i = 0; i < game.players(); ++i) {
    const Block b = game.space.block(i);
    regret = std::max(regret, (x.segment(b.offset, b.size) - s.segment(b.offset, b.size)).squaredNorm());
  }
  return regret;
}

GameSpec make_mop() {
  GameSpec game;
  game.name = "mop";
  game.space = ActionSpace::unit({1, 1});
  game.noise_std = VectorXd::Zero(2);
  game.known_ne = (Profile(2) << 0.08093, 1.0).finished();
  return game;
}

namespace {

VectorXd default_noise(const std::string& name) {
  if (name == "mop") return (VectorXd(2) << 7.5, 3.0).finished();
  return VectorXd::Constant(2, 0.025);
}

}  // namespace

bool is_known_problem(const std::string& name) {
  return name == "saddle1" || name == "saddle2" || name == "saddle3" || name == "mop" ||
         name == "custom";
}

int default_total_fes(const std::string& name) {
  if (name == "saddle3") return 120;
  return 40;
}

GameSpec make_problem(const ProblemConfig& cfg) {
  GameSpec game;
  if (cfg.name == "saddle1") {
    game = make_saddle(VectorXd::Constant(2, 0.5), 1, "saddle1");
  } else if (cfg.name == "saddle2") {
    game = make_saddle(VectorXd::Constant(2, 0.3), 1, "saddle2");
  } else if (cfg.name == "saddle3") {
    game = make_saddle(VectorXd::Constant(4, 0.5), 2, "saddle3");
  } else if (cfg.name == "mop") {
    game = make_mop();
  } else if (cfg.name == "custom") {
    game.name = "custom";
    game.space = ActionSpace::unit({1, 1});
    game.noise_std = VectorXd::Zero(2);
  } else {
    throw DomainError("unknown problem '" + cfg.name + "'");
  }
  if (cfg.noise) {
    if (cfg.noise_std.empty()) {
      game.noise_std = default_noise(cfg.name);
    } else {
      if (static_cast<int>(cfg.noise_std.size()) != game.players()) {
        throw DomainError("noise_std needs one entry per player");
      }
      game.noise_std = Eigen::Map<const VectorXd>(cfg.noise_std.data(),
                                                  static_cast<Eigen::Index>(cfg.noise_std.size()));
      if ((game.noise_std.array() < 0.0).any()) throw DomainError("noise_std must be >= 0");
    }
  }
  return game;
}

}  // namespace bnne
