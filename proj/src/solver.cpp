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

#include "bnne/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "bnne/globalopt.hpp"
#include "bnne/sampling.hpp"

namespace bnne {

namespace {

enum Stream : std::uint64_t { kDesign = 1, kOracle = 2, kFit = 3, kSelect = 4, kRetry = 5 };

MatrixXd unit_profiles(const ObservationSet& data, const ActionSpace& space) {
  MatrixXd X = data.profiles();
  for (Eigen::Index k = 0; k < X.rows(); ++k) X.row(k) = space.to_unit(X.row(k).transpose()).transpose();
  return X;
}

}  // namespace

void SolverConfig::validate() const {
  if (total_fes < 2) throw DomainError("SolverConfig: total_fes must be >= 2");
  const int t0 = resolved_init_size();
  if (t0 < 1 || t0 >= total_fes) throw DomainError("SolverConfig: need 1 <= init_size < total_fes");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DomainError("SolverConfig: epsilon must lie in [0,1)");
  if (acq_budget < 2) throw DomainError("SolverConfig: acq_budget must be >= 2");
  if (fit_restarts < 0) throw DomainError("SolverConfig: fit_restarts must be >= 0");
  if (acq.gamma < 0.0) throw DomainError("SolverConfig: gamma must be >= 0");
  if (acq.samples_per_dim < 1) throw DomainError("SolverConfig: samples_per_dim must be >= 1");
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::init: return "init";
    case Branch::exploit: return "exploit";
    case Branch::explore: return "explore";
  }
  return "?";
}

std::vector<Profile> RunRecord::profiles() const {
  std::vector<Profile> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.profile);
  return out;
}

std::vector<Profile> initial_design(const ActionSpace& space, int n, Rng& rng) {
  if (n < 1) throw DomainError("initial_design: n must be >= 1");
  const MatrixXd pts = latin_hypercube(n, space.box(), rng);
  std::vector<Profile> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out.emplace_back(space.box().clip(pts.row(k).transpose()));
  return out;
}

std::vector<Block> player_blocks(const ActionSpace& space) {
  std::vector<Block> blocks;
  for (int i = 0; i < space.players(); ++i) blocks.push_back(space.block(i));
  return blocks;
}

std::vector<PlayerSurrogate> fit_surrogates(const ObservationSet& data, const ActionSpace& space,
                                            int restarts, Rng& rng) {
  const MatrixXd X = unit_profiles(data, space);
  std::vector<PlayerSurrogate> out;
  out.reserve(static_cast<std::size_t>(space.players()));
  for (int i = 0; i < space.players(); ++i) {
    if (data.size() < 2) {
      out.push_back(PlayerSurrogate::condition({1e-5, 1.0, VectorXd::Ones(space.dim())}, X, data.payoffs(i)));
    } else {
      out.push_back(PlayerSurrogate::fit(X, data.payoffs(i), restarts, rng));
    }
  }
  return out;
}

Selection select_next(const std::vector<PlayerSurrogate>& surrogates, const ActionSpace& space,
                      const SolverConfig& cfg, Rng& rng) {
  const bool explore = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.epsilon;
  const OptBudget budget{cfg.acq_budget, std::nullopt, rng()};
  Rng acq_rng(rng());
  const RegretModel model(surrogates, player_blocks(space), cfg.acq);
  const Box unit = Box::unit(space.dim());

  Selection sel;
  VectorXd u;
  if (explore) {
    sel.branch = Branch::explore;
    u = maximize(
            [&](const VectorXd& x) {
              double m = 0.0;
              for (const auto& s : surrogates) m = std::max(m, s.posterior_std(x));
              return m;
            },
            unit, budget)
            .x;
  } else {
    sel.branch = Branch::exploit;
    u = minimize([&](const VectorXd& x) { return model.evaluate(x, &acq_rng).value; }, unit, budget).x;
  }
  sel.regret_hat = model.evaluate(u, &acq_rng).value;
  sel.profile = space.box().clip(space.from_unit(u));
  return sel;
}

RunRecord run_loop(const GameSpec& game, const SolverConfig& cfg, const LoopHooks& hooks) {
  cfg.validate();
  if (!game.has_utilities()) {
    throw UnsupportedError("run: game '" + game.name + "' has no oracle to query");
  }
  using clock = std::chrono::steady_clock;
  const ActionSpace& space = game.space;
  Rng design_rng = make_rng(cfg.seed, kDesign);
  Rng oracle_rng = make_rng(cfg.seed, kOracle);
  Rng fit_rng = make_rng(cfg.seed, kFit);
  Rng select_rng = make_rng(cfg.seed, kSelect);
  Rng retry_rng = make_rng(cfg.seed, kRetry);
  const bool noiseless = game.noiseless();

  RunRecord record;
  record.seed = cfg.seed;
  record.init_size = cfg.resolved_init_size();
  ObservationSet data(game.players());

  auto query = [&](const Profile& x, Branch branch, double h, clock::time_point started) {
    Observation obs = oracle_eval(game, x, oracle_rng);
    ++record.oracle_calls;
    const double ms = std::chrono::duration<double, std::milli>(clock::now() - started).count();
    record.rows.push_back({static_cast<int>(record.rows.size()) + 1, obs.profile, obs.payoffs, branch, h, ms});
    data.append(std::move(obs), !noiseless);
  };

  auto fit_all = [&]() -> std::optional<std::vector<PlayerSurrogate>> {
    try {
      return fit_surrogates(data, space, cfg.fit_restarts, fit_rng);
    } catch (const NumericalError&) {
    }
    try {
      return fit_surrogates(data, space, cfg.fit_restarts, retry_rng);
    } catch (const NumericalError& e) {
      record.failed = true;
      record.failure = e.what();
    }
    return std::nullopt;
  };

  const auto design_hook = hooks.design ? hooks.design : initial_design;
  auto t_start = clock::now();
  std::vector<Profile> design = design_hook(space, record.init_size, design_rng);
  for (auto& x : design) {
    if (noiseless && data.contains_profile(x)) continue;
    query(x, Branch::init, std::numeric_limits<double>::quiet_NaN(), t_start);
    t_start = clock::now();
  }

  std::uniform_real_distribution<double> nudge(-1e-6, 1e-6);
  while (record.oracle_calls < cfg.total_fes) {
    const auto started = clock::now();
    auto surrogates = fit_all();
    if (!surrogates) return record;
    Selection sel = hooks.select ? hooks.select(*surrogates, data, select_rng)
                                 : select_next(*surrogates, space, cfg, select_rng);
    if (noiseless && hooks.perturb_duplicates) {
      while (data.contains_profile(sel.profile)) {
        for (Eigen::Index l = 0; l < sel.profile.size(); ++l) {
          sel.profile(l) += nudge(select_rng) * space.box().width()(l);
        }
        sel.profile = space.box().clip(sel.profile);
      }
    }
    query(sel.profile, sel.branch, sel.regret_hat, started);
  }

  if (auto final_models = fit_all()) {
    record.recommended = recommend(record, *final_models, space, cfg.acq);
  } else {
    record.recommended = record.rows.front().profile;
  }
  return record;
}

RunRecord run(const GameSpec& game, const SolverConfig& cfg) { return run_loop(game, cfg, {}); }

Profile recommend(const RunRecord& record, const std::vector<PlayerSurrogate>& surrogates,
                  const ActionSpace& space, const AcquisitionConfig& acq) {
  if (record.rows.empty()) throw DomainError("recommend: empty run record");
  AcquisitionConfig exact = acq;
  exact.mode = AcquisitionConfig::Mode::exact;
  const RegretModel model(surrogates, player_blocks(space), exact);
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < record.rows.size(); ++k) {
    const double h = model.evaluate(space.to_unit(record.rows[k].profile)).value;
    if (h < best_value) {
      best_value = h;
      best = k;
    }
  }
  return record.rows[best].profile;
}

}  // namespace bnne
