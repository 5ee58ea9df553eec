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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bnne/baselines.hpp"
#include "bnne/games.hpp"
#include "bnne/solver.hpp"

namespace bnne {

enum class Method { bn_exact, bn_approx, br, random, grid };

std::optional<Method> parse_method(std::string_view name);
std::string_view to_string(Method m);

struct ExperimentConfig {
  ProblemConfig problem;
  Method method = Method::bn_exact;
  /// Empty selects 1..25 (1..8 for saddle3).
  std::vector<std::uint64_t> seeds;
  /// 0 selects the problem's default budget.
  int total_fes = 0;
  /// Solver settings; total_fes, seed and acquisition mode are set per run.
  SolverConfig solver;
  /// Inner searches of the iterated best-response method.
  BRConfig br;
  int br_rounds = 10;
  /// Evaluation-side best-response budget for true regret.
  int eval_budget = 2000;
  /// 0 selects 31, or 11 for saddle3.
  int grid_per_dim = 0;
  /// 0 selects BNNE_WORKERS or the hardware concurrency.
  int workers = 0;
  std::string out_dir = "out";

  std::vector<std::uint64_t> resolved_seeds() const;
  int resolved_total_fes() const;
  int resolved_grid_per_dim() const;
  /// "<problem>[_noisy]"
  std::string problem_label() const;
};

struct ConvergenceRow {
  std::string method;
  std::string problem;
  std::uint64_t seed = 0;
  int fe = 0;
  double best_regret = 0.0;
};

struct AggregateRow {
  std::string method;
  std::string problem;
  int fe = 0;
  double mean = 0.0;
  double std = 0.0;
  double median = 0.0;
  int count = 0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<AggregateRow> aggregates;
  int failures = 0;
  std::vector<std::string> warnings;
  /// Oracle calls per successful seed (solver-type methods).
  std::map<std::uint64_t, int> oracle_calls;

  /// Final best-so-far regret per seed of one method.
  std::map<std::uint64_t, double> final_regrets(std::string_view method) const;
  void append(const ConvergenceTable& other);
};

/// Running minimum.
std::vector<double> best_so_far(const std::vector<double>& values);

/// Recomputes `aggregates` (mean, population std, median per method/problem/fe)
/// independently of row order.
void aggregate(ConvergenceTable& table);

/// Executes the method once per seed, evaluates the true regret of every
/// evaluated profile offline and returns best-so-far curves plus aggregates.
ConvergenceTable run_experiment(const ExperimentConfig& cfg);

/// `method,problem,seed,fe,best_regret`, one line per row.
void emit_csv(const ConvergenceTable& table, const std::filesystem::path& path);
/// `method,problem,fe,mean,std,median,count`, one line per aggregate.
void emit_summary_csv(const ConvergenceTable& table, const std::filesystem::path& path);
/// Log-scale SVG of the mean curve and a one-std band per method.
void emit_plot(const ConvergenceTable& table, const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double v);
/// RFC-4180 field quoting.
std::string csv_field(std::string_view s);

/// Flat `key = value` file; `#` starts a comment.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Parses "1..25", "3,5,9" or mixtures like "1..3,10".
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

int resolve_workers(int requested);

}  // namespace bnne
