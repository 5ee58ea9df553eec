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

#include "bnne/cli.hpp"

#include <charconv>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bnne/baselines.hpp"
#include "bnne/harness.hpp"
#include "bnne/selftest.hpp"

namespace bnne {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw UsageError("invalid number for " + key + ": '" + v + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw UsageError("invalid integer for " + key + ": '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
  if (v == "off" || v == "false" || v == "no" || v == "0") return false;
  throw UsageError("invalid switch for " + key + ": '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  return out;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "problem") {
    if (!is_known_problem(value)) throw UsageError("unknown problem '" + value + "'");
    cfg.problem.name = value;
  } else if (key == "method") {
    const auto m = parse_method(value);
    if (!m) throw UsageError("unknown method '" + value + "'");
    cfg.method = *m;
  } else if (key == "seeds") {
    try {
      cfg.seeds = parse_seed_list(value);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  } else if (key == "fes") {
    cfg.total_fes = to_int(key, value);
  } else if (key == "noise") {
    if (value.find_first_of("0123456789") != std::string::npos && value != "0" && value != "1") {
      cfg.problem.noise = true;
      cfg.problem.noise_std = to_list(key, value);
    } else {
      cfg.problem.noise = to_bool(key, value);
      cfg.problem.noise_std.clear();
    }
  } else if (key == "epsilon") {
    cfg.solver.epsilon = to_double(key, value);
  } else if (key == "gamma") {
    cfg.solver.acq.gamma = to_double(key, value);
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "workers") {
    cfg.workers = to_int(key, value);
  } else if (key == "grid") {
    cfg.grid_per_dim = to_int(key, value);
  } else if (key == "samples_per_dim") {
    cfg.solver.acq.samples_per_dim = to_int(key, value);
  } else if (key == "scaled") {
    cfg.solver.acq.scaled = to_bool(key, value);
  } else if (key == "fit_restarts") {
    cfg.solver.fit_restarts = to_int(key, value);
  } else if (key == "acq_budget") {
    cfg.solver.acq_budget = to_int(key, value);
  } else if (key == "init_size") {
    cfg.solver.init_size = to_int(key, value);
  } else if (key == "eval_budget") {
    cfg.eval_budget = to_int(key, value);
  } else if (key == "br_budget") {
    cfg.br.inner_budget = to_int(key, value);
  } else if (key == "br_rounds") {
    cfg.br_rounds = to_int(key, value);
  } else {
    throw UsageError("unknown setting '" + key + "'");
  }
}

// Flag values are kept as strings and pass through the same setter as the
// config file, so both sources validate identically.
struct Settings {
  std::string config;
  std::map<std::string, std::string> flags;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    app->add_option("--" + key, flags[key], help);
  }

  ExperimentConfig resolve(CLI::App* app) {
    ExperimentConfig cfg;
    if (!config.empty()) {
      for (const auto& [k, v] : read_config_file(config)) apply_setting(cfg, k, v);
    }
    for (const auto& [k, v] : flags) {
      if (app->count("--" + k) > 0) apply_setting(cfg, k, v);
    }
    return cfg;
  }
};

void add_experiment_flags(CLI::App* app, Settings& s) {
  app->add_option("--config", s.config, "flat key = value settings file (flags override it)");
  s.add(app, "problem", "saddle1 | saddle2 | saddle3 | mop | custom");
  s.add(app, "method", "bn_exact | bn_approx | br | random | grid");
  s.add(app, "seeds", "seed list, e.g. 1..25 or 1,4,9");
  s.add(app, "fes", "total function evaluations");
  s.add(app, "noise", "on | off | per-player noise std list");
  s.add(app, "epsilon", "exploration probability");
  s.add(app, "gamma", "best-response inflation factor");
  s.add(app, "out", "output directory");
  s.add(app, "workers", "parallel seeds (default: BNNE_WORKERS or CPU count)");
  s.add(app, "grid", "lattice points per dimension for the grid method");
  s.add(app, "samples_per_dim", "samples per player dimension for bn_approx");
  s.add(app, "fit_restarts", "hyperparameter restarts");
  s.add(app, "acq_budget", "acquisition optimizer evaluations");
  s.add(app, "eval_budget", "best-response budget when measuring true regret");
}

void report(const ConvergenceTable& table, std::ostream& os) {
  std::map<std::pair<std::string, std::string>, const AggregateRow*> last;
  for (const auto& a : table.aggregates) {
    auto& slot = last[{a.problem, a.method}];
    if (!slot || a.fe > slot->fe) slot = &a;
  }
  for (const auto& [key, a] : last) {
    os << std::left << std::setw(16) << key.first << std::setw(11) << key.second << " fe=" << a->fe
       << " mean=" << a->mean << " std=" << a->std << " median=" << a->median << " runs=" << a->count << '\n';
  }
  for (const auto& w : table.warnings) os << "warning: " << w << '\n';
}

void write_outputs(const ConvergenceTable& table, const std::filesystem::path& stem) {
  emit_csv(table, stem.string() + ".csv");
  emit_summary_csv(table, stem.string() + "_summary.csv");
  emit_plot(table, stem.string() + ".svg");
  std::cout << "wrote " << stem.string() << ".{csv,svg} and " << stem.filename().string() << "_summary.csv\n";
}

int cmd_run(CLI::App* app, Settings& s) {
  ExperimentConfig cfg = s.resolve(app);
  const ConvergenceTable table = run_experiment(cfg);
  if (table.rows.empty()) {
    report(table, std::cerr);
    std::cerr << "all runs failed\n";
    return 1;
  }
  report(table, std::cout);
  write_outputs(table, std::filesystem::path(cfg.out_dir) /
                           (cfg.problem_label() + "_" + std::string(to_string(cfg.method))));
  return 0;
}

int cmd_suite(CLI::App* app, Settings& s) {
  const ExperimentConfig base = s.resolve(app);
  const bool fixed_problem = app->count("--problem") > 0;
  std::vector<std::string> problems{"saddle1", "saddle2", "saddle3", "mop"};
  if (fixed_problem) problems = {base.problem.name};
  for (const auto& name : problems) {
    for (bool noisy : {false, true}) {
      ExperimentConfig cfg = base;
      cfg.problem.name = name;
      cfg.problem.noise = noisy;
      if (!noisy) cfg.problem.noise_std.clear();
      if (!make_problem(cfg.problem).has_utilities()) {
        std::cout << "skipping " << cfg.problem_label() << ": payoff functions not available\n";
        continue;
      }
      ConvergenceTable merged;
      for (Method m : {Method::bn_exact, Method::bn_approx, Method::grid, Method::random, Method::br}) {
        if (m == Method::br && noisy) continue;
        cfg.method = m;
        merged.append(run_experiment(cfg));
      }
      report(merged, std::cout);
      write_outputs(merged, std::filesystem::path(cfg.out_dir) / cfg.problem_label());
    }
  }
  return 0;
}

int cmd_regret(CLI::App* app, Settings& s, const std::string& profile_text) {
  const ExperimentConfig cfg = s.resolve(app);
  const GameSpec game = make_problem(cfg.problem);
  const std::vector<double> coords = to_list("profile", profile_text);
  if (static_cast<int>(coords.size()) != game.space.dim()) {
    throw UsageError("profile needs " + std::to_string(game.space.dim()) + " coordinates");
  }
  const Profile x = Eigen::Map<const VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size()));
  if (!game.space.contains(x)) throw UsageError("profile lies outside the action space");
  const double r = true_regret(game, x, BRConfig{cfg.eval_budget, 0, 0});
  std::cout << std::setprecision(6) << r << '\n';
  return 0;
}

int cmd_selftest() {
  bool ok = true;
  for (const auto& c : run_selftest()) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Bayesian-optimization search for Nash equilibria of black-box continuous games"};
  app.require_subcommand(1);

  Settings run_settings, suite_settings, regret_settings;
  CLI::App* run = app.add_subcommand("run", "run one method on one problem over several seeds");
  add_experiment_flags(run, run_settings);
  CLI::App* suite = app.add_subcommand("suite", "benchmark every method on every problem");
  add_experiment_flags(suite, suite_settings);
  CLI::App* regret = app.add_subcommand("regret", "true regret of a profile");
  std::string profile_text;
  regret->add_option("--config", regret_settings.config, "flat key = value settings file");
  regret_settings.add(regret, "problem", "saddle1 | saddle2 | saddle3");
  regret_settings.add(regret, "eval_budget", "best-response budget");
  regret->add_option("--profile", profile_text, "comma-separated joint profile")->required();
  CLI::App* selftest = app.add_subcommand("selftest", "closed-form and Monte-Carlo consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*run) return cmd_run(run, run_settings);
    if (*suite) return cmd_suite(suite, suite_settings);
    if (*regret) return cmd_regret(regret, regret_settings, profile_text);
    if (*selftest) return cmd_selftest();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace bnne
