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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bnne/acquisition.hpp"
#include "bnne/baselines.hpp"
#include "bnne/harness.hpp"
#include "bnne/selftest.hpp"
#include "bnne/solver.hpp"

namespace {

using namespace bnne;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::vector<double> values(const std::map<std::uint64_t, double>& m) {
  std::vector<double> out;
  for (const auto& [k, v] : m) out.push_back(v);
  return out;
}

// One-sided sign test: P(at least `wins` successes out of `n` fair coin flips).
double sign_test_p(int wins, int n) {
  double p = 0.0;
  for (int k = wins; k <= n; ++k) p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  return p;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

ExperimentConfig experiment(const std::string& problem, bool noise, Method m) {
  ExperimentConfig cfg;
  cfg.problem.name = problem;
  cfg.problem.noise = noise;
  cfg.method = m;
  return cfg;
}

// Oracle-call ledger filled by every solver-type experiment below.
std::vector<std::string> accounting_errors;
int accounting_runs = 0;

ConvergenceTable run_checked(const ExperimentConfig& cfg) {
  ConvergenceTable t = run_experiment(cfg);
  const int fes = cfg.resolved_total_fes();
  for (const auto& [seed, calls] : t.oracle_calls) {
    ++accounting_runs;
    if (calls != fes) {
      accounting_errors.push_back(std::string(to_string(cfg.method)) + " seed " + std::to_string(seed) + ": " +
                                  std::to_string(calls) + " calls");
    }
  }
  for (const auto& w : t.warnings) std::cerr << "  warning: " << w << '\n';
  if (t.failures > 0) accounting_errors.push_back(std::to_string(t.failures) + " failed runs");
  return t;
}

SelfTestCheck find_check(const std::vector<SelfTestCheck>& checks, const std::string& prefix) {
  for (const auto& c : checks) {
    if (c.name.rfind(prefix, 0) == 0) return c;
  }
  return {prefix, false, "check missing"};
}

Outcome closed_forms() {
  const auto t0 = clock_type::now();
  SelfTestOptions opts;
  opts.consistency_instances = 0;
  const auto checks = run_selftest(opts);
  const double secs = seconds_since(t0);
  const SelfTestCheck a = find_check(checks, "closed form vs quadrature (v = 0)");
  const SelfTestCheck b = find_check(checks, "closed form vs quadrature (v > 0");
  return {a.passed && b.passed && secs < 10.0, a.detail + "; " + b.detail + "; " + fmt(secs) + " s"};
}

Outcome exact_vs_sampled() {
  const auto t0 = clock_type::now();
  SelfTestOptions opts;
  opts.quadrature_instances = 0;
  opts.quadrature_instances_white = 0;
  const auto checks = run_selftest(opts);
  const double secs = seconds_since(t0);
  const SelfTestCheck c = find_check(checks, "exact vs sampled");
  return {c.passed && secs < 60.0, c.detail + "; " + fmt(secs) + " s"};
}

Outcome uniform_max() {
  const PlayerSurrogate s = make_linear_fixture();
  const VectorXd x = (VectorXd(2) << 1.0, 0.37).finished();
  const double mu = bar_mu_exact(s, {0, 1}, x);
  const double sigma = bar_sigma_exact(s, {0, 1}, x);
  const double recovered = mu + std::sqrt(3.0) * sigma;
  return {std::abs(recovered - 1.0) <= 1e-3,
          "mu_bar " + fmt(mu) + ", sigma_bar " + fmt(sigma) + ", recovered max " + fmt(recovered)};
}

Outcome regret_oracle() {
  const auto t0 = clock_type::now();
  Rng rng = make_rng(4242);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0, worst_ne = 0.0;
  for (const char* name : {"saddle1", "saddle2", "saddle3"}) {
    const GameSpec g = make_problem({name, false, {}});
    for (int k = 0; k < 100; ++k) {
      Profile x(g.space.dim());
      for (auto& e : x) e = unif(rng);
      worst = std::max(worst, std::abs(true_regret(g, x, {2000, 0, static_cast<std::uint64_t>(k)}) -
                                       analytic_regret_saddle(g, x)));
    }
    worst_ne = std::max(worst_ne, true_regret(g, *g.known_ne, {}));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && worst_ne <= 1e-6 && secs < 120.0,
          "max |numeric - analytic| " + fmt(worst) + " over 300 profiles, max regret at NE " + fmt(worst_ne) + "; " +
              fmt(secs) + " s"};
}

Outcome saddle2_shape() {
  const auto t0 = clock_type::now();
  const auto exact = run_checked(experiment("saddle2", false, Method::bn_exact)).final_regrets("bn_exact");
  const auto approx = run_checked(experiment("saddle2", false, Method::bn_approx)).final_regrets("bn_approx");
  const auto random = run_checked(experiment("saddle2", false, Method::random)).final_regrets("random");
  const GameSpec g = make_problem({"saddle2", false, {}});
  const double floor = grid_regret_floor(g, 10, {});
  const double m_random = median(values(random));
  bool pass = exact.size() == 25 && approx.size() == 25 && random.size() == 25;
  std::string detail = "random median " + fmt(m_random) + ", 10-point grid floor " + fmt(floor);
  for (const auto& [name, res] : {std::pair{"bn_exact", &exact}, std::pair{"bn_approx", &approx}}) {
    int wins = 0, n = 0;
    for (const auto& [seed, r] : *res) {
      const double other = random.at(seed);
      if (r == other) continue;
      ++n;
      wins += r < other;
    }
    const double p = sign_test_p(wins, n);
    const double m = median(values(*res));
    pass = pass && m < m_random && m < floor && p < 0.05;
    detail += "; " + std::string(name) + " median " + fmt(m) + " (sign test " + std::to_string(wins) + "/" +
              std::to_string(n) + ", p " + fmt(p) + ")";
  }
  return {pass, detail + "; " + fmt(seconds_since(t0)) + " s"};
}

Outcome noise_robustness() {
  const auto t0 = clock_type::now();
  std::map<std::string, double> med;
  for (bool noise : {false, true}) {
    for (Method m : {Method::bn_exact, Method::bn_approx}) {
      const auto r = run_checked(experiment("saddle1", noise, m)).final_regrets(to_string(m));
      med[std::string(to_string(m)) + (noise ? "_noisy" : "")] = median(values(r));
    }
  }
  bool pass = true;
  std::string detail;
  for (const char* m : {"bn_exact", "bn_approx"}) {
    const double clean = med[m], noisy = med[std::string(m) + "_noisy"];
    const double ratio = noisy / std::max(clean, 1e-300);
    pass = pass && ratio < 10.0;
    detail += std::string(m) + " median " + fmt(clean) + " -> " + fmt(noisy) + " (x" + fmt(ratio) + "); ";
  }
  detail += std::string("noisy bn_approx <= bn_exact: ") + (med["bn_approx_noisy"] <= med["bn_exact_noisy"] ? "yes" : "no");
  return {pass, detail + "; " + fmt(seconds_since(t0)) + " s"};
}

Outcome saddle3_shape() {
  const auto t0 = clock_type::now();
  const GameSpec g = make_problem({"saddle3", false, {}});
  const double floor = grid_regret_floor(g, 11, {});
  const auto grid = run_checked(experiment("saddle3", false, Method::grid)).final_regrets("grid");
  const double m_grid = median(values(grid));
  bool pass = grid.size() == 8;
  std::string detail = "11-per-axis lattice floor " + fmt(floor) + ", grid_solver median at FE=120 " + fmt(m_grid);
  for (Method m : {Method::bn_exact, Method::bn_approx}) {
    const auto r = run_checked(experiment("saddle3", false, m)).final_regrets(to_string(m));
    const double med = median(values(r));
    pass = pass && r.size() == 8 && med < floor;
    detail += "; " + std::string(to_string(m)) + " median " + fmt(med);
  }
  return {pass, detail + "; " + fmt(seconds_since(t0)) + " s"};
}

Outcome iterated_br_sanity() {
  const GameSpec g = make_problem({"saddle1", false, {}});
  Rng rng = make_rng(77);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int converged = 0, expensive = 0, min_evals = 1 << 30;
  double worst = 0.0;
  for (int k = 0; k < 25; ++k) {
    const Profile start = (VectorXd(2) << unif(rng), unif(rng)).finished();
    const BRTrajectory t = iterated_br(g, start, 10, {2000, 0, static_cast<std::uint64_t>(k)});
    worst = std::max(worst, t.regrets.back());
    converged += t.regrets.back() < 1e-3;
    expensive += t.total_evals > 40;
    min_evals = std::min(min_evals, t.total_evals);
  }
  return {converged == 25 && expensive == 25,
          std::to_string(converged) + "/25 below 1e-3 (worst " + fmt(worst) + "), fewest utility evaluations " +
              std::to_string(min_evals)};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "bnne_acceptance";
  fs::create_directories(dir);
  bool identical = true;
  for (Method m : {Method::bn_exact, Method::bn_approx, Method::grid, Method::random}) {
    ExperimentConfig cfg = experiment("saddle1", m != Method::random, m);
    cfg.seeds = {1, 2, 3};
    cfg.total_fes = 20;
    emit_csv(run_checked(cfg), dir / "a.csv");
    cfg.seeds = {3, 1, 2};
    ConvergenceTable t = run_checked(cfg);
    cfg.seeds = {1, 2, 3};
    emit_csv(run_checked(cfg), dir / "b.csv");
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in), {});
    };
    identical = identical && slurp(dir / "a.csv") == slurp(dir / "b.csv");
  }
  fs::remove_all(dir);
  std::string detail = std::string("byte-identical CSVs: ") + (identical ? "yes" : "no") + "; " +
                       std::to_string(accounting_runs) + " solver runs audited";
  for (const auto& e : accounting_errors) detail += "; " + e;
  return {identical && accounting_errors.empty() && accounting_runs > 0, detail};
}

Outcome epsilon_statistics() {
  const GameSpec g = make_problem({"saddle1", false, {}});
  Rng rng = make_rng(99);
  ObservationSet data(2);
  for (const auto& x : initial_design(g.space, 6, rng)) data.append(oracle_eval(g, x, rng), false);
  const auto ss = fit_surrogates(data, g.space, 1, rng);
  SolverConfig cfg;
  cfg.acq_budget = 6;
  const int n = 10000;
  int explore = 0;
  for (int k = 0; k < n; ++k) explore += select_next(ss, g.space, cfg, rng).branch == Branch::explore;
  const double freq = explore / double(n);
  const double se = std::sqrt(cfg.epsilon * (1 - cfg.epsilon) / n);
  return {std::abs(freq - cfg.epsilon) <= 3 * se,
          "explore frequency " + fmt(freq) + " (" + fmt(std::abs(freq - cfg.epsilon) / se) + " standard errors)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed forms match quadrature", closed_forms},
      {"exact and sampled moments agree", exact_vs_sampled},
      {"uniform maximum recovery", uniform_max},
      {"numeric regret matches analytic regret", regret_oracle},
      {"saddle2 convergence shape", saddle2_shape},
      {"noise robustness on saddle1", noise_robustness},
      {"saddle3 convergence shape", saddle3_shape},
      {"iterated best response sanity", iterated_br_sanity},
      {"determinism and oracle accounting", determinism},
      {"epsilon-greedy statistics", epsilon_statistics},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << k + 1 << "] " << criteria[k].first << ": " << o.detail
              << std::endl;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
