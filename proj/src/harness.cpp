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

#include "bnne/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace bnne {

std::optional<Method> parse_method(std::string_view name) {
  if (name == "bn_exact") return Method::bn_exact;
  if (name == "bn_approx") return Method::bn_approx;
  if (name == "br") return Method::br;
  if (name == "random") return Method::random;
  if (name == "grid") return Method::grid;
  return std::nullopt;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::bn_exact: return "bn_exact";
    case Method::bn_approx: return "bn_approx";
    case Method::br: return "br";
    case Method::random: return "random";
    case Method::grid: return "grid";
  }
  return "?";
}

std::vector<std::uint64_t> ExperimentConfig::resolved_seeds() const {
  if (!seeds.empty()) return seeds;
  const std::uint64_t n = problem.name == "saddle3" ? 8 : 25;
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = 1; s <= n; ++s) out.push_back(s);
  return out;
}

int ExperimentConfig::resolved_total_fes() const {
  return total_fes > 0 ? total_fes : default_total_fes(problem.name);
}

int ExperimentConfig::resolved_grid_per_dim() const {
  if (grid_per_dim > 0) return grid_per_dim;
  return problem.name == "saddle3" ? 11 : 31;
}

std::string ExperimentConfig::problem_label() const {
  return problem.noise ? problem.name + "_noisy" : problem.name;
}

std::map<std::uint64_t, double> ConvergenceTable::final_regrets(std::string_view method) const {
  std::map<std::uint64_t, std::pair<int, double>> last;
  for (const auto& r : rows) {
    if (r.method != method) continue;
    auto& slot = last[r.seed];
    if (r.fe >= slot.first) slot = {r.fe, r.best_regret};
  }
  std::map<std::uint64_t, double> out;
  for (const auto& [seed, v] : last) out[seed] = v.second;
  return out;
}

void ConvergenceTable::append(const ConvergenceTable& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  failures += other.failures;
  warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
  aggregate(*this);
}

std::vector<double> best_so_far(const std::vector<double>& values) {
  std::vector<double> out(values.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = best = std::min(best, values[k]);
  return out;
}

void aggregate(ConvergenceTable& table) {
  std::map<std::tuple<std::string, std::string, int>, std::vector<double>> groups;
  for (const auto& r : table.rows) groups[{r.method, r.problem, r.fe}].push_back(r.best_regret);
  table.aggregates.clear();
  for (auto& [key, vals] : groups) {
    std::sort(vals.begin(), vals.end());
    const double n = static_cast<double>(vals.size());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const std::size_t h = vals.size() / 2;
    const double median = vals.size() % 2 ? vals[h] : 0.5 * (vals[h - 1] + vals[h]);
    table.aggregates.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), mean,
                                std::sqrt(var / n), median, static_cast<int>(vals.size())});
  }
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BNNE_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct SeedResult {
  std::vector<double> regrets;  // best-so-far, fe = 1..n
  int oracle_calls = -1;
  std::string error;
};

SeedResult run_seed(const ExperimentConfig& cfg, const GameSpec& game, std::uint64_t seed) {
  SeedResult out;
  const int fes = cfg.resolved_total_fes();
  BRConfig eval{cfg.eval_budget, 0, seed};
  std::vector<double> regrets;

  if (cfg.method == Method::br) {
    Rng rng = make_rng(seed, 11);
    const Profile start = initial_design(game.space, 1, rng).front();
    BRConfig br = cfg.br;
    br.seed = seed;
    const BRTrajectory traj = iterated_br(game, start, cfg.br_rounds, br);
    std::size_t k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int fe = 1; fe <= fes; ++fe) {
      while (k < traj.profiles.size() && traj.cumulative_evals[k] <= fe) best = std::min(best, traj.regrets[k++]);
      regrets.push_back(best);
    }
    out.regrets = std::move(regrets);
    return out;
  }

  RunRecord record;
  if (cfg.method == Method::random) {
    record = random_baseline(game, fes, seed, eval);
  } else {
    SolverConfig sc = cfg.solver;
    sc.total_fes = fes;
    sc.seed = seed;
    sc.acq.mode = cfg.method == Method::bn_approx ? AcquisitionConfig::Mode::sampled
                                                  : AcquisitionConfig::Mode::exact;
    record = cfg.method == Method::grid ? grid_solver(game, sc, cfg.resolved_grid_per_dim()) : run(game, sc);
  }
  if (record.failed) {
    out.error = "seed " + std::to_string(seed) + ": " + record.failure;
    return out;
  }
  for (const auto& row : record.rows) regrets.push_back(true_regret(game, row.profile, eval));
  out.regrets = best_so_far(regrets);
  out.oracle_calls = record.oracle_calls;
  return out;
}

}  // namespace

ConvergenceTable run_experiment(const ExperimentConfig& cfg) {
  const GameSpec game = make_problem(cfg.problem);
  if (!game.has_utilities()) {
    throw UnsupportedError("problem '" + cfg.problem.name + "' has no payoff functions to run against");
  }
  const std::vector<std::uint64_t> seeds = cfg.resolved_seeds();
  if (seeds.empty()) throw DomainError("run_experiment: no seeds");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw DomainError("run_experiment: seeds must be distinct");
  }

  std::vector<SeedResult> results(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < seeds.size(); k = next++) {
      try {
        results[k] = run_seed(cfg, game, seeds[k]);
      } catch (const std::exception& e) {
        results[k].error = "seed " + std::to_string(seeds[k]) + ": " + e.what();
      }
    }
  };
  const int workers = std::min<int>(resolve_workers(cfg.workers), static_cast<int>(seeds.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ConvergenceTable table;
  const std::string method{to_string(cfg.method)};
  const std::string problem = cfg.problem_label();
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    const SeedResult& r = results[k];
    if (!r.error.empty()) {
      ++table.failures;
      table.warnings.push_back(r.error);
      continue;
    }
    for (std::size_t fe = 0; fe < r.regrets.size(); ++fe) {
      table.rows.push_back({method, problem, seeds[k], static_cast<int>(fe) + 1, r.regrets[fe]});
    }
    if (r.oracle_calls >= 0) table.oracle_calls[seeds[k]] = r.oracle_calls;
  }
  aggregate(table);
  return table;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("I/O error while writing '" + path.string() + "'");
}

}  // namespace

void emit_csv(const ConvergenceTable& table, const std::filesystem::path& path) {
  if (table.rows.empty()) throw DomainError("emit_csv: empty table");
  std::ofstream out = open_output(path);
  out << "method,problem,seed,fe,best_regret\n";
  for (const auto& r : table.rows) {
    out << csv_field(r.method) << ',' << csv_field(r.problem) << ',' << r.seed << ',' << r.fe << ','
        << format_double(r.best_regret) << '\n';
  }
  finish(out, path);
}

void emit_summary_csv(const ConvergenceTable& table, const std::filesystem::path& path) {
  if (table.aggregates.empty()) throw DomainError("emit_summary_csv: empty table");
  std::ofstream out = open_output(path);
  out << "method,problem,fe,mean,std,median,count\n";
  for (const auto& a : table.aggregates) {
    out << csv_field(a.method) << ',' << csv_field(a.problem) << ',' << a.fe << ',' << format_double(a.mean)
        << ',' << format_double(a.std) << ',' << format_double(a.median) << ',' << a.count << '\n';
  }
  finish(out, path);
}

void emit_plot(const ConvergenceTable& table, const std::filesystem::path& path) {
  if (table.aggregates.empty()) throw DomainError("emit_plot: empty table");
  constexpr double kClamp = 1e-12;
  constexpr double W = 720, H = 440, left = 70, right = 160, top = 30, bottom = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::map<std::string, std::vector<const AggregateRow*>> series;
  int max_fe = 1;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& a : table.aggregates) {
    series[a.method].push_back(&a);
    max_fe = std::max(max_fe, a.fe);
    lo = std::min(lo, std::max(a.mean - a.std, kClamp));
    hi = std::max(hi, std::max(a.mean + a.std, kClamp));
  }
  double ylo = std::floor(std::log10(lo)), yhi = std::ceil(std::log10(hi));
  if (yhi <= ylo) yhi = ylo + 1;
  auto px = [&](double fe) { return left + (W - left - right) * (max_fe > 1 ? (fe - 1) / (max_fe - 1.0) : 0.5); };
  auto py = [&](double v) {
    const double l = std::log10(std::max(v, kClamp));
    return top + (H - top - bottom) * (yhi - l) / (yhi - ylo);
  };

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
      << W << ' ' << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int e = static_cast<int>(ylo); e <= static_cast<int>(yhi); ++e) {
    const double y = py(std::pow(10.0, e));
    svg << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << W - right << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  const int xticks = std::min(max_fe, 8);
  for (int k = 0; k < xticks; ++k) {
    const int fe = 1 + static_cast<int>(std::lround((max_fe - 1) * (xticks > 1 ? k / (xticks - 1.0) : 0.0)));
    svg << "<text x=\"" << px(fe) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">" << fe
        << "</text>\n";
  }
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
      << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\">function evaluations</text>\n";
  svg << "<text transform=\"translate(16," << (top + H - bottom) / 2
      << ") rotate(-90)\" text-anchor=\"middle\">regret</text>\n";

  std::size_t color = 0;
  for (const auto& [method, rows] : series) {
    const char* c = kColors[color++ % std::size(kColors)];
    svg << "<polygon fill=\"" << c << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
    for (const auto* a : rows) svg << px(a->fe) << ',' << py(a->mean + a->std) << ' ';
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
      svg << px((*it)->fe) << ',' << py((*it)->mean - (*it)->std) << ' ';
    }
    svg << "\"/>\n<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (const auto* a : rows) svg << px(a->fe) << ',' << py(a->mean) << ' ';
    svg << "\"/>\n";
    for (const auto* a : rows) {
      svg << "<circle cx=\"" << px(a->fe) << "\" cy=\"" << py(a->mean) << "\" r=\"2\" fill=\"" << c << "\"/>\n";
    }
    const double ly = top + 16.0 * static_cast<double>(color);
    svg << "<line x1=\"" << W - right + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 32 << "\" y2=\"" << ly
        << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << W - right + 38 << "\" y=\"" << ly + 4 << "\">" << method << "</text>\n";
  }
  svg << "</g>\n</svg>\n";

  std::ofstream out = open_output(path);
  out << svg.str();
  finish(out, path);
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config '" + path.string() + "'");
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> out;
  auto parse_num = [](std::string_view s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
      throw DomainError("invalid seed '" + std::string(s) + "'");
    }
    return v;
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string_view item = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
    if (const auto dots = item.find(".."); dots != std::string_view::npos) {
      const std::uint64_t a = parse_num(item.substr(0, dots));
      const std::uint64_t b = parse_num(item.substr(dots + 2));
      if (b < a) throw DomainError("invalid seed range '" + std::string(item) + "'");
      for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
    } else {
      out.push_back(parse_num(item));
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace bnne
