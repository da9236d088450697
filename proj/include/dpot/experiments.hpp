// Copyright 2026 The dpot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPOT_EXPERIMENTS_HPP_
#define DPOT_EXPERIMENTS_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dpot/admm.hpp"
#include "dpot/errors.hpp"
#include "dpot/network.hpp"
#include "dpot/privacy.hpp"
#include "dpot/reference_solver.hpp"
#include "dpot/scenario.hpp"
#include "dpot/table.hpp"
#include "dpot/utility.hpp"

namespace dpot {

struct OutputOptions {
  std::string dir = ".";
  bool timestamp = true;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string output_path(const OutputOptions& out, const std::string& name) {
  std::filesystem::create_directories(out.dir);
  return (std::filesystem::path(out.dir) / name).string();
}

inline void write_table(Table t, const OutputOptions& out, const std::string& name) {
  if (out.timestamp) {
    // The timestamp goes first among the metadata so it is a single,
    // droppable line.
    Table stamped(t.kind(), t.columns());
    stamped.add_meta("generated", utc_timestamp());
    for (const auto& [k, v] : t.meta()) stamped.add_meta(k, v);
    for (const auto& row : t.rows()) stamped.add_row(row);
    t = std::move(stamped);
  }
  t.write_file(output_path(out, name));
}

inline std::string describe_witness(const FeasibilityReport& r) {
  std::string s = "infeasible: bounds require " + format_number(r.required) +
                  " units through the lower-bound arcs but only " + format_number(r.routed) +
                  " can be routed; binding nodes:";
  for (const NodeId& n : r.witness) s += " " + to_string(n);
  return s;
}

inline void require_feasible(const Network& net) {
  const FeasibilityReport r = check_feasibility(net);
  if (!r) throw InfeasibleError(describe_witness(r));
}

inline Table plan_table(const Network& net, std::span<const double> plan,
                        const std::string& kind) {
  Table t(kind, {"edge", "target", "source", "pi"});
  for (std::size_t e = 0; e < net.n_edges(); ++e)
    t.add_row({format_number(e), format_number(net.edge(e).target),
               format_number(net.edge(e).source), format_number(plan[e])});
  return t;
}

inline Table solve_trace_table(const RunTrace& trace) {
  Table t("trace", {"iteration", "social_utility", "primal_residual", "dual_residual"});
  for (const IterationRecord& r : trace.records)
    t.add_row({format_number(r.iteration), format_number(r.social_utility),
               format_number(r.primal_residual), format_number(r.dual_residual)});
  return t;
}

inline Table dp_trace_table(const DpResult& r) {
  Table t("dp-trace", {"iteration", "social_utility"});
  for (std::size_t k = 0; k < r.trace.size(); ++k)
    t.add_row({format_number(k + 1), format_number(r.trace[k].social_utility)});
  return t;
}

inline Table key_value_table(const std::string& kind,
                             const std::vector<std::pair<std::string, std::string>>& rows) {
  Table t(kind, {"key", "value"});
  for (const auto& [k, v] : rows) t.add_row({k, v});
  return t;
}

// Per-target received totals, sum over incident edges of pi.
inline std::vector<double> target_totals(const Network& net, std::span<const double> plan) {
  std::vector<double> totals(net.n_targets(), 0.0);
  for (std::size_t e = 0; e < net.n_edges(); ++e) totals[net.edge(e).target] += plan[e];
  return totals;
}

inline std::optional<double> oracle_objective(const Scenario& sc) {
  if (!sc.utilities.all_linear()) return std::nullopt;
  return solve_centralized_linear(sc.network, sc.utilities).objective;
}

// --- solve ------------------------------------------------------------------

struct SolveReport {
  RunResult run;
  double objective = 0.0;
  std::optional<double> oracle;
};

inline SolveReport cmd_solve(const Scenario& sc, const OutputOptions& out) {
  require_feasible(sc.network);
  SolveReport rep;
  rep.run = run(sc.network, sc.utilities, sc.solve);
  rep.objective = social_utility(rep.run.plan, sc.utilities, sc.network);
  rep.oracle = oracle_objective(sc);
  write_table(plan_table(sc.network, rep.run.plan, "plan"), out, "solve_plan.csv");
  write_table(solve_trace_table(rep.run.trace), out, "solve_trace.csv");
  std::vector<std::pair<std::string, std::string>> summary{
      {"status", to_string(rep.run.status)},
      {"iterations", format_number(rep.run.iterations)},
      {"objective", format_number(rep.objective)},
      {"eta", format_number(sc.solve.eta)}};
  if (rep.oracle) summary.emplace_back("oracle_objective", format_number(*rep.oracle));
  write_table(key_value_table("solve-summary", summary), out, "solve_summary.csv");
  return rep;
}

// --- dp-solve ---------------------------------------------------------------

inline Scenario with_privacy(Scenario sc, std::optional<double> beta,
                             std::optional<std::size_t> iters) {
  if (beta)
    for (BetaSchedule& b : sc.privacy.beta) b = BetaSchedule::constant(*beta);
  if (iters) sc.privacy.iterations = *iters;
  return sc;
}

struct DpReport {
  DpResult dp;
  double nonprivate_utility = 0.0;
};

inline DpReport cmd_dp_solve(const Scenario& sc, const OutputOptions& out) {
  require_feasible(sc.network);
  DpReport rep;
  rep.dp = dp_run(sc.network, sc.utilities, sc.privacy, sc.solve, sc.noise_seed);
  SolveOptions quiet = sc.solve;
  quiet.record_trace = false;
  rep.nonprivate_utility =
      social_utility(run(sc.network, sc.utilities, quiet).plan, sc.utilities, sc.network);

  write_table(dp_trace_table(rep.dp), out, "dp_trace.csv");
  Table plan = plan_table(sc.network, rep.dp.summary_plan, "dp-plan");
  plan.add_meta("estimate", "mean consensus over iterations " +
                                format_number(rep.dp.tail_begin + 1) + ".." +
                                format_number(rep.dp.trace.size()));
  write_table(plan, out, "dp_plan.csv");
  write_table(
      key_value_table("dp-summary",
                      {{"iterations", format_number(rep.dp.trace.size())},
                       {"beta", format_number(sc.privacy.beta[0].values[0])},
                       {"rho", format_number(sc.privacy.rho)},
                       {"eta", format_number(sc.privacy.eta)},
                       {"noise_seed", std::to_string(sc.noise_seed)},
                       {"summary_plan_utility", format_number(rep.dp.summary_utility)},
                       {"tail_mean_utility", format_number(rep.dp.tail_mean_utility)},
                       {"tail_std_utility", format_number(rep.dp.tail_std_utility)},
                       {"nonprivate_utility", format_number(rep.nonprivate_utility)}}),
      out, "dp_summary.csv");
  return rep;
}

// --- sweep ------------------------------------------------------------------

struct SweepRow {
  double beta = 0.0;
  std::uint64_t seed = 0;
  double dp_utility = std::numeric_limits<double>::quiet_NaN();
  double dp_tail_mean_utility = std::numeric_limits<double>::quiet_NaN();
  double nonprivate_utility = std::numeric_limits<double>::quiet_NaN();
  double oracle_utility = std::numeric_limits<double>::quiet_NaN();
  double tail_std = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
};

struct SweepResult {
  std::vector<SweepRow> rows;

  // Mean DP summary utility per beta over rows with status ok, grid order.
  std::vector<std::pair<double, double>> mean_by_beta() const {
    std::vector<std::pair<double, double>> out;
    for (const SweepRow& r : rows) {
      auto it = std::find_if(out.begin(), out.end(),
                             [&](const auto& p) { return p.first == r.beta; });
      if (it == out.end()) out.emplace_back(r.beta, 0.0);
    }
    for (auto& [beta, mean] : out) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const SweepRow& r : rows)
        if (r.beta == beta && r.status == "ok") {
          sum += r.dp_utility;
          ++n;
        }
      mean = n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
  }
};

inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("spearman needs two equal series");
  const std::vector<double> rx = average_ranks(x), ry = average_ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / double(rx.size());
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / double(ry.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline std::string sanitize_cell(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

// Cross product of beta_grid x seeds. `scenario_for(seed)` supplies the
// instance of each seed (fixed instance with varying noise seed, or a fresh
// generated instance per seed). Failures are recorded per row.
inline SweepResult run_sweep(const std::function<Scenario(std::uint64_t)>& scenario_for,
                             const std::vector<double>& beta_grid,
                             const std::vector<std::uint64_t>& seeds) {
  if (beta_grid.empty()) throw ConfigError("beta grid is empty");
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  SweepResult result;
  for (std::uint64_t seed : seeds) {
    std::optional<Scenario> sc;
    double nonprivate = std::numeric_limits<double>::quiet_NaN();
    double oracle = std::numeric_limits<double>::quiet_NaN();
    std::string failure;
    try {
      sc = scenario_for(seed);
      SolveOptions quiet = sc->solve;
      quiet.record_trace = false;
      nonprivate = social_utility(run(sc->network, sc->utilities, quiet).plan, sc->utilities,
                                  sc->network);
      if (auto o = oracle_objective(*sc)) oracle = *o;
    } catch (const std::exception& e) {
      failure = sanitize_cell(std::string("error: ") + e.what());
    }
    for (double beta : beta_grid) {
      SweepRow row;
      row.beta = beta;
      row.seed = seed;
      row.nonprivate_utility = nonprivate;
      row.oracle_utility = oracle;
      if (!failure.empty()) {
        row.status = failure;
      } else {
        try {
          const Scenario cell = with_privacy(*sc, beta, std::nullopt);
          const DpResult dp =
              dp_run(cell.network, cell.utilities, cell.privacy, cell.solve, cell.noise_seed);
          row.dp_utility = dp.summary_utility;
          row.dp_tail_mean_utility = dp.tail_mean_utility;
          row.tail_std = dp.tail_std_utility;
        } catch (const std::exception& e) {
          row.status = sanitize_cell(std::string("error: ") + e.what());
        }
      }
      result.rows.push_back(row);
    }
  }
  // Deterministic (beta, seed) order.
  std::stable_sort(result.rows.begin(), result.rows.end(), [&](const SweepRow& a, const SweepRow& b) {
    const auto ia = std::find(beta_grid.begin(), beta_grid.end(), a.beta);
    const auto ib = std::find(beta_grid.begin(), beta_grid.end(), b.beta);
    return ia < ib;
  });
  return result;
}

inline Table sweep_table(const SweepResult& r) {
  Table t("sweep", {"beta", "seed", "dp_summary_utility", "dp_tail_mean_utility",
                    "nonprivate_utility", "oracle_utility", "tail_std", "status"});
  for (const SweepRow& row : r.rows)
    t.add_row({format_number(row.beta), std::to_string(row.seed), format_number(row.dp_utility),
               format_number(row.dp_tail_mean_utility), format_number(row.nonprivate_utility),
               format_number(row.oracle_utility), format_number(row.tail_std), row.status});
  return t;
}

inline SweepResult cmd_sweep(const std::function<Scenario(std::uint64_t)>& scenario_for,
                             const std::vector<double>& beta_grid,
                             const std::vector<std::uint64_t>& seeds, const OutputOptions& out) {
  SweepResult r = run_sweep(scenario_for, beta_grid, seeds);
  Table t = sweep_table(r);
  const auto means = r.mean_by_beta();
  if (means.size() >= 2) {
    std::vector<double> b, m;
    for (const auto& [beta, mean] : means) {
      b.push_back(beta);
      m.push_back(mean);
    }
    t.add_meta("spearman_mean_utility_vs_beta", format_number(spearman(b, m)));
  }
  write_table(t, out, "sweep.csv");
  return r;
}

// --- compare ----------------------------------------------------------------

struct CompareReport {
  CentralSolution central;
  RunResult admm;
  DpResult dp;
  std::vector<double> central_totals;
  std::vector<double> admm_totals;
  std::vector<double> dp_totals;
};

inline CompareReport cmd_compare(const Scenario& sc, const OutputOptions& out) {
  require_feasible(sc.network);
  CompareReport rep;
  rep.central = solve_centralized_linear(sc.network, sc.utilities);
  SolveOptions quiet = sc.solve;
  quiet.record_trace = false;
  rep.admm = run(sc.network, sc.utilities, quiet);
  rep.dp = dp_run(sc.network, sc.utilities, sc.privacy, sc.solve, sc.noise_seed);
  rep.central_totals = target_totals(sc.network, rep.central.plan);
  rep.admm_totals = target_totals(sc.network, rep.admm.plan);
  rep.dp_totals = target_totals(sc.network, rep.dp.summary_plan);

  Table t("compare", {"target", "p_hi", "central_total", "admm_total", "dp_total"});
  t.add_meta("central_objective", format_number(rep.central.objective));
  t.add_meta("admm_objective", format_number(social_utility(rep.admm.plan, sc.utilities, sc.network)));
  t.add_meta("dp_summary_objective", format_number(rep.dp.summary_utility));
  t.add_meta("beta", format_number(sc.privacy.beta[0].values[0]));
  for (std::size_t x = 0; x < sc.network.n_targets(); ++x)
    t.add_row({format_number(x), format_number(sc.network.target_bounds()[x].hi),
               format_number(rep.central_totals[x]), format_number(rep.admm_totals[x]),
               format_number(rep.dp_totals[x])});
  write_table(t, out, "compare.csv");
  return rep;
}

// --- audit ------------------------------------------------------------------

struct AuditLine {
  std::string check;
  std::string subject;
  double value = 0.0;
  double bound = 0.0;
  bool ok = true;
};

struct AuditReport {
  std::vector<AuditLine> lines;
  std::size_t slope_violations = 0;

  // Sensitivity and calibrated density-ratio checks; the slope-bound and
  // inverted-calibration lines are informational.
  bool theory_holds() const {
    for (const AuditLine& l : lines)
      if ((l.check == "sensitivity" || l.check == "density_ratio") && !l.ok) return false;
    return true;
  }
};

inline AuditReport run_audit(const Scenario& sc, std::size_t trials, std::uint64_t seed) {
  AuditReport rep;
  const Network& net = sc.network;
  const double eta = sc.solve.eta;
  const auto violations = check_slope_bound(sc.utilities, GradBound(sc.privacy.rho), net);
  rep.slope_violations = violations.size();
  rep.lines.push_back({"slope_bound", "all_edges", max_slope(sc.utilities), sc.privacy.rho,
                       violations.empty()});

  // Once with the configured rho, once with rho = the largest slope so the
  // gradient hypothesis holds for the actual utilities.
  std::vector<std::pair<std::string, double>> rhos{{"configured_rho", sc.privacy.rho}};
  const double slope_rho = max_slope(sc.utilities);
  if (slope_rho > 0.0 && slope_rho != sc.privacy.rho) rhos.emplace_back("max_slope_rho", slope_rho);
  NoiseEngine rng(seed);
  for (const auto& [label, rho] : rhos) {
    for (const NodeId node : net.nodes()) {
      const SensitivityReport s = sensitivity_audit(net, sc.utilities, node, trials, rng, rho, eta);
      rep.lines.push_back({"sensitivity", label + ":" + to_string(node), s.max_distance, s.bound,
                           s.within_bound()});
    }
  }
  std::vector<double> betas;
  for (const BetaSchedule& b : sc.privacy.beta)
    for (double v : b.values)
      if (std::find(betas.begin(), betas.end(), v) == betas.end()) betas.push_back(v);
  const double rho = sc.privacy.rho;
  for (double beta : betas) {
    const double s = rho / eta;
    const DensityRatioCheck calibrated = density_ratio_check_1d(xi_from_beta(rho, eta, beta), s, beta);
    rep.lines.push_back({"density_ratio", "beta=" + format_number(beta), calibrated.log_ratio, beta,
                         calibrated.holds});
    const DensityRatioCheck inverted = density_ratio_check_1d((rho / eta) * beta, s, beta);
    rep.lines.push_back({"density_ratio_inverted_xi", "beta=" + format_number(beta),
                         inverted.log_ratio, beta, inverted.holds});
  }
  return rep;
}

inline AuditReport cmd_audit(const Scenario& sc, std::size_t trials, std::uint64_t seed,
                             const OutputOptions& out) {
  AuditReport rep = run_audit(sc, trials, seed);
  Table t("audit", {"check", "subject", "value", "bound", "verdict"});
  t.add_meta("trials_per_node", format_number(trials));
  for (const AuditLine& l : rep.lines)
    t.add_row({l.check, l.subject, format_number(l.value), format_number(l.bound),
               l.ok ? "ok" : "violated"});
  write_table(t, out, "audit.csv");
  return rep;
}

}  // namespace dpot

#endif  // DPOT_EXPERIMENTS_HPP_
