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

// Command-line driver for the dpot library.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpot/dpot.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitConfig = 4;

struct Args {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<double> beta;
  std::string beta_grid = "0.5,1,5,10,100,1000";
  std::optional<std::size_t> iters;
  std::size_t seeds = 20;
  std::size_t trials = 200;
  std::string out = ".";
  bool no_timestamp = false;
};

std::vector<double> parse_grid(const std::string& list) {
  std::vector<double> grid;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw dpot::ConfigError("empty entry in --beta-grid");
    grid.push_back(dpot::parse_number(item));
  }
  if (grid.empty()) throw dpot::ConfigError("--beta-grid is empty");
  return grid;
}

// --scenario wins; --seed then selects the noise stream. Without a file
// the paper-style instance for --seed (default 1) is generated.
dpot::Scenario load(const Args& a) {
  dpot::Scenario sc;
  if (!a.scenario.empty()) {
    sc = dpot::load_scenario(a.scenario);
    if (a.seed) sc.noise_seed = *a.seed;
  } else {
    sc = dpot::generate_paper_scenario(a.seed.value_or(1));
  }
  return dpot::with_privacy(std::move(sc), a.beta, a.iters);
}

dpot::OutputOptions output(const Args& a) { return {a.out, !a.no_timestamp}; }

int cmd_solve(const Args& a) {
  dpot::Scenario sc = load(a);
  if (a.iters) sc.solve.max_iters = *a.iters;
  const dpot::SolveReport rep = dpot::cmd_solve(sc, output(a));
  std::cout << "status " << dpot::to_string(rep.run.status) << "\niterations "
            << rep.run.iterations << "\nobjective " << dpot::format_number(rep.objective) << "\n";
  if (rep.oracle) std::cout << "oracle " << dpot::format_number(*rep.oracle) << "\n";
  return rep.run.status == dpot::RunStatus::kConverged ? kExitOk : kExitNotConverged;
}

int cmd_dp_solve(const Args& a) {
  const dpot::DpReport rep = dpot::cmd_dp_solve(load(a), output(a));
  std::cout << "summary_utility " << dpot::format_number(rep.dp.summary_utility)
            << "\ntail_std " << dpot::format_number(rep.dp.tail_std_utility)
            << "\nnonprivate_utility " << dpot::format_number(rep.nonprivate_utility) << "\n";
  return kExitOk;
}

int cmd_sweep(const Args& a) {
  const std::vector<double> grid = parse_grid(a.beta_grid);
  if (a.seeds == 0) throw dpot::ConfigError("--seeds must be positive");
  const std::uint64_t first = a.seed.value_or(1);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < a.seeds; ++i) seeds.push_back(first + i);

  std::function<dpot::Scenario(std::uint64_t)> factory;
  if (!a.scenario.empty()) {
    const dpot::Scenario base = dpot::with_privacy(dpot::load_scenario(a.scenario), std::nullopt, a.iters);
    factory = [base](std::uint64_t s) {
      dpot::Scenario sc = base;
      sc.noise_seed = s;
      return sc;
    };
  } else {
    factory = [iters = a.iters](std::uint64_t s) {
      return dpot::with_privacy(dpot::generate_paper_scenario(s), std::nullopt, iters);
    };
  }
  const dpot::SweepResult r = dpot::cmd_sweep(factory, grid, seeds, output(a));
  for (const auto& [beta, mean] : r.mean_by_beta())
    std::cout << "beta " << dpot::format_number(beta) << " mean_utility "
              << dpot::format_number(mean) << "\n";
  std::size_t failed = 0;
  for (const dpot::SweepRow& row : r.rows) failed += row.status != "ok";
  if (failed) std::cerr << failed << " sweep cells failed; see status column\n";
  return kExitOk;
}

int cmd_compare(const Args& a) {
  const dpot::CompareReport rep = dpot::cmd_compare(load(a), output(a));
  std::cout << "central_objective " << dpot::format_number(rep.central.objective)
            << "\ndp_summary_objective " << dpot::format_number(rep.dp.summary_utility) << "\n";
  return rep.admm.status == dpot::RunStatus::kConverged ? kExitOk : kExitNotConverged;
}

int cmd_gen_scenario(const Args& a) {
  const dpot::Scenario sc = load(a);
  const std::string path = dpot::output_path(output(a), "scenario.json");
  std::ofstream f(path);
  if (!(f << dpot::scenario_json(sc))) throw dpot::ConfigError("cannot write " + path);
  std::cout << path << "\n";
  return kExitOk;
}

int cmd_audit(const Args& a) {
  const dpot::Scenario sc = load(a);
  const dpot::AuditReport rep =
      dpot::cmd_audit(sc, a.trials, a.seed.value_or(sc.noise_seed), output(a));
  for (const dpot::AuditLine& l : rep.lines)
    if (!l.ok) std::cout << l.check << " " << l.subject << " violated\n";
  std::cout << "sensitivity_and_density " << (rep.theory_holds() ? "ok" : "violated") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed, differentially private optimal transport"};
  app.require_subcommand(1);
  Args args;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", args.scenario, "Scenario JSON file");
    sub->add_option("--seed", args.seed, "Scenario seed, or noise seed when --scenario is set");
    sub->add_option("--iters", args.iters, "Iteration count");
    sub->add_option("--out", args.out, "Output directory");
    sub->add_flag("--no-timestamp", args.no_timestamp, "Omit the generated timestamp line");
  };
  auto with_beta = [&](CLI::App* sub) { sub->add_option("--beta", args.beta, "Privacy level"); };

  struct Verb {
    const char* name;
    const char* help;
    int (*fn)(const Args&);
  };
  const Verb verbs[] = {
      {"solve", "Run non-private consensus ADMM", cmd_solve},
      {"dp-solve", "Run the differentially private iteration", cmd_dp_solve},
      {"sweep", "Cross product of beta grid and seeds", cmd_sweep},
      {"compare", "Per-target totals for oracle, ADMM and DP", cmd_compare},
      {"gen-scenario", "Write a scenario file", cmd_gen_scenario},
      {"audit", "Sensitivity, density ratio and slope-bound checks", cmd_audit},
  };
  int (*chosen)(const Args&) = nullptr;
  for (const Verb& v : verbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    common(sub);
    if (std::string(v.name) != "sweep") with_beta(sub);
    if (std::string(v.name) == "sweep") {
      sub->add_option("--beta-grid", args.beta_grid, "Comma-separated beta values");
      sub->add_option("--seeds", args.seeds, "Number of consecutive seeds");
    }
    if (std::string(v.name) == "audit")
      sub->add_option("--trials", args.trials, "Random trials per node");
    sub->callback([&chosen, fn = v.fn] { chosen = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    return chosen(args);
  } catch (const dpot::InfeasibleError& e) {
    std::cerr << e.what() << "\n";
    return kExitInfeasible;
  } catch (const dpot::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
