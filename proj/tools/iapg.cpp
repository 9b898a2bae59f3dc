// iapg: experiment driver for the inexact accelerated proximal gradient solver.
//
//   iapg inner-bench --seed S --trials T --imax I --out PATH
//   iapg recover --config PATH --out DIR
//   iapg solve   --config PATH --out DIR
//
// Exit codes: 0 success, 1 I/O or internal error, 2 config error,
// 3 solver line-search error, 4 max-iters without convergence.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "iapg/experiments.hpp"

namespace {

int run_solver_command(const std::string& config_path, const std::string& out_dir,
                       bool allow_problem_key) {
  iapg::RunConfig cfg;
  try {
    cfg = config_path.empty() ? iapg::run_config_from({}, allow_problem_key)
                              : iapg::load_run_config(config_path, allow_problem_key);
  } catch (const iapg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  iapg::RunOutcome outcome;
  try {
    outcome = iapg::run_problem(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  iapg::write_run_outputs(out_dir, outcome);

  const auto& res = outcome.result;
  std::cout << "outer iterations: " << res.trace.size()
            << ", inner iterations: " << res.total_inner;
  if (!res.trace.empty()) std::cout << ", final residual: " << res.trace.back().residual;
  std::cout << ", wall time: " << outcome.wall_seconds << " s\n";
  const int code = iapg::exit_code(res.status);
  if (code == 3) std::cerr << "solver: line-search error\n";
  if (code == 4) std::cerr << "solver: max-iters reached without convergence\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inexact accelerated proximal gradient experiments"};
  app.require_subcommand(1);
  app.footer(iapg::config_help());

  auto* bench = app.add_subcommand("inner-bench", "Inner-loop iteration counts versus tolerance");
  std::uint64_t seed = 0;
  int trials = 100;
  int imax = 64;
  int threads = 0;
  std::string bench_out = "inner_bench.csv";
  bench->add_option("--seed", seed, "Base seed; trial t uses its own stream")->capture_default_str();
  bench->add_option("--trials", trials, "Trials per tolerance")->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--imax", imax, "Tolerances eps_i = 2^(-32 + i/4), i = 0..imax")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  bench->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
  bench->add_option("--out", bench_out, "Summary CSV path")->capture_default_str();

  auto* recover = app.add_subcommand("recover", "Robust TV-l2 signal recovery");
  auto* solve = app.add_subcommand("solve", "Generic problem from a config file");
  std::string config_path;
  std::string out_dir = "out";
  for (auto* sub : {recover, solve}) {
    sub->add_option("--config", config_path, "key = value config file (see below)");
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) {
      iapg::InnerBenchConfig cfg;
      cfg.seed = seed;
      cfg.trials = trials;
      cfg.threads = threads;
      cfg.eps_grid = iapg::default_eps_grid(imax);
      const auto result = iapg::run_inner_bench(cfg);
      std::ofstream out(bench_out);
      if (!out) {
        std::cerr << "cannot write " << bench_out << '\n';
        return 1;
      }
      iapg::write_summary_csv(out, result);
      return 0;
    }
    if (*recover) return run_solver_command(config_path, out_dir, false);
    if (*solve) return run_solver_command(config_path, out_dir, true);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
