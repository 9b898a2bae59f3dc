#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "iapg/model_problems.hpp"
#include "iapg/outer_loop.hpp"

namespace iapg {

struct FiveNumber {
  double min{0}, q1{0}, median{0}, q3{0}, max{0};
};

/// Quartiles by linear interpolation between order statistics at position (n-1) q.
FiveNumber five_number_summary(std::span<const double> values);

struct AffineFit {
  double intercept{0};
  double slope{0};
  double r_squared{0};  ///< 0 when ys have zero variance
};

AffineFit fit_affine(std::span<const double> xs, std::span<const double> ys);

/// Fit of ln y = ln c + a max(0, ln ln max(c1, x)) - b ln max(c1, x), with c1
/// chosen from the observed xs by grid search.
struct LogDecayFit {
  double c{0}, c1{0}, a{0}, b{0};
  double sse{0};
};

LogDecayFit fit_log_decay(std::span<const double> xs, std::span<const double> ys);

// ---------------------------------------------------------------------------
// Configuration

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` file; `#` starts a comment. Duplicate keys are errors.
std::map<std::string, std::string> parse_key_values(std::istream& in);

struct RunConfig {
  std::string problem{"tv"};  ///< "tv" or "sparse_l1"
  TVProblemParams<double> tv{};
  // sparse_l1: min_x ||x - y||^2 / (2 lambda) + eta ||(H + I) x||_1
  Index sparse_n{128};
  double sparse_lambda{1.0};
  OuterConfig<double> solver{};
  bool auto_B0{true};  ///< B0 = smoothness constant of f unless given
};

/// Applies the documented keys on top of the defaults. Unknown keys, bad
/// values, and (when `allow_problem_key` is false) a `problem` key raise ConfigError.
RunConfig run_config_from(const std::map<std::string, std::string>& kv, bool allow_problem_key);

RunConfig load_run_config(const std::filesystem::path& path, bool allow_problem_key);

/// Help text describing every config key.
std::string config_help();

// ---------------------------------------------------------------------------
// CSV interfaces

struct TraceRow {
  long k{0};
  long J{0};
  double residual{0}, eps_abs{0}, eps_rel{0}, F{0}, alpha{0}, B{0}, L{0};
  bool operator==(const TraceRow&) const = default;
};

std::vector<TraceRow> trace_rows(const OuterTrace<double>& trace);

/// Columns: k, J_k, residual, eps_abs, eps_rel, F, alpha, B, L. Comment lines
/// (`#`) before the header carry units and run parameters.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows,
                     const std::vector<std::string>& notes = {});
std::vector<TraceRow> read_trace_csv(std::istream& in);

void write_signals_csv(std::ostream& out, const Vector<double>& ground_truth,
                       const Vector<double>& observed, const Vector<double>& recovered);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Inner-loop complexity benchmark

struct InnerBenchConfig {
  std::uint64_t seed{0};
  int trials{100};
  std::vector<double> eps_grid;  ///< one summary row per tolerance
  Index dim{128};
  double eta{2.0};
  double lambda{1.0};
  long max_iters{1L << 20};
  int threads{0};  ///< 0 selects hardware concurrency
};

/// eps_i = 2^(-32 + i/4), i = 0..i_max.
std::vector<double> default_eps_grid(int i_max);

struct InnerBenchRow {
  int i{0};
  double eps{0};
  FiveNumber summary{};
  int censored{0};
};

struct InnerBenchResult {
  std::vector<InnerBenchRow> rows;
  std::vector<std::vector<long>> first_passage;  ///< [trial][eps index]
  /// Largest -(Phi + Psi) / (1 + |Phi| + |Psi|) seen at any inner iteration.
  double worst_gap_violation{-1e300};
  bool exit_certificates_hold{true};
};

InnerBenchResult run_inner_bench(const InnerBenchConfig& cfg);

/// Columns: i, eps, min, q1, median, q3, max, censored_count.
void write_summary_csv(std::ostream& out, const InnerBenchResult& result);

// ---------------------------------------------------------------------------
// Recovery / generic solve

struct RunOutcome {
  OuterResult<double> result;
  Vector<double> ground_truth;  ///< empty for problems without one
  Vector<double> observed;
  Vector<double> x_init;
  double F_init{0};
  double wall_seconds{0};
  std::vector<std::string> notes;
};

RunOutcome run_problem(const RunConfig& cfg);

/// Writes trace.csv, signals.csv (when a ground truth exists) and summary.txt.
void write_run_outputs(const std::filesystem::path& out_dir, const RunOutcome& outcome);

/// Process exit code for a solver status: 0 converged, 3 line-search error, 4 max-iters.
int exit_code(OuterStatus status);

}  // namespace iapg
