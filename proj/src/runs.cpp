#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "iapg/experiments.hpp"
#include "iapg/inner_loop.hpp"

namespace iapg {

std::vector<double> default_eps_grid(int i_max) {
  if (i_max < 0) throw std::invalid_argument("default_eps_grid: i_max must be >= 0");
  std::vector<double> grid;
  for (int i = 0; i <= i_max; ++i) grid.push_back(std::exp2(-32.0 + i / 4.0));
  return grid;
}

InnerBenchResult run_inner_bench(const InnerBenchConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("inner bench: trials must be >= 1");
  if (cfg.eps_grid.empty()) throw std::invalid_argument("inner bench: empty tolerance grid");
  const double eps_min = *std::min_element(cfg.eps_grid.begin(), cfg.eps_grid.end());
  if (!(eps_min > 0)) throw std::invalid_argument("inner bench: tolerances must be positive");
  const std::size_t n_eps = cfg.eps_grid.size();

  InnerBenchResult result;
  result.first_passage.assign(static_cast<std::size_t>(cfg.trials), {});
  std::vector<std::vector<bool>> censored(static_cast<std::size_t>(cfg.trials));
  std::mutex merge_mutex;
  std::atomic<int> next_trial{0};

  auto worker = [&] {
    double worst = -1e300;
    bool certificates = true;
    for (int trial = next_trial++; trial < cfg.trials; trial = next_trial++) {
      // One independent stream per trial index.
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                        static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(trial)};
      std::mt19937_64 stream(seq);
      const auto prob = build_sparse_l1_problem<double>(cfg.dim, cfg.dim, cfg.eta, cfg.lambda,
                                                        stream());
      InnerConfig<double> icfg;
      icfg.eps_abs = eps_min;
      icfg.rho = 0;
      icfg.lambda = cfg.lambda;
      icfg.tau0 = cfg.lambda * op_norm_sq(prob.A);
      icfg.max_iters = cfg.max_iters;

      std::vector<long> first(n_eps, -1);
      auto observer = [&](const InnerStep<double>& st) {
        worst = std::max(worst, -st.gap / (1.0 + std::abs(st.phi) + std::abs(st.psi)));
        for (std::size_t i = 0; i < n_eps; ++i) {
          if (first[i] < 0 && st.gap <= cfg.eps_grid[i]) first[i] = st.j;
        }
      };
      const auto rep = pppgd<double>(prob.A, prob.spec, prob.y, prob.y, prob.y, icfg, observer);
      if (rep.status == InnerStatus::Converged &&
          !gap_certificate<double>(rep.gap, icfg.eps_abs, icfg.rho, rep.z, prob.y)) {
        certificates = false;
      }
      std::vector<bool> cens(n_eps, false);
      for (std::size_t i = 0; i < n_eps; ++i) {
        if (first[i] < 0) {
          first[i] = cfg.max_iters;
          cens[i] = true;
        }
      }
      const auto t = static_cast<std::size_t>(trial);
      result.first_passage[t] = std::move(first);
      censored[t] = std::move(cens);
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    result.worst_gap_violation = std::max(result.worst_gap_violation, worst);
    result.exit_certificates_hold = result.exit_certificates_hold && certificates;
  };

  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.trials));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back([&worker] { worker(); });
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < n_eps; ++i) {
    std::vector<double> js;
    int cens = 0;
    for (std::size_t t = 0; t < result.first_passage.size(); ++t) {
      js.push_back(static_cast<double>(result.first_passage[t][i]));
      cens += censored[t][i] ? 1 : 0;
    }
    result.rows.push_back(
        InnerBenchRow{static_cast<int>(i), cfg.eps_grid[i], five_number_summary(js), cens});
  }
  return result;
}

RunOutcome run_problem(const RunConfig& cfg) {
  RunOutcome out;
  SmoothFunction<double> f;
  Regularizer<double> spec = Regularizer<double>::zero(1);
  LinearOperator<double> A = identity<double>(1);
  OuterConfig<double> solver = cfg.solver;

  if (cfg.problem == "tv") {
    auto prob = build_tv_problem(cfg.tv);
    if (cfg.auto_B0) solver.B0 = prob.C_norm_sq;
    out.ground_truth = prob.data.x_bar;
    out.observed = prob.data.x_tilde;
    f = prob.f;
    spec = prob.spec;
    A = prob.A;
    std::ostringstream os;
    os << "problem=tv n=" << cfg.tv.n << " l=" << cfg.tv.l << " eta=" << cfg.tv.eta
       << " lam_box=" << cfg.tv.lam_box << " sigma=" << cfg.tv.sigma << " seed=" << cfg.tv.seed
       << " blur=" << (cfg.tv.identity_blur ? "identity" : "box");
    out.notes.push_back(os.str());
  } else {
    auto prob = build_sparse_l1_problem<double>(cfg.sparse_n, cfg.sparse_n, cfg.tv.eta,
                                                cfg.sparse_lambda, cfg.tv.seed);
    const double lambda = cfg.sparse_lambda;
    const Vector<double> y = prob.y;
    f.value = [y, lambda](const Vector<double>& x) {
      return (x - y).squaredNorm() / (2.0 * lambda);
    };
    f.gradient = [y, lambda](const Vector<double>& x) -> Vector<double> {
      return (x - y) / lambda;
    };
    f.lipschitz = 1.0 / lambda;
    if (cfg.auto_B0) solver.B0 = 1.0 / lambda;
    spec = prob.spec;
    A = prob.A;
    std::ostringstream os;
    os << "problem=sparse_l1 n=" << cfg.sparse_n << " eta=" << cfg.tv.eta
       << " lambda=" << lambda << " seed=" << cfg.tv.seed;
    out.notes.push_back(os.str());
  }

  std::ostringstream os;
  os << "solver E0=" << solver.E0 << " p=" << solver.p << " rho=" << solver.rho
     << " r=" << solver.r << " s_inner=" << solver.inner_s << " s_outer=" << solver.s
     << " B0=" << format_double(solver.B0) << " eps=" << solver.eps_stat;
  out.notes.push_back(os.str());
  out.notes.emplace_back("x_init = x_{-1} = zero vector");

  out.x_init = Vector<double>::Zero(A.cols());
  out.F_init = f.value(out.x_init) + spec.evaluate(A.apply(out.x_init));
  const auto start = std::chrono::steady_clock::now();
  out.result = iapg_solve<double>(f, spec, A, out.x_init, solver);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

namespace {

const char* status_name(OuterStatus s) {
  switch (s) {
    case OuterStatus::Converged:
      return "converged";
    case OuterStatus::MaxIters:
      return "max-iters";
    case OuterStatus::LineSearchError:
      return "line-search-error";
  }
  return "unknown";
}

}  // namespace

int exit_code(OuterStatus status) {
  switch (status) {
    case OuterStatus::Converged:
      return 0;
    case OuterStatus::LineSearchError:
      return 3;
    case OuterStatus::MaxIters:
      return 4;
  }
  return 1;
}

void write_run_outputs(const std::filesystem::path& out_dir, const RunOutcome& outcome) {
  std::filesystem::create_directories(out_dir);
  const auto& res = outcome.result;
  const auto rows = trace_rows(res.trace);
  {
    std::ofstream trace(out_dir / "trace.csv");
    if (!trace) throw std::runtime_error("cannot write " + (out_dir / "trace.csv").string());
    write_trace_csv(trace, rows, outcome.notes);
  }
  double mse_observed = 0, mse_recovered = 0;
  if (outcome.ground_truth.size() > 0) {
    std::ofstream signals(out_dir / "signals.csv");
    if (!signals) throw std::runtime_error("cannot write " + (out_dir / "signals.csv").string());
    write_signals_csv(signals, outcome.ground_truth, outcome.observed, res.x);
    const auto n = static_cast<double>(res.x.size());
    mse_observed = (outcome.observed - outcome.ground_truth).squaredNorm() / n;
    mse_recovered = (res.x - outcome.ground_truth).squaredNorm() / n;
  }

  std::ofstream summary(out_dir / "summary.txt");
  if (!summary) throw std::runtime_error("cannot write " + (out_dir / "summary.txt").string());
  summary << "status = " << status_name(res.status) << '\n'
          << "outer_iterations = " << res.trace.size() << '\n'
          << "total_inner_iterations = " << res.total_inner << '\n'
          << "final_residual = "
          << (res.trace.empty() ? std::string("nan") : format_double(res.trace.back().residual))
          << '\n'
          << "F_init = " << format_double(outcome.F_init) << '\n'
          << "F_final = "
          << (res.trace.empty() ? std::string("nan") : format_double(res.trace.back().F)) << '\n'
          << "wall_seconds = " << outcome.wall_seconds << '\n';
  if (outcome.ground_truth.size() > 0) {
    summary << "mse_observed = " << format_double(mse_observed) << '\n'
            << "mse_recovered = " << format_double(mse_recovered) << '\n';
  }

  // Reference-line fits: J_k against ln eps_abs and ln k, and the residual
  // against cumulative inner iterations.
  std::vector<double> log_eps, log_k, js, cum_j, resid;
  double cumulative = 0;
  for (const auto& r : rows) {
    cumulative += static_cast<double>(r.J);
    if (r.k >= 1) {
      log_eps.push_back(std::log(r.eps_abs));
      log_k.push_back(std::log(static_cast<double>(r.k)));
      js.push_back(static_cast<double>(r.J));
    }
    if (cumulative > 0 && r.residual > 0) {
      cum_j.push_back(cumulative);
      resid.push_back(r.residual);
    }
  }
  try {
    const auto fe = fit_affine(log_eps, js);
    summary << "fit_J_vs_ln_eps = a " << fe.intercept << " b " << fe.slope << " R2 "
            << fe.r_squared << '\n';
    const auto fk = fit_affine(log_k, js);
    summary << "fit_J_vs_ln_k = a " << fk.intercept << " b " << fk.slope << " R2 "
            << fk.r_squared << '\n';
  } catch (const std::invalid_argument&) {
    summary << "fit_J = unavailable (too few iterations)\n";
  }
  try {
    const auto fd = fit_log_decay(cum_j, resid);
    summary << "fit_residual_vs_cumulative_J = c " << fd.c << " c1 " << fd.c1 << " a " << fd.a
            << " b " << fd.b << '\n';
  } catch (const std::invalid_argument&) {
    summary << "fit_residual_vs_cumulative_J = unavailable\n";
  }
}

}  // namespace iapg
