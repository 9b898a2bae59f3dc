#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "iapg/inner_loop.hpp"
#include "iapg/linops.hpp"
#include "iapg/prox.hpp"

namespace iapg {

/// Convex differentiable f with a value and a gradient oracle. `lipschitz` is
/// an optional known smoothness constant used only for diagnostics.
template <typename Scalar>
struct SmoothFunction {
  std::function<Scalar(const Vector<Scalar>&)> value;
  std::function<Vector<Scalar>(const Vector<Scalar>&)> gradient;
  Scalar lipschitz{0};
};

template <typename Scalar>
struct OuterConfig {
  Scalar E0{64};          ///< absolute error budget at k = 0
  Scalar p{2};            ///< error schedule exponent, p > 1
  Scalar rho{1};          ///< rho_k = rho * B_k, hence L_k = (1 + rho) B_k
  Scalar r{Scalar(1) / Scalar(16)};  ///< floor ratio L_k >= r L_max
  int s{1024};            ///< L relaxation half-life
  Scalar B0{1};           ///< initial smoothness estimate
  Scalar eps_stat{1e-8};  ///< exit when ||x_k - y_k|| <= eps_stat
  long max_iters{100000};
  Scalar B_cap{std::ldexp(Scalar(1), 1023)};

  int inner_s{4096};
  long inner_max_iters{1L << 20};
  Scalar inner_tau_cap{std::ldexp(Scalar(1), 1023)};

  bool record_iterates{false};
  InnerObserver<Scalar> inner_observer{};
};

enum class OuterStatus { Converged, MaxIters, LineSearchError };

template <typename Scalar>
struct OuterRecord {
  long k{0};
  Scalar alpha{0};
  Scalar B{0};
  Scalar L{0};
  Scalar L_max{0};
  Scalar rho_k{0};
  Scalar eps_abs{0};
  Scalar eps_rel{0};      ///< (rho_k / 2) ||x_k - y_k||^2
  long J{0};              ///< inner iterations spent in this outer iteration
  long armijo_doublings{0};
  Scalar residual{0};     ///< ||x_k - y_k||
  Scalar F{0};            ///< f(x_k) + omega(A x_k), diagnostic only
  Scalar gap{0};          ///< duality gap of the accepted inner solve
  Scalar stationarity_bound{0};  ///< (L_f + L_k) ||x_k - y_k||, 0 if L_f unknown
  InnerStatus inner_status{InnerStatus::Converged};
  // Filled only with OuterConfig::record_iterates.
  Vector<Scalar> x, y, x_circ;
};

template <typename Scalar>
using OuterTrace = std::vector<OuterRecord<Scalar>>;

/// Sequences derived from a trace for checking the convergence theory.
template <typename Scalar>
struct TheoryLedger {
  Scalar L0{0};
  Scalar L_max{0};
  Scalar E0{0};
  Scalar p{0};
  std::vector<Scalar> beta;        ///< alpha_k^2 L_k / L_0
  std::vector<Scalar> beta_lower;  ///< (1 + sqrt(L0) sum_{i<=k} L_i^{-1/2})^{-2}
  std::vector<Scalar> beta_upper;  ///< (1 + sqrt(L0)/2 sum_{i<=k} L_i^{-1/2})^{-2}
  std::vector<Scalar> R;           ///< E0 (1 + sum_{l<=k} l^{-p})
  std::vector<Scalar> eps_floor;   ///< E0 / (4 k^{2+p}), k >= 1; E0 at k = 0
  std::vector<Scalar> momentum_residual;  ///< |(1-a_{k+1}) a_k^2 L_k - a_{k+1}^2 L_{k+1}|
  Scalar R_infinity{0};
  Scalar C1{0};  ///< sqrt(L0 / L_max) / 2
};

template <typename Scalar>
struct OuterResult {
  Vector<Scalar> x;
  Vector<Scalar> x_init;  ///< x_{-1} = x°_{-1}
  OuterStatus status{OuterStatus::MaxIters};
  OuterTrace<Scalar> trace;
  TheoryLedger<Scalar> ledger;
  long total_inner{0};
};

template <typename Scalar>
Vector<Scalar> momentum_point(VectorCRef<Scalar> x_circ_prev,
                              VectorCRef<Scalar> x_prev, Scalar alpha) {
  detail::check_length(x_circ_prev.size(), x_prev.size(), "momentum_point");
  return alpha * x_circ_prev + (Scalar(1) - alpha) * x_prev;
}

template <typename Scalar>
Scalar eps_abs_schedule(long k, Scalar L_k, Scalar L0, Scalar alpha_k, Scalar E0, Scalar p) {
  if (k <= 0) return E0;
  return L_k / L0 * alpha_k * alpha_k * E0 * std::pow(static_cast<Scalar>(k), -p);
}

/// Positive root of (1 - a) = a^2 L_next / (alpha_k^2 L_k).
template <typename Scalar>
Scalar update_alpha(Scalar alpha_k, Scalar L_k, Scalar L_next) {
  if (!(alpha_k > Scalar(0)) || !(L_k > Scalar(0)) || !(L_next > Scalar(0))) {
    throw std::invalid_argument("update_alpha: inputs must be positive");
  }
  const Scalar a2 = alpha_k * alpha_k;
  const Scalar q = L_next / L_k;
  // (L_k / 2 L_next)(-a2 + sqrt(a2^2 + 4 a2 q)), rewritten as 2 a2 / (a2 + sqrt(a2^2 + 4 a2 q))
  // to avoid cancellation when a2 << q.
  return Scalar(2) * a2 / (a2 + std::sqrt(a2 * a2 + Scalar(4) * a2 * q));
}

template <typename Scalar>
bool armijo_check(const SmoothFunction<Scalar>& f, Scalar f_y,
                  VectorCRef<Scalar> grad_y,
                  VectorCRef<Scalar> x_cand,
                  VectorCRef<Scalar> y, Scalar B) {
  const Vector<Scalar> d = x_cand - y;
  const Scalar f_x = f.value(Vector<Scalar>(x_cand));
  const Scalar lin = grad_y.dot(d);
  const Scalar bregman = f_x - f_y - lin;
  // Rounding in f_x - f_y dominates once ||d|| is tiny.
  const Scalar slack = Scalar(8) * std::numeric_limits<Scalar>::epsilon() *
                       (std::abs(f_x) + std::abs(f_y) + std::abs(lin));
  return bregman <= B / Scalar(2) * d.squaredNorm() + slack;
}

template <typename Scalar>
bool armijo_check(const SmoothFunction<Scalar>& f,
                  VectorCRef<Scalar> x_cand,
                  VectorCRef<Scalar> y, Scalar B) {
  const Vector<Scalar> yv = y;
  return armijo_check(f, f.value(yv), f.gradient(yv), x_cand, y, B);
}

template <typename Scalar>
Scalar backtrack_L(Scalar L_k, Scalar L_max, Scalar r, int s) {
  return std::max(std::exp2(-Scalar(1) / Scalar(s)) * L_k, r * L_max);
}

template <typename Scalar>
Vector<Scalar> extrapolate(VectorCRef<Scalar> x_prev,
                           VectorCRef<Scalar> x_k, Scalar alpha) {
  if (alpha == Scalar(0)) throw std::invalid_argument("extrapolate: alpha must be nonzero");
  detail::check_length(x_k.size(), x_prev.size(), "extrapolate");
  return x_prev + (x_k - x_prev) / alpha;
}

/// E0 (1 + zeta(p)), summed to 10^6 terms plus the integral tail bound.
template <typename Scalar>
Scalar r_infinity(Scalar E0, Scalar p) {
  constexpr long terms = 1000000;
  Scalar acc(0);
  for (long l = terms; l >= 1; --l) acc += std::pow(static_cast<Scalar>(l), -p);
  acc += std::pow(static_cast<Scalar>(terms), Scalar(1) - p) / (p - Scalar(1));
  return E0 * (Scalar(1) + acc);
}

template <typename Scalar>
TheoryLedger<Scalar> build_theory_ledger(const OuterTrace<Scalar>& trace,
                                         const OuterConfig<Scalar>& cfg) {
  TheoryLedger<Scalar> led;
  if (trace.empty()) return led;
  led.L0 = trace.front().L;
  led.E0 = cfg.E0;
  led.p = cfg.p;
  for (const auto& rec : trace) led.L_max = std::max({led.L_max, rec.L, rec.L_max});

  Scalar inv_sqrt_sum(0);
  Scalar zeta_partial(0);
  const Scalar sqrt_L0 = std::sqrt(led.L0);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& rec = trace[i];
    const auto k = static_cast<Scalar>(rec.k);
    if (rec.k >= 1) {
      inv_sqrt_sum += Scalar(1) / std::sqrt(rec.L);
      zeta_partial += std::pow(k, -cfg.p);
    }
    led.beta.push_back(rec.alpha * rec.alpha * rec.L / led.L0);
    const Scalar lo = Scalar(1) + sqrt_L0 * inv_sqrt_sum;
    const Scalar hi = Scalar(1) + sqrt_L0 / Scalar(2) * inv_sqrt_sum;
    led.beta_lower.push_back(Scalar(1) / (lo * lo));
    led.beta_upper.push_back(Scalar(1) / (hi * hi));
    led.R.push_back(cfg.E0 * (Scalar(1) + zeta_partial));
    led.eps_floor.push_back(rec.k >= 1 ? cfg.E0 / (Scalar(4) * std::pow(k, Scalar(2) + cfg.p))
                                       : cfg.E0);
    if (i + 1 < trace.size()) {
      const auto& nxt = trace[i + 1];
      const Scalar a2 = rec.alpha * rec.alpha;
      led.momentum_residual.push_back(
          std::abs((Scalar(1) - nxt.alpha) * a2 * rec.L - nxt.alpha * nxt.alpha * nxt.L));
    }
  }
  led.R_infinity = r_infinity(cfg.E0, cfg.p);
  led.C1 = std::sqrt(led.L0 / led.L_max) / Scalar(2);
  return led;
}

/// Right-hand side of the O(1/k^2) optimality-gap bound at trace index i:
/// beta_k ((L0/2) ||x_bar - x°_{-1}||^2 + R_k(p)).
template <typename Scalar>
Scalar value_bound(const TheoryLedger<Scalar>& led, std::size_t i, Scalar dist_xbar_init) {
  return led.beta.at(i) * (led.L0 / Scalar(2) * dist_xbar_init * dist_xbar_init + led.R.at(i));
}

/// Right-hand side of the O(1/k) bound on ||x_k - y_k|| at trace index i.
template <typename Scalar>
Scalar residual_bound(const TheoryLedger<Scalar>& led, std::size_t i, long k,
                      Scalar dist_xbar_init) {
  const Scalar ratio = std::sqrt(led.L0 / led.L_max);
  return Scalar(2) * ratio / (Scalar(1) + static_cast<Scalar>(k) * ratio / Scalar(2)) *
         (dist_xbar_init + std::sqrt(Scalar(2) * led.R.at(i) / led.L0));
}

/// Inexact accelerated proximal gradient for min_x f(x) + omega(Ax).
///
/// Each outer iteration solves the proximal-point subproblem at
/// y+ = y_k - grad f(y_k) / L_k with `pppgd`, doubling B_k until the Armijo
/// condition holds. When B_k doubles at k >= 1, alpha_k and y_k are recomputed
/// from the new L_k so that the momentum recursion stays exact.
template <typename Scalar>
OuterResult<Scalar> iapg_solve(const SmoothFunction<Scalar>& f, const Regularizer<Scalar>& spec,
                               const LinearOperator<Scalar>& A,
                               VectorCRef<Scalar> x_init,
                               const OuterConfig<Scalar>& cfg) {
  const Index n = A.cols();
  detail::check_length(x_init.size(), n, "iapg_solve x_init");
  detail::check_length(spec.dim(), A.rows(), "iapg_solve regularizer");
  if (!(cfg.p > Scalar(1))) throw std::invalid_argument("iapg_solve: p must exceed 1");
  if (!(cfg.r > Scalar(0)) || cfg.r > Scalar(1)) {
    throw std::invalid_argument("iapg_solve: r must lie in (0, 1]");
  }
  if (!(cfg.B0 > Scalar(0)) || !(cfg.E0 > Scalar(0)) || !(cfg.rho >= Scalar(0))) {
    throw std::invalid_argument("iapg_solve: B0, E0 must be positive and rho nonnegative");
  }
  if (cfg.s < 1 || cfg.inner_s < 1) throw std::invalid_argument("iapg_solve: s must be >= 1");

  OuterResult<Scalar> res;
  res.x_init = x_init;

  const Scalar norm_sq = op_norm_sq(A);
  Scalar B = cfg.B0;
  Scalar L0 = (Scalar(1) + cfg.rho) * B;
  Scalar L = L0;
  Scalar L_max = L0;
  Scalar alpha(1);
  Scalar alpha_prev(1), L_prev = L0;
  Vector<Scalar> x_prev = x_init;
  Vector<Scalar> x_circ_prev = x_init;
  Vector<Scalar> x = x_init;

  for (long k = 0; k < cfg.max_iters; ++k) {
    Vector<Scalar> y = momentum_point<Scalar>(x_circ_prev, x_prev, alpha);
    Vector<Scalar> grad_y = f.gradient(y);
    Scalar f_y = f.value(y);
    Scalar rho_k = cfg.rho * B;

    long J = 0;
    long doublings = 0;
    bool armijo_ok = false;
    InnerReport<Scalar> inner;
    while (B <= cfg.B_cap) {
      InnerConfig<Scalar> icfg;
      icfg.eps_abs = eps_abs_schedule(k, L, L0, alpha, cfg.E0, cfg.p);
      icfg.rho = rho_k;
      icfg.lambda = Scalar(1) / L;
      icfg.tau0 = norm_sq > Scalar(0) ? norm_sq / L : Scalar(1) / L;
      icfg.s = cfg.inner_s;
      icfg.max_iters = cfg.inner_max_iters;
      icfg.tau_cap = cfg.inner_tau_cap;
      const Vector<Scalar> y_plus = y - grad_y / L;
      inner = pppgd<Scalar>(A, spec, y, y_plus, y, icfg, cfg.inner_observer);
      J += inner.iters;
      x = inner.z;
      if (inner.status == InnerStatus::LineSearchError) break;
      if (armijo_check<Scalar>(f, f_y, grad_y, x, y, B)) {
        armijo_ok = true;
        break;
      }
      B *= Scalar(2);
      ++doublings;
      rho_k = cfg.rho * B;
      L = (Scalar(1) + cfg.rho) * B;
      L_max = std::max(L, L_max);
      if (k >= 1) {
        alpha = update_alpha(alpha_prev, L_prev, L);
        y = momentum_point<Scalar>(x_circ_prev, x_prev, alpha);
        grad_y = f.gradient(y);
        f_y = f.value(y);
      }
    }
    res.total_inner += J;
    if (k == 0) L0 = L;  // B_0 may have doubled

    OuterRecord<Scalar> rec;
    rec.k = k;
    rec.alpha = alpha;
    rec.B = B;
    rec.L = L;
    rec.L_max = L_max;
    rec.rho_k = rho_k;
    rec.eps_abs = eps_abs_schedule(k, L, L0, alpha, cfg.E0, cfg.p);
    rec.residual = (x - y).norm();
    rec.eps_rel = rho_k / Scalar(2) * rec.residual * rec.residual;
    rec.J = J;
    rec.armijo_doublings = doublings;
    rec.F = f.value(x) + spec.evaluate(A.apply(x));
    rec.gap = inner.gap;
    rec.stationarity_bound = f.lipschitz > Scalar(0) ? (f.lipschitz + L) * rec.residual : Scalar(0);
    rec.inner_status = inner.status;
    if (cfg.record_iterates) {
      rec.x = x;
      rec.y = y;
    }

    if (inner.status == InnerStatus::LineSearchError) {
      res.trace.push_back(std::move(rec));
      res.status = OuterStatus::LineSearchError;
      break;
    }
    if (rec.residual <= cfg.eps_stat) {
      if (cfg.record_iterates) rec.x_circ = extrapolate<Scalar>(x_prev, x, alpha);
      res.trace.push_back(std::move(rec));
      res.status = OuterStatus::Converged;
      break;
    }
    if (!armijo_ok) {
      res.trace.push_back(std::move(rec));
      res.status = OuterStatus::LineSearchError;
      break;
    }

    const Scalar L_next = backtrack_L(L, L_max, cfg.r, cfg.s);
    Vector<Scalar> x_circ = extrapolate<Scalar>(x_prev, x, alpha);
    if (cfg.record_iterates) rec.x_circ = x_circ;
    res.trace.push_back(std::move(rec));

    const Scalar alpha_next = update_alpha(alpha, L, L_next);
    alpha_prev = alpha;
    L_prev = L;
    alpha = alpha_next;
    L = L_next;
    B = L / (Scalar(1) + cfg.rho);
    x_prev = x;
    x_circ_prev = std::move(x_circ);
  }

  res.x = x;
  res.ledger = build_theory_ledger(res.trace, cfg);
  return res;
}

}  // namespace iapg
