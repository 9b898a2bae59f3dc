#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "iapg/linops.hpp"
#include "iapg/prox.hpp"

namespace iapg {

/// Parameters of one inexact proximal-point solve.
template <typename Scalar>
struct InnerConfig {
  Scalar eps_abs{0};    ///< absolute duality-gap tolerance
  Scalar rho{0};        ///< relative tolerance weight on ||z_j - y_k||^2 / 2
  Scalar lambda{1};     ///< proximal parameter
  Scalar tau0{0};       ///< initial inverse step; <= 0 selects lambda * ||A^T A||
  int s{4096};          ///< tau relaxation half-life
  long max_iters{1L << 20};
  Scalar tau_cap{std::ldexp(Scalar(1), 1023)};
};

enum class InnerStatus { Converged, MaxIters, LineSearchError };

template <typename Scalar>
struct InnerReport {
  Vector<Scalar> z;  ///< primal candidate, z = y+ - lambda A^T v
  Vector<Scalar> v;  ///< dual point, always in dom omega*
  long iters{0};     ///< exit iteration J
  Scalar phi{0};
  Scalar psi{0};
  Scalar gap{0};
  Scalar tau{0};  ///< tau at exit
  long doublings{0};
  InnerStatus status{InnerStatus::MaxIters};
};

/// Snapshot handed to an observer each time the duality gap is evaluated.
/// `step_tau` is the accepted tau that produced v_j (zero for j = 0).
template <typename Scalar>
struct InnerStep {
  long j;
  Scalar phi;
  Scalar psi;
  Scalar gap;
  Scalar step_tau;
  const Vector<Scalar>& z;
  const Vector<Scalar>& v;
};

template <typename Scalar>
using InnerObserver = std::function<void(const InnerStep<Scalar>&)>;

/// Phi_lambda(z) = omega(Az) + ||z - y+||^2 / (2 lambda).
template <typename Scalar>
Scalar primal_value(const Regularizer<Scalar>& spec, const LinearOperator<Scalar>& A,
                    Scalar lambda, VectorCRef<Scalar> y_plus,
                    VectorCRef<Scalar> z) {
  detail::check_length(z.size(), A.cols(), "primal_value");
  detail::check_length(y_plus.size(), A.cols(), "primal_value");
  return spec.evaluate(A.apply(z)) + (z - y_plus).squaredNorm() / (Scalar(2) * lambda);
}

/// Psi_lambda(v) = (lambda/2) ||A^T v||^2 - <A^T v, y+> + omega*(v).
/// Returns +infinity when v is outside dom omega*.
template <typename Scalar>
Scalar dual_value(const Regularizer<Scalar>& spec, const LinearOperator<Scalar>& A,
                  Scalar lambda, VectorCRef<Scalar> y_plus,
                  VectorCRef<Scalar> v) {
  detail::check_length(v.size(), A.rows(), "dual_value");
  detail::check_length(y_plus.size(), A.cols(), "dual_value");
  if (!spec.in_conj_domain(v, Scalar(64) * std::numeric_limits<Scalar>::epsilon())) {
    return std::numeric_limits<Scalar>::infinity();
  }
  const Vector<Scalar> atv = A.apply_adjoint(v);
  return lambda / Scalar(2) * atv.squaredNorm() - atv.dot(y_plus);
}

/// lambda ||A^T (v_new - v_old)||^2 <= tau ||v_new - v_old||^2.
template <typename Scalar>
bool line_search_pass(const LinearOperator<Scalar>& A, Scalar lambda,
                      VectorCRef<Scalar> v_new,
                      VectorCRef<Scalar> v_old, Scalar tau) {
  const Vector<Scalar> d = v_new - v_old;
  return lambda * A.apply_adjoint(d).squaredNorm() <= tau * d.squaredNorm();
}

/// Proximal gradient descent on the dual of the proximal-point problem
///   min_z omega(Az) + ||z - y+||^2 / (2 lambda),
/// stopped by the duality-gap certificate
///   Phi(z_j) + Psi(v_j) < eps_abs + (rho/2) ||z_j - y_k||^2.
///
/// The dual start is v_0 = prox_{omega*}(A z0) and every primal iterate is
/// recovered as z_j = y+ - lambda A^T v_j, so the returned pair always satisfies
/// that identity exactly.
template <typename Scalar>
InnerReport<Scalar> pppgd(const LinearOperator<Scalar>& A, const Regularizer<Scalar>& spec,
                          VectorCRef<Scalar> y_k,
                          VectorCRef<Scalar> y_plus,
                          VectorCRef<Scalar> z0,
                          const InnerConfig<Scalar>& cfg,
                          const InnerObserver<Scalar>& observer = {}) {
  const Index n = A.cols();
  const Index m = A.rows();
  detail::check_length(spec.dim(), m, "pppgd regularizer");
  detail::check_length(y_k.size(), n, "pppgd y_k");
  detail::check_length(y_plus.size(), n, "pppgd y_plus");
  detail::check_length(z0.size(), n, "pppgd z0");
  if (!(cfg.lambda > Scalar(0))) throw std::invalid_argument("pppgd: lambda must be positive");
  if (cfg.s < 1) throw std::invalid_argument("pppgd: s must be >= 1");
  if (cfg.eps_abs < Scalar(0) || cfg.rho < Scalar(0)) {
    throw std::invalid_argument("pppgd: tolerances must be nonnegative");
  }

  const Scalar lambda = cfg.lambda;
  Scalar tau = cfg.tau0;
  if (!(tau > Scalar(0))) tau = lambda * op_norm_sq(A);
  if (!(tau > Scalar(0))) tau = lambda;  // zero operator: any step passes
  const Scalar relax = std::exp2(-Scalar(1) / Scalar(cfg.s));

  Vector<Scalar> az(m), atv(n), atd(n), v_new(m), d(m);
  InnerReport<Scalar> rep;
  rep.v.resize(m);
  A.apply(z0, az);
  spec.conj_prox(Scalar(1), az, rep.v);
  A.apply_adjoint(rep.v, atv);
  rep.z = y_plus - lambda * atv;

  Scalar step_tau(0);
  for (long j = 0;; ++j) {
    A.apply(rep.z, az);
    rep.phi = spec.evaluate(az) + (rep.z - y_plus).squaredNorm() / (Scalar(2) * lambda);
    rep.psi = lambda / Scalar(2) * atv.squaredNorm() - atv.dot(y_plus);
    rep.gap = rep.phi + rep.psi;
    rep.iters = j;
    rep.tau = tau;
    if (observer) observer(InnerStep<Scalar>{j, rep.phi, rep.psi, rep.gap, step_tau, rep.z, rep.v});

    if (gap_certificate<Scalar>(rep.gap, cfg.eps_abs, cfg.rho, rep.z, y_k)) {
      rep.status = InnerStatus::Converged;
      return rep;
    }
    if (j >= cfg.max_iters) {
      rep.status = InnerStatus::MaxIters;
      return rep;
    }

    // The dual gradient A(lambda A^T v - y+) equals -A z_j.
    bool accepted = false;
    while (tau <= cfg.tau_cap) {
      spec.conj_prox(Scalar(1) / tau, rep.v + az / tau, v_new);
      d = v_new - rep.v;
      A.apply_adjoint(d, atd);
      if (lambda * atd.squaredNorm() <= tau * d.squaredNorm()) {
        accepted = true;
        break;
      }
      tau *= Scalar(2);
      ++rep.doublings;
    }
    if (!accepted) {
      rep.tau = tau;
      rep.status = InnerStatus::LineSearchError;
      return rep;
    }
    step_tau = tau;
    tau *= relax;
    rep.v.swap(v_new);
    A.apply_adjoint(rep.v, atv);
    rep.z = y_plus - lambda * atv;
  }
}

}  // namespace iapg
