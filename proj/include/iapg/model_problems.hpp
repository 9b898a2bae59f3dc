#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

#include "iapg/linops.hpp"
#include "iapg/outer_loop.hpp"
#include "iapg/prox.hpp"

namespace iapg {

/// Robust TV-l2 recovery:
///   min_x (1/2) dist^2(Cx - x_tilde | [-lam_box, lam_box]^n) + eta ||Ax||_1
/// with C a box blur and A the forward difference.
template <typename Scalar>
struct RobustTVL2 {
  LinearOperator<Scalar> C;
  LinearOperator<Scalar> A;
  Vector<Scalar> x_bar;    ///< ground truth
  Vector<Scalar> x_tilde;  ///< observation
  Scalar lam_box{0};
  Scalar eta{1};
};

/// x_i = sign(sin(4 pi i / m)), i = 0..n-1, m = n - 1, with sign(0) = 0.
template <typename Scalar = double>
Vector<Scalar> ground_truth(Index n) {
  if (n < 2) throw std::invalid_argument("ground_truth: n must be >= 2");
  const double m = static_cast<double>(n - 1);
  Vector<Scalar> x(n);
  for (Index i = 0; i < n; ++i) {
    const double s = std::sin(4.0 * std::numbers::pi * static_cast<double>(i) / m);
    // sin(k pi) evaluates to ~1e-16 rather than 0 in floating point.
    const double tol = 1e-12;
    x[i] = static_cast<Scalar>(s > tol ? 1.0 : (s < -tol ? -1.0 : 0.0));
  }
  return x;
}

/// x_tilde = C x_bar + sigma z, z standard normal from a generator seeded with `seed`.
template <typename Scalar>
Vector<Scalar> observe(const LinearOperator<Scalar>& C, const Vector<Scalar>& x_bar, Scalar sigma,
                      std::uint64_t seed) {
  if (sigma < Scalar(0)) throw std::invalid_argument("observe: sigma must be nonnegative");
  Vector<Scalar> out = C.apply(x_bar);
  if (sigma == Scalar(0)) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (Index i = 0; i < out.size(); ++i) out[i] += sigma * static_cast<Scalar>(normal(rng));
  return out;
}

template <typename Scalar>
Scalar fidelity_value(const RobustTVL2<Scalar>& prob, VectorCRef<Scalar> x) {
  const Vector<Scalar> r = prob.C.apply(x) - prob.x_tilde;
  return moreau_grad_dist_box(r, prob.lam_box).squaredNorm() / Scalar(2);
}

template <typename Scalar>
Vector<Scalar> fidelity_gradient(const RobustTVL2<Scalar>& prob,
                                 VectorCRef<Scalar> x) {
  const Vector<Scalar> r = prob.C.apply(x) - prob.x_tilde;
  return prob.C.apply_adjoint(moreau_grad_dist_box(r, prob.lam_box));
}

template <typename Scalar>
struct TVProblemParams {
  Index n{2048};
  Index l{128};
  Scalar eta{2};
  Scalar lam_box{0.2};
  Scalar sigma{0.3};
  std::uint64_t seed{0};
  bool identity_blur{false};  ///< replace C by the identity
};

/// Everything needed to run the solver on a robust TV-l2 instance.
template <typename Scalar>
struct TVProblem {
  RobustTVL2<Scalar> data;
  SmoothFunction<Scalar> f;
  Regularizer<Scalar> spec;
  LinearOperator<Scalar> A;
  Scalar C_norm_sq{0};
};

template <typename Scalar>
SmoothFunction<Scalar> fidelity_function(const RobustTVL2<Scalar>& prob, Scalar lipschitz) {
  SmoothFunction<Scalar> f;
  f.value = [prob](const Vector<Scalar>& x) { return fidelity_value(prob, x); };
  f.gradient = [prob](const Vector<Scalar>& x) { return fidelity_gradient(prob, x); };
  f.lipschitz = lipschitz;
  return f;
}

template <typename Scalar>
TVProblem<Scalar> build_tv_problem(const TVProblemParams<Scalar>& p) {
  if (!(p.eta > Scalar(0))) throw std::invalid_argument("build_tv_problem: eta must be positive");
  if (p.lam_box < Scalar(0)) throw std::invalid_argument("build_tv_problem: lam_box must be >= 0");
  LinearOperator<Scalar> C =
      p.identity_blur ? identity<Scalar>(p.n) : box_blur<Scalar>(p.n, p.l);
  LinearOperator<Scalar> A = forward_difference<Scalar>(p.n);
  Vector<Scalar> x_bar = ground_truth<Scalar>(p.n);
  Vector<Scalar> x_tilde = observe(C, x_bar, p.sigma, p.seed);
  RobustTVL2<Scalar> data{C, A, std::move(x_bar), std::move(x_tilde), p.lam_box, p.eta};
  const Scalar c_norm = op_norm_sq(C);
  auto f = fidelity_function(data, c_norm);
  auto spec = Regularizer<Scalar>::scaled_l1(p.eta, p.n - 1);
  return TVProblem<Scalar>{std::move(data), std::move(f), std::move(spec), std::move(A), c_norm};
}

/// Random-sparse l1 proximal problem: A = H + I with H from `random_sparse`,
/// omega = eta ||.||_1, and y uniform on dom omega* = [-eta, eta]^n.
template <typename Scalar>
struct SparseL1Problem {
  LinearOperator<Scalar> A;
  Regularizer<Scalar> spec;
  Vector<Scalar> y;
  Scalar lambda{1};
};

template <typename Scalar = double>
SparseL1Problem<Scalar> build_sparse_l1_problem(Index m, Index n, Scalar eta, Scalar lambda,
                                                std::uint64_t seed) {
  if (m != n) throw std::invalid_argument("build_sparse_l1_problem: H + I needs m == n");
  if (!(eta > Scalar(0)) || !(lambda > Scalar(0))) {
    throw std::invalid_argument("build_sparse_l1_problem: eta, lambda must be positive");
  }
  std::mt19937_64 rng(seed);
  const std::uint64_t op_seed = rng();
  LinearOperator<Scalar> A = random_sparse<Scalar>(m, n, op_seed) + identity<Scalar>(n);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vector<Scalar> y(n);
  for (Index i = 0; i < n; ++i) y[i] = eta * static_cast<Scalar>(uni(rng));
  return SparseL1Problem<Scalar>{std::move(A), Regularizer<Scalar>::scaled_l1(eta, m),
                                 std::move(y), lambda};
}

}  // namespace iapg
