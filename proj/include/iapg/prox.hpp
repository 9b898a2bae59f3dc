#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <variant>

#include "iapg/linops.hpp"

namespace iapg {

class UnsupportedSpecError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Conic polyhedral regularizer omega on R^m.
///
/// `ScaledL1` is eta * ||z||_1, `MaxAffine` is max_i <w_i, z> with generators
/// stored as the columns of a matrix, and `Zero` is the constant zero function.
/// The conjugate omega* is an indicator in every case (of the box
/// [-eta, eta]^m, of conv{w_i}, and of {0}), so its prox is a projection.
template <typename Scalar>
class Regularizer {
 public:
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;
  using Projection = std::function<VectorType(const VectorType&)>;

  enum class Kind { ScaledL1, MaxAffine, Zero };

  static Regularizer scaled_l1(Scalar eta, Index dim) {
    if (!(eta > Scalar(0))) throw std::invalid_argument("scaled_l1: eta must be positive");
    if (dim < 1) throw std::invalid_argument("scaled_l1: dimension must be >= 1");
    Regularizer r(Kind::ScaledL1, dim);
    r.eta_ = eta;
    return r;
  }

  /// Generators are the columns of `generators` (m x N). `projection`, when
  /// given, must return the Euclidean projection onto conv{w_i}.
  static Regularizer max_affine(MatrixType generators, Projection projection = {}) {
    if (generators.rows() < 1 || generators.cols() < 1) {
      throw std::invalid_argument("max_affine: need at least one generator");
    }
    Regularizer r(Kind::MaxAffine, generators.rows());
    r.generators_ = std::move(generators);
    r.projection_ = std::move(projection);
    return r;
  }

  static Regularizer zero(Index dim) {
    if (dim < 1) throw std::invalid_argument("zero: dimension must be >= 1");
    return Regularizer(Kind::Zero, dim);
  }

  Kind kind() const { return kind_; }
  Index dim() const { return dim_; }
  Scalar eta() const { return eta_; }
  const MatrixType& generators() const { return generators_; }
  bool has_projection() const { return static_cast<bool>(projection_); }

  Scalar operator()(const Eigen::Ref<const VectorType>& z) const { return evaluate(z); }

  Scalar evaluate(const Eigen::Ref<const VectorType>& z) const {
    detail::check_length(z.size(), dim_, "omega_eval");
    switch (kind_) {
      case Kind::ScaledL1:
        return eta_ * z.template lpNorm<1>();
      case Kind::MaxAffine:
        return (generators_.transpose() * z).maxCoeff();
      case Kind::Zero:
        return Scalar(0);
    }
    return Scalar(0);
  }

  /// prox_{sigma omega*}(v): the projection onto dom omega*, independent of sigma.
  void conj_prox(Scalar /*sigma*/, const Eigen::Ref<const VectorType>& v,
                 Eigen::Ref<VectorType> out) const {
    detail::check_length(v.size(), dim_, "conj_prox");
    switch (kind_) {
      case Kind::ScaledL1:
        out = v.cwiseMax(-eta_).cwiseMin(eta_);
        return;
      case Kind::MaxAffine:
        if (!projection_) {
          throw UnsupportedSpecError(
              "conj_prox: max-affine regularizer has no registered projection onto conv{w_i}");
        }
        out = projection_(VectorType(v));
        return;
      case Kind::Zero:
        out.setZero();
        return;
    }
  }

  VectorType conj_prox(Scalar sigma, const Eigen::Ref<const VectorType>& v) const {
    VectorType out(dim_);
    conj_prox(sigma, v, out);
    return out;
  }

  /// Whether v lies in dom omega*. Exact for the box and {0}; for max-affine the
  /// projection residual is compared against `tol`.
  bool in_conj_domain(const Eigen::Ref<const VectorType>& v, Scalar tol = Scalar(0)) const {
    detail::check_length(v.size(), dim_, "in_conj_domain");
    switch (kind_) {
      case Kind::ScaledL1:
        return v.template lpNorm<Eigen::Infinity>() <= eta_ + tol;
      case Kind::MaxAffine:
        return (conj_prox(Scalar(1), v) - v).norm() <= tol;
      case Kind::Zero:
        return v.template lpNorm<Eigen::Infinity>() <= tol;
    }
    return false;
  }

  /// Global Lipschitz constant K_omega.
  Scalar lipschitz() const {
    switch (kind_) {
      case Kind::ScaledL1:
        return eta_ * std::sqrt(static_cast<Scalar>(dim_));
      case Kind::MaxAffine:
        return generators_.colwise().norm().maxCoeff();
      case Kind::Zero:
        return Scalar(0);
    }
    return Scalar(0);
  }

  /// Diameter of dom omega*.
  Scalar conj_domain_diameter() const {
    switch (kind_) {
      case Kind::ScaledL1:
        return Scalar(2) * eta_ * std::sqrt(static_cast<Scalar>(dim_));
      case Kind::MaxAffine: {
        Scalar d(0);
        for (Index i = 0; i < generators_.cols(); ++i) {
          for (Index j = i + 1; j < generators_.cols(); ++j) {
            d = std::max(d, (generators_.col(i) - generators_.col(j)).norm());
          }
        }
        return d;
      }
      case Kind::Zero:
        return Scalar(0);
    }
    return Scalar(0);
  }

 private:
  Regularizer(Kind kind, Index dim) : kind_(kind), dim_(dim) {}

  Kind kind_;
  Index dim_;
  Scalar eta_{0};
  MatrixType generators_;
  Projection projection_;
};

template <typename Scalar>
Scalar omega_eval(const Regularizer<Scalar>& spec, VectorCRef<Scalar> z) {
  return spec.evaluate(z);
}

template <typename Scalar>
Vector<Scalar> conj_prox(const Regularizer<Scalar>& spec, Scalar sigma,
                         VectorCRef<Scalar> v) {
  return spec.conj_prox(sigma, v);
}

/// prox_{t ||.||_1}(v), componentwise sign(v_i) max(|v_i| - t, 0).
template <typename Derived>
auto soft_threshold(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar t) {
  using Scalar = typename Derived::Scalar;
  if (!(t > Scalar(0))) throw std::invalid_argument("soft_threshold: t must be positive");
  return v.unaryExpr([t](Scalar x) {
            const Scalar shrunk = std::max(std::abs(x) - t, Scalar(0));
            return x < Scalar(0) ? -shrunk : shrunk;
          })
      .eval();
}

/// Gradient of (1/2) dist^2(r | [-lam_box, lam_box]^n), i.e. r - clamp(r).
template <typename Derived>
auto moreau_grad_dist_box(const Eigen::MatrixBase<Derived>& r, typename Derived::Scalar lam_box) {
  using Scalar = typename Derived::Scalar;
  if (lam_box < Scalar(0)) throw std::invalid_argument("moreau_grad_dist_box: lam_box < 0");
  return (r - r.cwiseMax(-lam_box).cwiseMin(lam_box)).eval();
}

/// Inexact-prox certificate: gap < eps_abs + (rho/2) ||z - y_ref||^2.
template <typename Scalar>
bool gap_certificate(Scalar gap, Scalar eps_abs, Scalar rho,
                     VectorCRef<Scalar> z,
                     VectorCRef<Scalar> y_ref) {
  detail::check_length(z.size(), y_ref.size(), "gap_certificate");
  return gap < eps_abs + rho / Scalar(2) * (z - y_ref).squaredNorm();
}

/// Euclidean projection of v onto conv{columns of W} by enumerating every
/// subset of generators and solving the affine-hull subproblem. Exponential in
/// N; meant as a reference solver for N <= 8.
template <typename Scalar>
Vector<Scalar> exhaustive_polytope_projection(const Matrix<Scalar>& generators,
                                              const Vector<Scalar>& v) {
  const Index n_gen = generators.cols();
  const Index dim = generators.rows();
  if (n_gen < 1 || n_gen > 16) {
    throw std::invalid_argument("exhaustive_polytope_projection: need 1 <= N <= 16 generators");
  }
  detail::check_length(v.size(), dim, "exhaustive_polytope_projection");

  Vector<Scalar> best = generators.col(0);
  Scalar best_dist = (best - v).squaredNorm();
  for (std::uint32_t mask = 1; mask < (1u << n_gen); ++mask) {
    std::vector<Index> idx;
    for (Index i = 0; i < n_gen; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    const auto k = static_cast<Index>(idx.size());
    Matrix<Scalar> w(dim, k);
    for (Index c = 0; c < k; ++c) w.col(c) = generators.col(idx[c]);
    // min ||W theta - v||^2 s.t. 1^T theta = 1, via the KKT system.
    Matrix<Scalar> kkt = Matrix<Scalar>::Zero(k + 1, k + 1);
    kkt.topLeftCorner(k, k) = w.transpose() * w;
    kkt.block(0, k, k, 1).setOnes();
    kkt.block(k, 0, 1, k).setOnes();
    Vector<Scalar> rhs(k + 1);
    rhs.head(k) = w.transpose() * v;
    rhs[k] = Scalar(1);
    Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod(kkt);
    const Vector<Scalar> sol = cod.solve(rhs);
    const Vector<Scalar> theta = sol.head(k);
    if ((kkt * sol - rhs).norm() > Scalar(1e-9) * (Scalar(1) + rhs.norm())) continue;
    if (theta.minCoeff() < -Scalar(1e-12)) continue;
    const Vector<Scalar> point = w * theta;
    const Scalar dist = (point - v).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = point;
    }
  }
  return best;
}

}  // namespace iapg
