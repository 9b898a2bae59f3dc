#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace iapg {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Read-only vector argument; non-deduced so that Scalar comes from the other arguments.
template <typename Scalar>
using VectorCRef = std::type_identity_t<const Eigen::Ref<const Vector<Scalar>>&>;

namespace detail {

inline void check_length(Index got, Index expected, const char* what) {
  if (got != expected) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (got " +
                                std::to_string(got) + ", expected " + std::to_string(expected) +
                                ")");
  }
}

}  // namespace detail

/// Immutable matrix-free linear map R^cols -> R^rows.
///
/// Copies share the underlying node, so an operator is cheap to pass by value
/// and safe to apply concurrently from several threads.
template <typename Scalar>
class LinearOperator {
 public:
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;
  using SparseType = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

  enum class Kind { Dense, SparseTriplet, ForwardDifference, BoxBlur, Identity, Scaled, Sum };

  static LinearOperator dense(MatrixType m) {
    if (m.rows() < 1 || m.cols() < 1) throw std::invalid_argument("dense: empty matrix");
    const Index r = m.rows(), c = m.cols();
    return LinearOperator(r, c, DenseNode{std::move(m)});
  }

  static LinearOperator sparse(Index rows, Index cols,
                               const std::vector<Eigen::Triplet<Scalar>>& triplets) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("sparse: empty shape");
    SparseType s(rows, cols);
    s.setFromTriplets(triplets.begin(), triplets.end());
    s.makeCompressed();
    return LinearOperator(rows, cols, SparseNode{std::move(s)});
  }

  static LinearOperator forward_difference(Index n) {
    if (n < 2) throw std::invalid_argument("forward_difference: n must be >= 2");
    return LinearOperator(n - 1, n, ForwardDifferenceNode{});
  }

  static LinearOperator box_blur(Index n, Index width) {
    if (n < 1 || width < 1 || width > n) {
      throw std::invalid_argument("box_blur: window width must satisfy 1 <= l <= n");
    }
    return LinearOperator(n, n, BoxBlurNode{width});
  }

  static LinearOperator identity(Index n) {
    if (n < 1) throw std::invalid_argument("identity: n must be >= 1");
    return LinearOperator(n, n, IdentityNode{});
  }

  static LinearOperator scaled(Scalar factor, LinearOperator op) {
    const Index r = op.rows(), c = op.cols();
    return LinearOperator(r, c, ScaledNode{factor, std::move(op)});
  }

  static LinearOperator sum(LinearOperator a, LinearOperator b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      throw std::invalid_argument("sum: summands must have identical shapes");
    }
    const Index r = a.rows(), c = a.cols();
    return LinearOperator(r, c, SumNode{std::move(a), std::move(b)});
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Kind kind() const { return static_cast<Kind>(node_->index()); }

  /// out = op * x. `out` must not alias `x`.
  void apply(const Eigen::Ref<const VectorType>& x, Eigen::Ref<VectorType> out) const {
    detail::check_length(x.size(), cols_, "apply");
    detail::check_length(out.size(), rows_, "apply output");
    std::visit([&](const auto& n) { apply_node(n, x, out); }, *node_);
  }

  /// out = op^T * y. `out` must not alias `y`.
  void apply_adjoint(const Eigen::Ref<const VectorType>& y, Eigen::Ref<VectorType> out) const {
    detail::check_length(y.size(), rows_, "apply_adjoint");
    detail::check_length(out.size(), cols_, "apply_adjoint output");
    std::visit([&](const auto& n) { adjoint_node(n, y, out); }, *node_);
  }

  VectorType apply(const Eigen::Ref<const VectorType>& x) const {
    VectorType out(rows_);
    apply(x, out);
    return out;
  }

  VectorType apply_adjoint(const Eigen::Ref<const VectorType>& y) const {
    VectorType out(cols_);
    apply_adjoint(y, out);
    return out;
  }

  /// Materializes the operator column by column. Intended for tests and small oracles.
  MatrixType to_dense() const {
    MatrixType m(rows_, cols_);
    VectorType e = VectorType::Zero(cols_);
    for (Index j = 0; j < cols_; ++j) {
      e[j] = Scalar(1);
      m.col(j) = apply(e);
      e[j] = Scalar(0);
    }
    return m;
  }

  /// Window half-width w(t) of a box-blur row, t 1-indexed. Zero for other kinds.
  Index blur_half_width(Index t) const {
    const auto* b = std::get_if<BoxBlurNode>(node_.get());
    if (b == nullptr) return 0;
    return std::min({t - 1, b->width, rows_ - t});
  }

 private:
  struct DenseNode {
    MatrixType m;
  };
  struct SparseNode {
    SparseType m;
  };
  struct ForwardDifferenceNode {};
  struct BoxBlurNode {
    Index width;
  };
  struct IdentityNode {};
  struct ScaledNode {
    Scalar factor;
    LinearOperator op;
  };
  struct SumNode {
    LinearOperator a;
    LinearOperator b;
  };
  // Alternative order matches Kind.
  using Node = std::variant<DenseNode, SparseNode, ForwardDifferenceNode, BoxBlurNode,
                            IdentityNode, ScaledNode, SumNode>;

  template <typename N>
  LinearOperator(Index rows, Index cols, N node)
      : rows_(rows), cols_(cols), node_(std::make_shared<const Node>(std::move(node))) {}

  using In = Eigen::Ref<const VectorType>;
  using Out = Eigen::Ref<VectorType>;

  void apply_node(const DenseNode& n, const In& x, Out out) const { out.noalias() = n.m * x; }
  void adjoint_node(const DenseNode& n, const In& y, Out out) const {
    out.noalias() = n.m.transpose() * y;
  }

  void apply_node(const SparseNode& n, const In& x, Out out) const { out.noalias() = n.m * x; }
  void adjoint_node(const SparseNode& n, const In& y, Out out) const {
    out.noalias() = n.m.transpose() * y;
  }

  void apply_node(const ForwardDifferenceNode&, const In& x, Out out) const {
    for (Index i = 0; i < rows_; ++i) out[i] = x[i + 1] - x[i];
  }
  void adjoint_node(const ForwardDifferenceNode&, const In& y, Out out) const {
    const Index m = rows_;
    out[0] = -y[0];
    for (Index i = 1; i < m; ++i) out[i] = y[i - 1] - y[i];
    out[m] = y[m - 1];
  }

  // Row t (1-indexed) averages x over [t - w, t + w] with weight 1/(2w); rows
  // with w = 0 copy x_t.
  void apply_node(const BoxBlurNode& b, const In& x, Out out) const {
    const Index n = rows_;
    for (Index t = 1; t <= n; ++t) {
      const Index w = std::min({t - 1, b.width, n - t});
      if (w == 0) {
        out[t - 1] = x[t - 1];
        continue;
      }
      Scalar acc(0);
      for (Index i = t - w; i <= t + w; ++i) acc += x[i - 1];
      out[t - 1] = acc / Scalar(2 * w);
    }
  }
  void adjoint_node(const BoxBlurNode& b, const In& y, Out out) const {
    const Index n = rows_;
    out.setZero();
    for (Index t = 1; t <= n; ++t) {
      const Index w = std::min({t - 1, b.width, n - t});
      if (w == 0) {
        out[t - 1] += y[t - 1];
        continue;
      }
      const Scalar c = y[t - 1] / Scalar(2 * w);
      for (Index i = t - w; i <= t + w; ++i) out[i - 1] += c;
    }
  }

  void apply_node(const IdentityNode&, const In& x, Out out) const { out = x; }
  void adjoint_node(const IdentityNode&, const In& y, Out out) const { out = y; }

  void apply_node(const ScaledNode& s, const In& x, Out out) const {
    s.op.apply(x, out);
    out *= s.factor;
  }
  void adjoint_node(const ScaledNode& s, const In& y, Out out) const {
    s.op.apply_adjoint(y, out);
    out *= s.factor;
  }

  void apply_node(const SumNode& s, const In& x, Out out) const {
    VectorType tmp(rows_);
    s.a.apply(x, out);
    s.b.apply(x, tmp);
    out += tmp;
  }
  void adjoint_node(const SumNode& s, const In& y, Out out) const {
    VectorType tmp(cols_);
    s.a.apply_adjoint(y, out);
    s.b.apply_adjoint(y, tmp);
    out += tmp;
  }

  Index rows_;
  Index cols_;
  std::shared_ptr<const Node> node_;
};

template <typename Scalar>
LinearOperator<Scalar> operator+(LinearOperator<Scalar> a, LinearOperator<Scalar> b) {
  return LinearOperator<Scalar>::sum(std::move(a), std::move(b));
}

template <typename Scalar>
LinearOperator<Scalar> operator*(Scalar factor, LinearOperator<Scalar> op) {
  return LinearOperator<Scalar>::scaled(factor, std::move(op));
}

template <typename Scalar = double>
LinearOperator<Scalar> forward_difference(Index n) {
  return LinearOperator<Scalar>::forward_difference(n);
}

template <typename Scalar = double>
LinearOperator<Scalar> box_blur(Index n, Index width) {
  return LinearOperator<Scalar>::box_blur(n, width);
}

template <typename Scalar = double>
LinearOperator<Scalar> identity(Index n) {
  return LinearOperator<Scalar>::identity(n);
}

/// Random sparse m x n operator: each entry is independently nonzero with
/// probability 1/sqrt(mn), nonzeros uniform on [0, 1]. Deterministic in `seed`.
template <typename Scalar = double>
LinearOperator<Scalar> random_sparse(Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("random_sparse: m, n must be >= 1");
  std::mt19937_64 rng(seed);
  const double p = 1.0 / std::sqrt(static_cast<double>(m) * static_cast<double>(n));
  std::bernoulli_distribution keep(p);
  std::uniform_real_distribution<double> value(0.0, 1.0);
  std::vector<Eigen::Triplet<Scalar>> triplets;
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (keep(rng)) triplets.emplace_back(i, j, static_cast<Scalar>(value(rng)));
    }
  }
  return LinearOperator<Scalar>::sparse(m, n, triplets);
}

template <typename Scalar>
struct NormEstimate {
  Scalar value{0};
  int iterations{0};
  bool converged{false};
};

/// Power iteration on A^T A. Stops when the relative change of the Rayleigh
/// quotient drops to `tol`; otherwise returns the best quotient seen with
/// `converged == false`. A zero operator yields 0.
template <typename Scalar>
NormEstimate<Scalar> estimate_op_norm_sq(const LinearOperator<Scalar>& op, int max_iters = 5000,
                                         Scalar tol = Scalar(1e-10), std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector<Scalar> x(op.cols());
  for (Index i = 0; i < x.size(); ++i) x[i] = static_cast<Scalar>(normal(rng));
  x.normalize();
  Vector<Scalar> ax(op.rows());
  Vector<Scalar> atax(op.cols());

  NormEstimate<Scalar> est;
  Scalar previous(0);
  for (int it = 1; it <= max_iters; ++it) {
    op.apply(x, ax);
    const Scalar quotient = ax.squaredNorm();  // x has unit norm
    est.iterations = it;
    if (quotient > est.value) est.value = quotient;
    if (quotient == Scalar(0)) {
      est.value = Scalar(0);
      est.converged = true;
      return est;
    }
    if (it > 1 && std::abs(quotient - previous) <= tol * quotient) {
      est.converged = true;
      return est;
    }
    previous = quotient;
    op.apply_adjoint(ax, atax);
    const Scalar norm = atax.norm();
    if (norm == Scalar(0)) {
      est.converged = true;
      return est;
    }
    x = atax / norm;
  }
  return est;
}

/// Estimated squared operator norm ||A^T A|| = ||A||^2.
template <typename Scalar>
Scalar op_norm_sq(const LinearOperator<Scalar>& op, int max_iters = 5000,
                  Scalar tol = Scalar(1e-10), std::uint64_t seed = 0) {
  return estimate_op_norm_sq(op, max_iters, tol, seed).value;
}

}  // namespace iapg
