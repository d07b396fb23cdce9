#pragma once

// Matrix-free Kronecker primitives.
//
// Vectorization is column-major throughout: for x (n) and y (m),
// (x kron y)[i*m + j] = x[i]*y[j], and (X kron Y) vec(R) = vec(Y R X^T).
// An order-d coefficient vector therefore has its first Kronecker factor as
// the slowest-varying index.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qqr/errors.hpp"

namespace qqr {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// n^d with overflow detection.
Index int_pow(Index n, int d);

/// Coefficients of a homogeneous degree-d polynomial in n variables,
/// p(x) = values' * (x kron ... kron x).
class CoeffVector {
 public:
  CoeffVector() = default;
  CoeffVector(Index base_dim, int order, Vector values);

  static CoeffVector zeros(Index base_dim, int order);

  Index base_dim() const noexcept { return base_dim_; }
  int order() const noexcept { return order_; }
  const Vector& values() const noexcept { return values_; }

 private:
  Index base_dim_ = 0;
  int order_ = 0;
  Vector values_;
};

/// Limits for explicit (dense) Kronecker assembly.
struct AssemblyLimits {
  static constexpr std::size_t kDefaultMaxBytes = std::size_t{2} << 30;  // 2 GiB
  std::size_t max_bytes = kDefaultMaxBytes;
};

/// (X kron Y) v computed as vec(Y R X^T) where R = reshape(v, Y.cols(), X.cols()).
Vector kron_vec_apply(const Matrix& X, const Matrix& Y, const Vector& v);

/// out = (I_left kron X kron I_right) in, for a p x q matrix X.
///
/// `in` holds left*q*right entries, `out` left*p*right. When right == 1 the
/// whole product is a single GEMM; otherwise each of the `left` slabs is a
/// right x q matrix multiplied by X^T.
template <typename Scalar>
void kron_place_apply_into(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& X,
    Index left, Index right, std::span<const Scalar> in, std::span<Scalar> out) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index p = X.rows();
  const Index q = X.cols();
  if (left < 1 || right < 1) {
    throw ContractViolation("kron_place_apply: identity sizes must be >= 1");
  }
  if (static_cast<Index>(in.size()) != left * q * right) {
    throw ContractViolation("kron_place_apply: input length " +
                            std::to_string(in.size()) + " != " +
                            std::to_string(left * q * right));
  }
  if (static_cast<Index>(out.size()) != left * p * right) {
    throw ContractViolation("kron_place_apply: output length mismatch");
  }
  if (right == 1) {
    Eigen::Map<const Mat> V(in.data(), q, left);
    Eigen::Map<Mat> W(out.data(), p, left);
    W.noalias() = X * V;
    return;
  }
  for (Index l = 0; l < left; ++l) {
    Eigen::Map<const Mat> V(in.data() + l * q * right, right, q);
    Eigen::Map<Mat> W(out.data() + l * p * right, right, p);
    W.noalias() = V * X.transpose();
  }
}

/// (I_left kron X kron I_right) v.
Vector kron_place_apply(const Matrix& X, Index left, Index right, const Vector& v);

/// L_d(X) v = sum over the d placements of X among identity factors.
///
/// X may be p x n with p != n (e.g. N^T, which is n^2 x n); every placement
/// then maps R^{n^d} to R^{n^{d-1} p}.
Vector kron_sum_apply(const Matrix& X, int d, const Vector& v);

/// Complex variant used by the Schur-based solver.
ComplexVector kron_sum_apply(const ComplexMatrix& X, int d, const ComplexVector& v);

/// x kron x kron ... kron x (d factors).
Vector lift(const Vector& x, int d);

/// sum_d v_d' lift(x, d).
double eval_value(std::span<const CoeffVector> coeffs, const Vector& x);

/// sum_d K_d lift(x, d), where gains[i] is m x n^(i+1).
Vector eval_feedback(std::span<const Matrix> gains, const Vector& x);

/// Mode-p unfolding (p in 1..d): an n x n^(d-1) matrix with factor p on rows
/// and the remaining factors, in their original order, on columns.
Matrix unfold(const CoeffVector& v, int mode);

/// sum_p unfold(v, p). Satisfies grad(v' lift(x,d)) = unfold_sum(v) lift(x,d-1).
Matrix unfold_sum(const CoeffVector& v);

/// Permutation-symmetric part: every entry replaced by the mean over its
/// sorted-multi-index class.
CoeffVector symmetrize(const CoeffVector& v);

/// Symmetrize each row of an m x n^d gain matrix.
Matrix symmetrize_rows(const Matrix& K, Index base_dim, int order);

/// Bytes a dense rows x cols double matrix needs.
std::size_t dense_bytes(Index rows, Index cols);

/// Explicit X_1 kron X_2 kron ... (oracle / small-n path only).
Matrix kron_assemble(std::span<const Matrix> factors, const AssemblyLimits& limits = {});

/// Explicit L_d(X) + shift*I for square X.
Matrix kron_sum_assemble(const Matrix& X, int d, double shift = 0.0,
                         const AssemblyLimits& limits = {});

}  // namespace qqr
