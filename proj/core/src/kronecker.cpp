#include "qqr/kronecker.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace qqr {

Index int_pow(Index n, int d) {
  if (n < 0 || d < 0) {
    throw ContractViolation("int_pow: negative argument");
  }
  Index r = 1;
  for (int i = 0; i < d; ++i) {
    if (n != 0 && r > std::numeric_limits<Index>::max() / n) {
      throw ContractViolation("int_pow: " + std::to_string(n) + "^" +
                              std::to_string(d) + " overflows");
    }
    r *= n;
  }
  return r;
}

CoeffVector::CoeffVector(Index base_dim, int order, Vector values)
    : base_dim_(base_dim), order_(order), values_(std::move(values)) {
  if (base_dim < 1 || order < 1) {
    throw ContractViolation("CoeffVector: base_dim and order must be >= 1");
  }
  if (values_.size() != int_pow(base_dim, order)) {
    throw ContractViolation("CoeffVector: length " + std::to_string(values_.size()) +
                            " != " + std::to_string(base_dim) + "^" +
                            std::to_string(order));
  }
  if (!values_.allFinite()) {
    throw ContractViolation("CoeffVector: non-finite entries");
  }
}

CoeffVector CoeffVector::zeros(Index base_dim, int order) {
  return CoeffVector(base_dim, order, Vector::Zero(int_pow(base_dim, order)));
}

Vector kron_vec_apply(const Matrix& X, const Matrix& Y, const Vector& v) {
  if (v.size() != X.cols() * Y.cols()) {
    throw ContractViolation("kron_vec_apply: vector length " + std::to_string(v.size()) +
                            " != " + std::to_string(X.cols() * Y.cols()));
  }
  Eigen::Map<const Matrix> R(v.data(), Y.cols(), X.cols());
  Matrix out = Y * R * X.transpose();
  return Eigen::Map<const Vector>(out.data(), out.size());
}

Vector kron_place_apply(const Matrix& X, Index left, Index right, const Vector& v) {
  Vector out(left * X.rows() * right);
  kron_place_apply_into<double>(X, left, right, std::span<const double>(v.data(), v.size()),
                                std::span<double>(out.data(), out.size()));
  return out;
}

namespace {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> kron_sum_apply_impl(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& X, int d,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (d < 1) {
    throw ContractViolation("kron_sum_apply: order must be >= 1");
  }
  const Index n = X.cols();
  const Index p = X.rows();
  if (v.size() != int_pow(n, d)) {
    throw ContractViolation("kron_sum_apply: vector length " + std::to_string(v.size()) +
                            " != " + std::to_string(n) + "^" + std::to_string(d));
  }
  const Index out_len = int_pow(n, d - 1) * p;
  Vec out = Vec::Zero(out_len);
  Vec term(out_len);
  // Fixed summation order keeps results bit-reproducible.
  for (int pos = 0; pos < d; ++pos) {
    const Index left = int_pow(n, pos);
    const Index right = int_pow(n, d - 1 - pos);
    if (left * p * right != out_len) {
      throw ContractViolation("kron_sum_apply: inconsistent placement output lengths");
    }
    kron_place_apply_into<Scalar>(X, left, right,
                                  std::span<const Scalar>(v.data(), v.size()),
                                  std::span<Scalar>(term.data(), term.size()));
    out += term;
  }
  return out;
}

}  // namespace

Vector kron_sum_apply(const Matrix& X, int d, const Vector& v) {
  return kron_sum_apply_impl<double>(X, d, v);
}

ComplexVector kron_sum_apply(const ComplexMatrix& X, int d, const ComplexVector& v) {
  return kron_sum_apply_impl<Complex>(X, d, v);
}

Vector lift(const Vector& x, int d) {
  if (d < 1) {
    throw ContractViolation("lift: order must be >= 1");
  }
  const Index n = x.size();
  Vector out = x;
  for (int k = 1; k < d; ++k) {
    Vector next(out.size() * n);
    for (Index i = 0; i < out.size(); ++i) {
      next.segment(i * n, n) = out[i] * x;
    }
    out = std::move(next);
  }
  return out;
}

double eval_value(std::span<const CoeffVector> coeffs, const Vector& x) {
  double total = 0.0;
  for (const auto& v : coeffs) {
    if (v.base_dim() != x.size()) {
      throw ContractViolation("eval_value: coefficient base_dim " +
                              std::to_string(v.base_dim()) + " != state size " +
                              std::to_string(x.size()));
    }
    total += v.values().dot(lift(x, v.order()));
  }
  return total;
}

Vector eval_feedback(std::span<const Matrix> gains, const Vector& x) {
  if (gains.empty()) {
    throw ContractViolation("eval_feedback: no gains");
  }
  const Index m = gains.front().rows();
  Vector u = Vector::Zero(m);
  Vector power = x;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (i > 0) {
      power = lift(x, static_cast<int>(i) + 1);
    }
    const Matrix& K = gains[i];
    if (K.rows() != m || K.cols() != power.size()) {
      throw ContractViolation("eval_feedback: gain " + std::to_string(i + 1) + " is " +
                              std::to_string(K.rows()) + "x" + std::to_string(K.cols()) +
                              ", expected " + std::to_string(m) + "x" +
                              std::to_string(power.size()));
    }
    u.noalias() += K * power;
  }
  return u;
}

Matrix unfold(const CoeffVector& v, int mode) {
  const int d = v.order();
  const Index n = v.base_dim();
  if (mode < 1 || mode > d) {
    throw ContractViolation("unfold: mode out of range");
  }
  // Column-major view (fast, mode, slow) = (factors mode+1..d, factor mode, factors 1..mode-1).
  const Index fast = int_pow(n, d - mode);
  const Index slow = int_pow(n, mode - 1);
  Matrix out(n, fast * slow);
  for (Index s = 0; s < slow; ++s) {
    Eigen::Map<const Matrix> block(v.values().data() + s * n * fast, fast, n);
    out.middleCols(s * fast, fast) = block.transpose();
  }
  return out;
}

Matrix unfold_sum(const CoeffVector& v) {
  Matrix total = unfold(v, 1);
  for (int p = 2; p <= v.order(); ++p) {
    total += unfold(v, p);
  }
  return total;
}

namespace {

// Maps every linear index of an order-d array to the linear index of its
// sorted multi-index.
std::vector<Index> canonical_indices(Index n, int d) {
  const Index len = int_pow(n, d);
  std::vector<Index> canon(static_cast<std::size_t>(len));
  std::vector<Index> digits(static_cast<std::size_t>(d));
  for (Index lin = 0; lin < len; ++lin) {
    Index rem = lin;
    for (int k = d - 1; k >= 0; --k) {
      digits[static_cast<std::size_t>(k)] = rem % n;
      rem /= n;
    }
    std::sort(digits.begin(), digits.end());
    Index c = 0;
    for (Index digit : digits) {
      c = c * n + digit;
    }
    canon[static_cast<std::size_t>(lin)] = c;
  }
  return canon;
}

Vector symmetrize_values(const Vector& values, const std::vector<Index>& canon) {
  const Index len = values.size();
  Vector sums = Vector::Zero(len);
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(len);
  for (Index i = 0; i < len; ++i) {
    const Index c = canon[static_cast<std::size_t>(i)];
    sums[c] += values[i];
    counts[c] += 1;
  }
  Vector out(len);
  for (Index i = 0; i < len; ++i) {
    const Index c = canon[static_cast<std::size_t>(i)];
    out[i] = sums[c] / counts[c];
  }
  return out;
}

}  // namespace

CoeffVector symmetrize(const CoeffVector& v) {
  const auto canon = canonical_indices(v.base_dim(), v.order());
  return CoeffVector(v.base_dim(), v.order(), symmetrize_values(v.values(), canon));
}

Matrix symmetrize_rows(const Matrix& K, Index base_dim, int order) {
  if (K.cols() != int_pow(base_dim, order)) {
    throw ContractViolation("symmetrize_rows: column count is not n^d");
  }
  const auto canon = canonical_indices(base_dim, order);
  Matrix out(K.rows(), K.cols());
  for (Index r = 0; r < K.rows(); ++r) {
    out.row(r) = symmetrize_values(K.row(r).transpose(), canon).transpose();
  }
  return out;
}

std::size_t dense_bytes(Index rows, Index cols) {
  const long double bytes = static_cast<long double>(rows) * static_cast<long double>(cols) *
                            static_cast<long double>(sizeof(double));
  if (bytes > static_cast<long double>(std::numeric_limits<std::size_t>::max())) {
    return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(bytes);
}

namespace {

void check_cap(Index rows, Index cols, const AssemblyLimits& limits, const char* who) {
  const std::size_t bytes = dense_bytes(rows, cols);
  if (bytes > limits.max_bytes) {
    throw SizeRefusal(std::string(who) + ": dense " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " matrix needs " + std::to_string(bytes) +
                          " bytes, cap is " + std::to_string(limits.max_bytes),
                      bytes, limits.max_bytes);
  }
}

}  // namespace

Matrix kron_assemble(std::span<const Matrix> factors, const AssemblyLimits& limits) {
  if (factors.empty()) {
    throw ContractViolation("kron_assemble: no factors");
  }
  Index rows = 1, cols = 1;
  for (const auto& f : factors) {
    rows *= f.rows();
    cols *= f.cols();
  }
  check_cap(rows, cols, limits, "kron_assemble");
  Matrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) {
    const Matrix& f = factors[k];
    Matrix next(out.rows() * f.rows(), out.cols() * f.cols());
    for (Index j = 0; j < out.cols(); ++j) {
      for (Index i = 0; i < out.rows(); ++i) {
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = out(i, j) * f;
      }
    }
    out = std::move(next);
  }
  return out;
}

Matrix kron_sum_assemble(const Matrix& X, int d, double shift, const AssemblyLimits& limits) {
  if (X.rows() != X.cols()) {
    throw ContractViolation("kron_sum_assemble: factor must be square");
  }
  if (d < 1) {
    throw ContractViolation("kron_sum_assemble: order must be >= 1");
  }
  const Index n = X.rows();
  const Index dim = int_pow(n, d);
  check_cap(dim, dim, limits, "kron_sum_assemble");
  Matrix L = Matrix::Zero(dim, dim);
  for (int pos = 0; pos < d; ++pos) {
    const Index left = int_pow(n, pos);
    const Index right = int_pow(n, d - 1 - pos);
    for (Index a = 0; a < left; ++a) {
      for (Index k = 0; k < n; ++k) {
        for (Index r = 0; r < n; ++r) {
          const double x = X(r, k);
          if (x == 0.0) continue;
          const Index row0 = (a * n + r) * right;
          const Index col0 = (a * n + k) * right;
          for (Index b = 0; b < right; ++b) {
            L(row0 + b, col0 + b) += x;
          }
        }
      }
    }
  }
  L.diagonal().array() += shift;
  return L;
}

}  // namespace qqr
