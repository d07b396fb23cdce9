#include "qqr/kronsum_solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>

namespace qqr {

SchurForm schur_decompose(const Matrix& A) {
  if (A.rows() != A.cols()) {
    throw ContractViolation("schur_decompose: matrix must be square");
  }
  if (!A.allFinite()) {
    throw ContractViolation("schur_decompose: non-finite entries");
  }
  const ComplexMatrix Ac = A.cast<Complex>();
  Eigen::ComplexSchur<ComplexMatrix> schur(A.rows());
  schur.compute(Ac, true);
  if (schur.info() != Eigen::Success) {
    throw NumericalFailure("schur_decompose: QR iteration did not converge within " +
                           std::to_string(schur.getMaxIterations()) + " iterations");
  }
  SchurForm form;
  form.transform = schur.matrixU();
  form.triangular = schur.matrixT();
  form.triangular.triangularView<Eigen::StrictlyLower>().setZero();
  form.factor_norm = A.norm();
  return form;
}

namespace {

std::size_t hash_matrix(const Matrix& A) {
  std::size_t h = std::hash<Index>{}(A.rows()) ^ (std::hash<Index>{}(A.cols()) << 1);
  for (Index i = 0; i < A.size(); ++i) {
    h ^= std::hash<double>{}(A.data()[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::equal(a.data(), a.data() + a.size(), b.data());
}

}  // namespace

std::shared_ptr<const SchurForm> SchurCache::get(const Matrix& A) {
  const std::size_t h = hash_matrix(A);
  {
    std::shared_lock lock(mutex_);
    auto [lo, hi] = entries_.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
      if (same_matrix(it->second.key, A)) {
        return it->second.form;
      }
    }
  }
  auto form = std::make_shared<const SchurForm>(schur_decompose(A));
  std::unique_lock lock(mutex_);
  auto [lo, hi] = entries_.equal_range(h);
  for (auto it = lo; it != hi; ++it) {
    if (same_matrix(it->second.key, A)) {
      return it->second.form;
    }
  }
  if (capacity_ > 0 && entries_.size() >= capacity_) {
    auto oldest = std::min_element(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
      return a.second.stamp < b.second.stamp;
    });
    entries_.erase(oldest);
  }
  if (capacity_ > 0) {
    entries_.emplace(h, Entry{A, form, clock_++});
  }
  return form;
}

std::size_t SchurCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void SchurCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
}

SchurCache& SchurCache::global() {
  static SchurCache cache;
  return cache;
}

KronSumSystem::KronSumSystem(Matrix factor, int order, double shift)
    : factor_(std::move(factor)), order_(order), shift_(shift) {
  if (factor_.rows() != factor_.cols()) {
    throw ContractViolation("KronSumSystem: factor must be square");
  }
  if (order_ < 1) {
    throw ContractViolation("KronSumSystem: order must be >= 1");
  }
  dimension_ = int_pow(factor_.rows(), order_);
}

Vector KronSumSystem::apply(const Vector& v) const {
  Vector out = kron_sum_apply(factor_, order_, v);
  out += shift_ * v;
  return out;
}

namespace {

double relative_residual(const Matrix& A, int d, double shift, const Vector& v, const Vector& c) {
  const double cn = c.norm();
  const Vector r = KronSumSystem(A, d, shift).apply(v) - c;
  return cn > 0.0 ? r.norm() / cn : r.norm();
}

class BackSubstitution {
 public:
  BackSubstitution(const ComplexMatrix& T, double tolerance) : T_(T), tol_(tolerance) {}

  // Solves (L_d(T) + shift I) z = y in place; y has n^d entries.
  void solve(int d, Complex shift, Complex* y, Index len) {
    const Index n = T_.rows();
    if (d == 1) {
      for (Index i = n - 1; i >= 0; --i) {
        Complex s = y[i];
        for (Index j = i + 1; j < n; ++j) {
          s -= T_(i, j) * y[j];
        }
        y[i] = s / pivot(T_(i, i) + shift);
      }
      return;
    }
    // Slowest factor: block (i, j) of L_d(T) is T(i,j) I + [i == j] L_{d-1}(T).
    const Index m = len / n;
    Eigen::Map<ComplexMatrix> Y(y, m, n);
    for (Index i = n - 1; i >= 0; --i) {
      const Index done = n - 1 - i;
      if (done > 0) {
        Y.col(i).noalias() -= Y.rightCols(done) * T_.row(i).tail(done).transpose();
      }
      solve(d - 1, shift + T_(i, i), Y.col(i).data(), m);
    }
  }

  double min_pivot() const noexcept { return min_pivot_; }

 private:
  Complex pivot(Complex p) {
    const double a = std::abs(p);
    min_pivot_ = std::min(min_pivot_, a);
    if (!(a > tol_)) {
      char msg[96];
      std::snprintf(msg, sizeof(msg), "solve_kron_sum: eigenvalue sum resonance, |pivot| = %.3g <= %.3g", a,
                    tol_);
      throw SingularResonance(msg, a);
    }
    return p;
  }

  const ComplexMatrix& T_;
  double tol_;
  double min_pivot_ = std::numeric_limits<double>::infinity();
};

// buffer <- (X kron X kron ... kron X) buffer, one mode multiplication per factor.
void transform_all_modes(const ComplexMatrix& X, int d, ComplexVector& buffer, ComplexVector& scratch) {
  const Index n = X.rows();
  for (int pos = 0; pos < d; ++pos) {
    kron_place_apply_into<Complex>(X, int_pow(n, pos), int_pow(n, d - 1 - pos),
                                   std::span<const Complex>(buffer.data(), buffer.size()),
                                   std::span<Complex>(scratch.data(), scratch.size()));
    buffer.swap(scratch);
  }
}

}  // namespace

KronSumSolution solve_kron_sum(const Matrix& A, int d, const Vector& c, double shift,
                               const KronSumOptions& options) {
  if (A.rows() != A.cols()) {
    throw ContractViolation("solve_kron_sum: factor must be square");
  }
  if (d < 1) {
    throw ContractViolation("solve_kron_sum: order must be >= 1");
  }
  const Index n = A.rows();
  const Index len = int_pow(n, d);
  if (c.size() != len) {
    throw ContractViolation("solve_kron_sum: right-hand side length " + std::to_string(c.size()) +
                            " != " + std::to_string(len));
  }

  std::shared_ptr<const SchurForm> form;
  if (options.cache != nullptr) {
    form = options.cache->get(A);
  } else {
    form = std::make_shared<const SchurForm>(schur_decompose(A));
  }

  ComplexVector buffer = c.cast<Complex>();
  ComplexVector scratch(len);
  const ComplexMatrix Uh = form->transform.adjoint();
  transform_all_modes(Uh, d, buffer, scratch);

  BackSubstitution sub(form->triangular, options.pivot_tolerance * form->factor_norm);
  sub.solve(d, Complex(shift, 0.0), buffer.data(), len);

  transform_all_modes(form->transform, d, buffer, scratch);

  KronSumSolution out;
  out.v = buffer.real();
  const double vn = out.v.norm();
  const double im = buffer.imag().norm();
  out.report.imaginary_ratio = vn > 0.0 ? im / vn : im;
  out.report.min_pivot = sub.min_pivot();
  out.report.recursion_depth = d;
  out.report.residual_norm = relative_residual(A, d, shift, out.v, c);
  out.report.residual_warning = !(out.report.residual_norm <= options.residual_tolerance);
  return out;
}

std::size_t full_solve_bytes(Index n, int d) {
  const Index dim = int_pow(n, d);
  return dense_bytes(dim, dim);
}

KronSumSolution solve_full(const Matrix& A, int d, const Vector& c, double shift,
                           const AssemblyLimits& limits) {
  if (A.rows() != A.cols()) {
    throw ContractViolation("solve_full: factor must be square");
  }
  if (d < 1) {
    throw ContractViolation("solve_full: order must be >= 1");
  }
  const Index len = int_pow(A.rows(), d);
  if (c.size() != len) {
    throw ContractViolation("solve_full: right-hand side length mismatch");
  }
  Matrix L = kron_sum_assemble(A, d, shift, limits);

  // In-place factorization: peak storage stays at one dense copy.
  Eigen::PartialPivLU<Eigen::Ref<Matrix>> lu(L);
  const double min_pivot = L.diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > 0.0)) {
    throw SingularResonance("solve_full: assembled system is singular (zero pivot)", min_pivot);
  }

  // Two fixed-precision refinement steps: on non-normal factors the plain
  // LU solution loses two to three digits that the residual does not show.
  KronSumSolution out;
  out.v = lu.solve(c);
  const KronSumSystem op(A, d, shift);
  for (int step = 0; step < 2; ++step) {
    out.v += lu.solve(c - op.apply(out.v));
  }
  L.resize(0, 0);
  out.report.min_pivot = min_pivot;
  out.report.recursion_depth = d;
  out.report.residual_norm = relative_residual(A, d, shift, out.v, c);
  out.report.residual_warning = !(out.report.residual_norm <= 1e-10);
  return out;
}

}  // namespace qqr
