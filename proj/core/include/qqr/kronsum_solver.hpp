#pragma once

// Solvers for (L_d(A) + shift*I) v = c.
//
// The recursive path never assembles the n^d x n^d system: it transforms the
// right-hand side into the complex Schur basis of A, back-substitutes block by
// block (each block is an order d-1 system with a shifted diagonal), and
// transforms back. The full path assembles the system and runs dense LU; it
// exists as an oracle and for small problems.

#include <cstddef>
#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "qqr/kronecker.hpp"

namespace qqr {

/// A = transform * triangular * transform^H with transform unitary.
struct SchurForm {
  ComplexMatrix transform;
  ComplexMatrix triangular;
  double factor_norm = 0.0;  // Frobenius norm of the factored matrix
};

/// Complex Schur decomposition; throws NumericalFailure if the QR iteration
/// does not converge.
SchurForm schur_decompose(const Matrix& A);

/// Thread-safe cache of Schur forms keyed by matrix contents.
///
/// Every degree of a feedback synthesis solves with the same closed-loop
/// factor, so one factorization serves all of them.
class SchurCache {
 public:
  explicit SchurCache(std::size_t capacity = 16) : capacity_(capacity) {}

  std::shared_ptr<const SchurForm> get(const Matrix& A);
  std::size_t size() const;
  void clear();

  static SchurCache& global();

 private:
  struct Entry {
    Matrix key;
    std::shared_ptr<const SchurForm> form;
    std::size_t stamp;
  };

  mutable std::shared_mutex mutex_;
  std::unordered_multimap<std::size_t, Entry> entries_;
  std::size_t capacity_;
  std::size_t clock_ = 0;
};

/// Implicit operator L_d(factor) + shift*I of dimension n^d.
class KronSumSystem {
 public:
  KronSumSystem(Matrix factor, int order, double shift = 0.0);

  const Matrix& factor() const noexcept { return factor_; }
  int order() const noexcept { return order_; }
  double shift() const noexcept { return shift_; }
  Index dimension() const noexcept { return dimension_; }

  Vector apply(const Vector& v) const;

 private:
  Matrix factor_;
  int order_;
  double shift_;
  Index dimension_;
};

struct SolveReport {
  double residual_norm = 0.0;   // ||(L_d(A)+shift I)v - c|| / ||c||
  double min_pivot = 0.0;       // smallest |pivot| met during elimination
  int recursion_depth = 0;      // d
  double imaginary_ratio = 0.0; // ||Im v|| / ||v|| before discarding (recursive path)
  bool residual_warning = false;
};

struct KronSumSolution {
  Vector v;
  SolveReport report;
};

struct KronSumOptions {
  double residual_tolerance = 1e-10;
  double pivot_tolerance = 1e-14;  // relative to ||A||_F
  SchurCache* cache = &SchurCache::global();
};

/// Recursive blocked solve of (L_d(A) + shift I) v = c.
///
/// Throws SingularResonance if a pivot (a sum of d eigenvalues of A plus the
/// shift) falls below pivot_tolerance * ||A||_F. A residual above
/// residual_tolerance is only flagged in the report.
KronSumSolution solve_kron_sum(const Matrix& A, int d, const Vector& c, double shift = 0.0,
                               const KronSumOptions& options = {});

/// Same system, assembled explicitly and solved by LU with partial pivoting.
///
/// Throws SizeRefusal when the dense matrix would exceed limits.max_bytes and
/// SingularResonance on an exactly zero pivot.
KronSumSolution solve_full(const Matrix& A, int d, const Vector& c, double shift = 0.0,
                           const AssemblyLimits& limits = {});

/// Predicted size of the dense system solve_full would assemble.
std::size_t full_solve_bytes(Index n, int d);

}  // namespace qqr
