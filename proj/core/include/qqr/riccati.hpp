#pragma once

#include <functional>

#include "qqr/kronecker.hpp"

namespace qqr {

/// Stabilizing solution of A'V + VA - V B R^{-1} B' V + Q = 0.
struct RiccatiSolution {
  Matrix V2;        // symmetric positive semidefinite
  Matrix K1;        // m x n, -R^{-1} B' V2
  Matrix Ac;        // A + B K1
  double residual = 0.0;  // ||A'V + VA - VGV + Q||_F / ||Q||_F
  bool refined = false;   // at least one Newton step was kept
  int newton_steps = 0;
};

struct RiccatiOptions {
  /// Newton refinement runs while the residual exceeds this.
  double refine_above = 1e-18;
  /// Upper bound on Newton steps; each is kept only if it lowers the residual.
  int max_newton_steps = 8;
  /// Residual beyond this (after refinement) is an accuracy error.
  double accept_below = 1e-8;
};

/// Hamiltonian ordered-Schur solution of the ARE polished by Newton steps
/// (Lyapunov solves in the closed-loop matrix), both in extended precision.
///
/// Throws ContractViolation for malformed weights, NumericalFailure when the
/// stable invariant subspace is not a graph (unstabilizable or ill-posed) or
/// the residual stays above options.accept_below.
RiccatiSolution solve_are(const Matrix& A, const Matrix& B, const Matrix& Q2, const Matrix& R2,
                          const RiccatiOptions& options = {});

/// ||A'V + VA - V B R^{-1} B' V + Q||_F / ||Q||_F.
double are_residual(const Matrix& A, const Matrix& B, const Matrix& Q2, const Matrix& R2,
                    const Matrix& V);

/// max Re(lambda(M)).
double stability_margin(const Matrix& M);

/// Complex Schur form with the eigenvalues selected by `leading` moved to the
/// top-left, reordered by adjacent Givens swaps.
void reorder_schur(ComplexMatrix& T, ComplexMatrix& U, const std::function<bool(Complex)>& leading);

}  // namespace qqr
