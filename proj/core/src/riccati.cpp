#include "qqr/riccati.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>

#include "qqr/kronsum_solver.hpp"

namespace qqr {

namespace {

// The Hamiltonian Schur form and the Newton polish run in extended precision:
// random instances routinely have ||V2|| ~ 1e6..1e9, where double-precision
// subspace and Lyapunov errors sit two to three decades above the rounding
// floor of V2 itself.
using LReal = long double;
using LComplex = std::complex<LReal>;
using LMatrix = Eigen::Matrix<LReal, Eigen::Dynamic, Eigen::Dynamic>;
using LComplexMatrix = Eigen::Matrix<LComplex, Eigen::Dynamic, Eigen::Dynamic>;

// Swaps diagonal entries k and k+1 of upper-triangular T by a Givens rotation
// whose first column is the eigenvector of the 2x2 block for T(k+1,k+1).
template <class CM>
void swap_adjacent(CM& T, CM& U, Index k) {
  using C = typename CM::Scalar;
  const C t11 = T(k, k);
  const C t22 = T(k + 1, k + 1);
  const C x0 = T(k, k + 1);
  const C x1 = t22 - t11;
  const auto nrm = std::hypot(std::abs(x0), std::abs(x1));
  if (nrm == 0) {
    return;
  }
  const C c = x0 / nrm;
  const C s = x1 / nrm;
  Eigen::Matrix<C, 2, 2> G;
  G << c, -std::conj(s), s, std::conj(c);
  T.middleRows(k, 2) = G.adjoint() * T.middleRows(k, 2);
  T.middleCols(k, 2) = T.middleCols(k, 2) * G;
  U.middleCols(k, 2) = U.middleCols(k, 2) * G;
  T(k + 1, k) = C(0);
}

template <class CM, class Pred>
void reorder(CM& T, CM& U, const Pred& leading) {
  const Index size = T.rows();
  Index placed = 0;
  for (Index j = 0; j < size; ++j) {
    if (!leading(T(j, j))) continue;
    for (Index k = j - 1; k >= placed; --k) {
      swap_adjacent(T, U, k);
    }
    ++placed;
  }
}

LMatrix riccati_map(const LMatrix& A, const LMatrix& G, const LMatrix& Q, const LMatrix& V) {
  return A.transpose() * V + V * A - V * G * V + Q;
}

// Solves Ac' X + X Ac = C by complex Bartels-Stewart. With Ac = U T U* and
// Y = U' X U the equation becomes T' Y + Y T = U' C U, solved column by column
// with forward substitution (T' is lower triangular).
LMatrix lyapunov(const LMatrix& Ac, const LMatrix& C) {
  const Index n = Ac.rows();
  Eigen::ComplexSchur<LComplexMatrix> schur(Ac.cast<LComplex>());
  if (schur.info() != Eigen::Success) {
    throw NumericalFailure("solve_are: closed-loop Schur iteration did not converge");
  }
  const LComplexMatrix& T = schur.matrixT();
  const LComplexMatrix& U = schur.matrixU();
  const LComplexMatrix F = U.transpose() * C.cast<LComplex>() * U;
  LComplexMatrix Y(n, n);
  for (Index j = 0; j < n; ++j) {
    LComplexMatrix rhs = F.col(j);
    if (j > 0) rhs -= Y.leftCols(j) * T.col(j).head(j);
    for (Index i = 0; i < n; ++i) {
      LComplex acc = rhs(i, 0);
      for (Index k = 0; k < i; ++k) acc -= T(k, i) * Y(k, j);
      const LComplex pivot = T(i, i) + T(j, j);
      if (pivot == LComplex(0)) {
        throw SingularResonance("solve_are: closed loop has eigenvalues summing to zero",
                                0.0);
      }
      Y(i, j) = acc / pivot;
    }
  }
  return (U.conjugate() * Y * U.adjoint()).real();
}

void check_square(const Matrix& M, Index n, const char* name) {
  if (M.rows() != n || M.cols() != n) {
    throw ContractViolation(std::string("solve_are: ") + name + " must be " + std::to_string(n) +
                            "x" + std::to_string(n));
  }
}

double symmetry_defect(const Matrix& M) {
  const double nrm = M.norm();
  return nrm > 0.0 ? (M - M.transpose()).norm() / nrm : 0.0;
}

}  // namespace

void reorder_schur(ComplexMatrix& T, ComplexMatrix& U, const std::function<bool(Complex)>& leading) {
  reorder(T, U, leading);
}

double stability_margin(const Matrix& M) {
  if (M.rows() != M.cols()) {
    throw ContractViolation("stability_margin: matrix must be square");
  }
  if (M.size() == 0) {
    throw ContractViolation("stability_margin: empty matrix");
  }
  Eigen::EigenSolver<Matrix> es(M, false);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("stability_margin: eigenvalue iteration did not converge within " +
                           std::to_string(es.getMaxIterations() * M.rows()) + " iterations");
  }
  return es.eigenvalues().real().maxCoeff();
}

double are_residual(const Matrix& A, const Matrix& B, const Matrix& Q2, const Matrix& R2,
                    const Matrix& V) {
  Eigen::LLT<Matrix> llt(R2);
  const Matrix W = llt.matrixL().solve(B.transpose());  // L^{-1} B'
  const Matrix WV = W * V;
  const Matrix res = A.transpose() * V + V * A - WV.transpose() * WV + Q2;
  const double qn = Q2.norm();
  return qn > 0.0 ? res.norm() / qn : res.norm();
}

RiccatiSolution solve_are(const Matrix& A, const Matrix& B, const Matrix& Q2, const Matrix& R2,
                          const RiccatiOptions& options) {
  const Index n = A.rows();
  check_square(A, n, "A");
  check_square(Q2, n, "Q2");
  if (B.rows() != n || B.cols() < 1) {
    throw ContractViolation("solve_are: B must have " + std::to_string(n) + " rows");
  }
  const Index m = B.cols();
  check_square(R2, m, "R2");
  if (symmetry_defect(R2) > 1e-12 || symmetry_defect(Q2) > 1e-12) {
    throw ContractViolation("solve_are: Q2 and R2 must be symmetric");
  }
  Eigen::LLT<Matrix> llt(R2);
  if (llt.info() != Eigen::Success) {
    throw ContractViolation("solve_are: R2 is not positive definite");
  }
  const double q_min = Eigen::SelfAdjointEigenSolver<Matrix>(Q2, Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .minCoeff();
  if (q_min < -1e-12 * std::max(1.0, Q2.norm())) {
    throw ContractViolation("solve_are: Q2 is not positive semidefinite");
  }

  const Matrix W = llt.matrixL().solve(B.transpose());  // L^{-1} B'
  const Matrix G = W.transpose() * W;                   // B R^{-1} B'

  const LMatrix Al = A.cast<LReal>();
  const LMatrix Ql = Q2.cast<LReal>();
  const LMatrix Gl = G.cast<LReal>();
  LMatrix H(2 * n, 2 * n);
  H << Al, -Gl, -Ql, -Al.transpose();

  Eigen::ComplexSchur<LComplexMatrix> schur(2 * n);
  schur.compute(H.cast<LComplex>(), true);
  if (schur.info() != Eigen::Success) {
    throw NumericalFailure("solve_are: Hamiltonian Schur iteration did not converge");
  }
  LComplexMatrix T = schur.matrixT();
  LComplexMatrix U = schur.matrixU();
  reorder(T, U, [](const LComplex& z) { return z.real() < 0; });

  Index stable = 0;
  for (Index i = 0; i < 2 * n; ++i) {
    if (T(i, i).real() < 0) ++stable;
  }
  if (stable != n) {
    throw NumericalFailure("solve_are: Hamiltonian has " + std::to_string(stable) +
                           " stable eigenvalues, expected " + std::to_string(n) +
                           " (eigenvalues on the imaginary axis; unstabilizable or undetectable)");
  }

  const LComplexMatrix U11 = U.topLeftCorner(n, n);
  const LComplexMatrix U21 = U.bottomLeftCorner(n, n);
  Eigen::PartialPivLU<LComplexMatrix> lu(U11.transpose());
  const double rcond = static_cast<double>(lu.rcond());
  if (!(rcond > 1e-15)) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "solve_are: stable subspace basis U11 is numerically singular (rcond %.3g); "
                  "system is unstabilizable or ill-posed", rcond);
    throw NumericalFailure(msg);
  }
  LMatrix V = lu.solve(U21.transpose()).transpose().real();
  V = (0.5L * (V + V.transpose())).eval();

  // Newton polish: each step solves a Lyapunov equation in the current closed
  // loop; steps are kept only while they lower the residual.
  RiccatiSolution sol;
  LReal res = riccati_map(Al, Gl, Ql, V).norm();
  const LReal qn = std::max(Ql.norm(), std::numeric_limits<LReal>::min());
  for (int step = 0; step < options.max_newton_steps && res / qn > options.refine_above; ++step) {
    const LMatrix Acl = Al - Gl * V;
    LMatrix candidate;
    try {
      candidate = V + lyapunov(Acl, -riccati_map(Al, Gl, Ql, V));
    } catch (const SingularResonance&) {
      break;
    }
    candidate = (0.5L * (candidate + candidate.transpose())).eval();
    const LReal cand_res = riccati_map(Al, Gl, Ql, candidate).norm();
    if (!(cand_res < res)) break;
    V = std::move(candidate);
    res = cand_res;
    ++sol.newton_steps;
  }
  // The stored V2 is double, so the reported residual has a rounding floor of
  // about eps ||Ac|| ||V2|| / ||Q||. Double-precision Newton steps on the
  // rounded matrix can still lower it; keep them only when they do.
  Matrix Vd = V.cast<double>();
  sol.residual = are_residual(A, B, Q2, R2, Vd);
  KronSumOptions kopts;
  kopts.cache = nullptr;
  for (int step = 0; step < options.max_newton_steps && sol.residual > options.refine_above; ++step) {
    const Matrix WV = W * Vd;
    const Matrix res = A.transpose() * Vd + Vd * A - WV.transpose() * WV + Q2;
    const Matrix Acl = A - G * Vd;
    Matrix candidate;
    try {
      const Vector rhs = -Eigen::Map<const Vector>(res.data(), res.size());
      const KronSumSolution dv = solve_kron_sum(Acl.transpose(), 2, rhs, 0.0, kopts);
      candidate = Vd + Eigen::Map<const Matrix>(dv.v.data(), n, n);
    } catch (const SingularResonance&) {
      break;
    }
    candidate = (0.5 * (candidate + candidate.transpose())).eval();
    const double cand_res = are_residual(A, B, Q2, R2, candidate);
    if (!(cand_res < sol.residual)) break;
    Vd = std::move(candidate);
    sol.residual = cand_res;
    ++sol.newton_steps;
  }
  sol.refined = sol.newton_steps > 0;
  sol.V2 = std::move(Vd);

  if (!(sol.residual <= options.accept_below)) {
    char msg[96];
    std::snprintf(msg, sizeof(msg), "solve_are: residual %.3g above tolerance %.3g", sol.residual,
                  options.accept_below);
    throw NumericalFailure(msg);
  }

  sol.K1 = -llt.solve(B.transpose() * sol.V2);
  sol.Ac = A + B * sol.K1;
  const double margin = stability_margin(sol.Ac);
  if (!(margin < 0.0)) {
    throw NumericalFailure("solve_are: closed loop is not stable (max Re lambda = " +
                           std::to_string(margin) + ")");
  }
  return sol;
}

}  // namespace qqr
