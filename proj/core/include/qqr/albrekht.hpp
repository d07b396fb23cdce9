#pragma once

// Degree-by-degree power-series synthesis for quadratic-in-state systems
//
//   xdot = A x + B u + N (x kron x),   cost = int x'Q2 x + u'R2 u dt.
//
// The value function v(x) = sum_{d>=2} v_d' x^{(d)} and feedback
// u = sum_{d>=1} K_d x^{(d)} are matched term by term in the HJB equations.
// Degree 2 is the Riccati solution; each higher value coefficient solves
//
//   L_p(Ac') v_p = c_p
//
// and the gain K_{p-1} follows from the stationarity condition
// B' grad v + 2 R2 u = 0.

#include <span>
#include <vector>

#include "qqr/kronecker.hpp"
#include "qqr/kronsum_solver.hpp"
#include "qqr/riccati.hpp"

namespace qqr {

struct QuadraticSystem {
  Matrix A;   // n x n
  Matrix B;   // n x m
  Matrix N;   // n x n^2, columns indexed like x kron x
  Matrix Q2;  // n x n, symmetric PSD
  Matrix R2;  // m x m, symmetric PD

  Index n() const noexcept { return A.rows(); }
  Index m() const noexcept { return B.cols(); }

  /// Throws ContractViolation on inconsistent dimensions or non-finite data.
  void validate() const;

  Vector q2() const { return Eigen::Map<const Vector>(Q2.data(), Q2.size()); }
  Vector r2() const { return Eigen::Map<const Vector>(R2.data(), R2.size()); }
};

/// v(x) = sum_{d=2}^{degree} v_d' x^{(d)}.
class PolyValueFunction {
 public:
  PolyValueFunction() = default;
  PolyValueFunction(Index base_dim, std::vector<CoeffVector> coeffs);

  Index base_dim() const noexcept { return base_dim_; }
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) + 1; }
  /// Coefficient of degree d (2 <= d <= degree()).
  const CoeffVector& coeff(int d) const;
  std::span<const CoeffVector> coeffs() const noexcept { return coeffs_; }

  double operator()(const Vector& x) const { return eval_value(coeffs_, x); }
  Vector gradient(const Vector& x) const;

  /// Copy keeping degrees 2..degree.
  PolyValueFunction truncated(int degree) const;
  /// Copy with every coefficient replaced by its permutation-symmetric part.
  PolyValueFunction symmetrized() const;

 private:
  Index base_dim_ = 0;
  std::vector<CoeffVector> coeffs_;  // degrees 2, 3, ...
};

/// u(x) = sum_{d=1}^{degree} K_d x^{(d)}.
class PolyFeedbackLaw {
 public:
  PolyFeedbackLaw() = default;
  PolyFeedbackLaw(Index base_dim, Index input_dim, std::vector<Matrix> gains);

  Index base_dim() const noexcept { return base_dim_; }
  Index input_dim() const noexcept { return input_dim_; }
  int degree() const noexcept { return static_cast<int>(gains_.size()); }
  /// Gain of degree d (1 <= d <= degree()).
  const Matrix& gain(int d) const;
  std::span<const Matrix> gains() const noexcept { return gains_; }

  Vector operator()(const Vector& x) const { return eval_feedback(gains_, x); }

  /// Copy truncated to the first `degree` gains.
  PolyFeedbackLaw truncated(int degree) const;
  PolyFeedbackLaw symmetrized() const;

 private:
  Index base_dim_ = 0;
  Index input_dim_ = 0;
  std::vector<Matrix> gains_;  // degrees 1, 2, ...
};

enum class SolverMethod { recursive, full };

struct QqrOptions {
  SolverMethod method = SolverMethod::recursive;
  AssemblyLimits limits;
  RiccatiOptions riccati;
  KronSumOptions kron;
};

/// Per value-degree diagnostics.
struct DegreeReport {
  int value_degree = 0;
  SolveReport solve;
  double rhs_seconds = 0.0;
  double solve_seconds = 0.0;
  double feedback_seconds = 0.0;
};

struct QqrSolution {
  RiccatiSolution riccati;
  PolyValueFunction value;     // degrees 2 .. feedback degree + 1
  PolyFeedbackLaw feedback;    // degrees 1 .. feedback degree
  std::vector<DegreeReport> reports;
  double are_seconds = 0.0;
};

/// Maximum supported feedback degree (value degree 5).
inline constexpr int kMaxFeedbackDegree = 4;

/// Runs the full synthesis up to the given feedback degree (1..4).
QqrSolution solve_qqr(const QuadraticSystem& sys, int degree, const QqrOptions& options = {});

/// Right-hand side c_p of L_p(Ac') v_p = c_p for p in 3..5.
///
/// `gains` must hold K_1 .. K_{p-2} and `values` v_2 .. v_{p-1}.
Vector rhs_for_degree(int p, const QuadraticSystem& sys, std::span<const Matrix> gains,
                      std::span<const CoeffVector> values);

/// K_d = -(1/2) R2^{-1} B' unfold_sum(v_{d+1}).
Matrix feedback_from_value(const CoeffVector& v_next, const Matrix& B, const Matrix& R2);

struct HjbResidual {
  double r1 = 0.0;  // value equation
  Vector r2;        // B' grad v + 2 R2 u
};

/// Residuals of both HJB equations at x for the given truncated expansions.
HjbResidual hjb_residual(const QuadraticSystem& sys, const PolyValueFunction& value,
                         const PolyFeedbackLaw& feedback, const Vector& x);

}  // namespace qqr
