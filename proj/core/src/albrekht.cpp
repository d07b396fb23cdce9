#include "qqr/albrekht.hpp"

#include <chrono>

namespace qqr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string shape(const Matrix& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

}  // namespace

void QuadraticSystem::validate() const {
  const Index n = A.rows();
  if (n < 1 || A.cols() != n) {
    throw ContractViolation("QuadraticSystem: A must be square and nonempty, got " + shape(A));
  }
  if (B.rows() != n || B.cols() < 1) {
    throw ContractViolation("QuadraticSystem: B must be " + std::to_string(n) + "xm, got " +
                            shape(B));
  }
  if (N.rows() != n || N.cols() != n * n) {
    throw ContractViolation("QuadraticSystem: N must be " + std::to_string(n) + "x" +
                            std::to_string(n * n) + ", got " + shape(N));
  }
  if (Q2.rows() != n || Q2.cols() != n) {
    throw ContractViolation("QuadraticSystem: Q2 must be " + std::to_string(n) + "x" +
                            std::to_string(n) + ", got " + shape(Q2));
  }
  if (R2.rows() != m() || R2.cols() != m()) {
    throw ContractViolation("QuadraticSystem: R2 must be " + std::to_string(m()) + "x" +
                            std::to_string(m()) + ", got " + shape(R2));
  }
  if (!A.allFinite() || !B.allFinite() || !N.allFinite() || !Q2.allFinite() || !R2.allFinite()) {
    throw ContractViolation("QuadraticSystem: non-finite entries");
  }
}

PolyValueFunction::PolyValueFunction(Index base_dim, std::vector<CoeffVector> coeffs)
    : base_dim_(base_dim), coeffs_(std::move(coeffs)) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i].base_dim() != base_dim_ || coeffs_[i].order() != static_cast<int>(i) + 2) {
      throw ContractViolation("PolyValueFunction: coefficient " + std::to_string(i) +
                              " must have base_dim " + std::to_string(base_dim_) + " and order " +
                              std::to_string(i + 2));
    }
  }
}

const CoeffVector& PolyValueFunction::coeff(int d) const {
  if (d < 2 || d > degree()) {
    throw ContractViolation("PolyValueFunction: no coefficient of degree " + std::to_string(d));
  }
  return coeffs_[static_cast<std::size_t>(d - 2)];
}

Vector PolyValueFunction::gradient(const Vector& x) const {
  if (x.size() != base_dim_) {
    throw ContractViolation("PolyValueFunction::gradient: state size mismatch");
  }
  Vector g = Vector::Zero(base_dim_);
  for (const auto& v : coeffs_) {
    g.noalias() += unfold_sum(v) * lift(x, v.order() - 1);
  }
  return g;
}

PolyValueFunction PolyValueFunction::truncated(int degree) const {
  if (degree < 2 || degree > this->degree()) {
    throw ContractViolation("PolyValueFunction::truncated: degree out of range");
  }
  return PolyValueFunction(base_dim_,
                           std::vector<CoeffVector>(coeffs_.begin(), coeffs_.begin() + (degree - 1)));
}

PolyValueFunction PolyValueFunction::symmetrized() const {
  std::vector<CoeffVector> sym;
  sym.reserve(coeffs_.size());
  for (const auto& v : coeffs_) {
    sym.push_back(symmetrize(v));
  }
  return PolyValueFunction(base_dim_, std::move(sym));
}

PolyFeedbackLaw::PolyFeedbackLaw(Index base_dim, Index input_dim, std::vector<Matrix> gains)
    : base_dim_(base_dim), input_dim_(input_dim), gains_(std::move(gains)) {
  for (std::size_t i = 0; i < gains_.size(); ++i) {
    const Index cols = int_pow(base_dim_, static_cast<int>(i) + 1);
    if (gains_[i].rows() != input_dim_ || gains_[i].cols() != cols) {
      throw ContractViolation("PolyFeedbackLaw: gain " + std::to_string(i + 1) + " must be " +
                              std::to_string(input_dim_) + "x" + std::to_string(cols) + ", got " +
                              shape(gains_[i]));
    }
    if (!gains_[i].allFinite()) {
      throw ContractViolation("PolyFeedbackLaw: non-finite gain " + std::to_string(i + 1));
    }
  }
}

const Matrix& PolyFeedbackLaw::gain(int d) const {
  if (d < 1 || d > degree()) {
    throw ContractViolation("PolyFeedbackLaw: no gain of degree " + std::to_string(d));
  }
  return gains_[static_cast<std::size_t>(d - 1)];
}

PolyFeedbackLaw PolyFeedbackLaw::truncated(int degree) const {
  if (degree < 1 || degree > this->degree()) {
    throw ContractViolation("PolyFeedbackLaw::truncated: degree out of range");
  }
  return PolyFeedbackLaw(base_dim_, input_dim_,
                         std::vector<Matrix>(gains_.begin(), gains_.begin() + degree));
}

PolyFeedbackLaw PolyFeedbackLaw::symmetrized() const {
  std::vector<Matrix> sym;
  sym.reserve(gains_.size());
  for (std::size_t i = 0; i < gains_.size(); ++i) {
    sym.push_back(symmetrize_rows(gains_[i], base_dim_, static_cast<int>(i) + 1));
  }
  return PolyFeedbackLaw(base_dim_, input_dim_, std::move(sym));
}

Matrix feedback_from_value(const CoeffVector& v_next, const Matrix& B, const Matrix& R2) {
  if (v_next.order() < 2) {
    throw ContractViolation("feedback_from_value: value coefficient must have order >= 2");
  }
  if (B.rows() != v_next.base_dim() || R2.rows() != B.cols() || R2.cols() != B.cols()) {
    throw ContractViolation("feedback_from_value: B is " + shape(B) + ", R2 is " + shape(R2) +
                            ", base_dim " + std::to_string(v_next.base_dim()));
  }
  const Matrix S = unfold_sum(v_next);
  Eigen::LLT<Matrix> llt(R2);
  if (llt.info() != Eigen::Success) {
    throw ContractViolation("feedback_from_value: R2 is not positive definite");
  }
  return -0.5 * llt.solve(B.transpose() * S);
}

Vector rhs_for_degree(int p, const QuadraticSystem& sys, std::span<const Matrix> gains,
                      std::span<const CoeffVector> values) {
  if (p < 3 || p > kMaxFeedbackDegree + 1) {
    throw ContractViolation("rhs_for_degree: degree " + std::to_string(p) + " outside 3.." +
                            std::to_string(kMaxFeedbackDegree + 1));
  }
  if (static_cast<int>(gains.size()) < p - 2 || static_cast<int>(values.size()) < p - 2) {
    throw ContractViolation("rhs_for_degree: need K_1..K_" + std::to_string(p - 2) + " and v_2..v_" +
                            std::to_string(p - 1));
  }
  const Index n = sys.n();
  auto K = [&](int i) -> const Matrix& { return gains[static_cast<std::size_t>(i - 1)]; };
  auto v = [&](int d) -> const CoeffVector& { return values[static_cast<std::size_t>(d - 2)]; };
  for (int d = 2; d <= p - 1; ++d) {
    if (v(d).base_dim() != n || v(d).order() != d) {
      throw ContractViolation("rhs_for_degree: v_" + std::to_string(d) + " has wrong shape");
    }
  }
  for (int i = 1; i <= p - 2; ++i) {
    if (K(i).rows() != sys.m() || K(i).cols() != int_pow(n, i)) {
      throw ContractViolation("rhs_for_degree: K_" + std::to_string(i) + " is " + shape(K(i)));
    }
  }

  // Quadratic drift plus the degree-2 feedback acting through B.
  Matrix drift2 = sys.N;
  if (p >= 4) {
    drift2.noalias() += sys.B * K(2);
  }
  Vector c = -kron_sum_apply(drift2.transpose(), p - 1, v(p - 1).values());

  for (int i = 3; i <= p - 2; ++i) {
    const Matrix BK = sys.B * K(i);
    c -= kron_sum_apply(BK.transpose(), p + 1 - i, v(p + 1 - i).values());
  }

  // (K_i kron K_j)' r2 = vec(K_j' R2 K_i) over ordered pairs i + j = p.
  for (int i = 2; i <= p - 2; ++i) {
    const int j = p - i;
    const Matrix cross = K(j).transpose() * sys.R2 * K(i);
    c -= Eigen::Map<const Vector>(cross.data(), cross.size());
  }
  return c;
}

QqrSolution solve_qqr(const QuadraticSystem& sys, int degree, const QqrOptions& options) {
  sys.validate();
  if (degree < 1 || degree > kMaxFeedbackDegree) {
    throw ContractViolation("solve_qqr: feedback degree " + std::to_string(degree) +
                            " outside 1.." + std::to_string(kMaxFeedbackDegree));
  }
  const Index n = sys.n();
  // The dense path is refused before any work when its largest system will not fit.
  if (options.method == SolverMethod::full) {
    const std::size_t bytes = full_solve_bytes(n, degree + 1);
    if (bytes > options.limits.max_bytes) {
      throw SizeRefusal("solve_qqr: dense solve for v" + std::to_string(degree + 1) + " needs " +
                            std::to_string(bytes) + " bytes, cap is " +
                            std::to_string(options.limits.max_bytes),
                        bytes, options.limits.max_bytes);
    }
  }

  QqrSolution out;
  auto t0 = Clock::now();
  out.riccati = solve_are(sys.A, sys.B, sys.Q2, sys.R2, options.riccati);
  out.are_seconds = seconds_since(t0);

  std::vector<CoeffVector> values;
  values.emplace_back(n, 2, Eigen::Map<const Vector>(out.riccati.V2.data(), n * n));
  std::vector<Matrix> gains{out.riccati.K1};

  const Matrix factor = out.riccati.Ac.transpose();
  for (int p = 3; p <= degree + 1; ++p) {
    DegreeReport report;
    report.value_degree = p;

    t0 = Clock::now();
    const Vector c = rhs_for_degree(p, sys, gains, values);
    report.rhs_seconds = seconds_since(t0);

    t0 = Clock::now();
    KronSumSolution sol = options.method == SolverMethod::recursive
                              ? solve_kron_sum(factor, p, c, 0.0, options.kron)
                              : solve_full(factor, p, c, 0.0, options.limits);
    report.solve_seconds = seconds_since(t0);
    report.solve = sol.report;
    values.emplace_back(n, p, std::move(sol.v));

    t0 = Clock::now();
    gains.push_back(feedback_from_value(values.back(), sys.B, sys.R2));
    report.feedback_seconds = seconds_since(t0);

    out.reports.push_back(report);
  }

  out.value = PolyValueFunction(n, std::move(values));
  out.feedback = PolyFeedbackLaw(n, sys.m(), std::move(gains));
  return out;
}

HjbResidual hjb_residual(const QuadraticSystem& sys, const PolyValueFunction& value,
                         const PolyFeedbackLaw& feedback, const Vector& x) {
  if (x.size() != sys.n() || value.base_dim() != sys.n() || feedback.base_dim() != sys.n() ||
      feedback.input_dim() != sys.m()) {
    throw ContractViolation("hjb_residual: dimension mismatch");
  }
  const Vector grad = value.gradient(x);
  const Vector u = feedback(x);
  const Vector xdot = sys.A * x + sys.B * u + sys.N * lift(x, 2);
  HjbResidual r;
  r.r1 = grad.dot(xdot) + x.dot(sys.Q2 * x) + u.dot(sys.R2 * u);
  r.r2 = sys.B.transpose() * grad + 2.0 * sys.R2 * u;
  return r;
}

}  // namespace qqr
