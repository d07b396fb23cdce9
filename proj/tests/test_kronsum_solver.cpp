#include <gtest/gtest.h>

#include <cstring>
#include <thread>

#include "oracles.hpp"

using namespace qqr;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

bool bit_equal(const Vector& a, const Vector& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST(SchurDecompose, TriangularInputIsItsOwnForm) {
  Matrix A(3, 3);
  A << -1, 2, 3, 0, -4, 5, 0, 0, -6;
  const SchurForm s = schur_decompose(A);
  const ComplexMatrix recon = s.transform * s.triangular * s.transform.adjoint();
  EXPECT_LE((recon - A.cast<Complex>()).norm(), 1e-14 * A.norm());
  for (Index i = 0; i < 3; ++i) {
    EXPECT_NEAR(std::abs(s.triangular(i, i) - A(i, i)), 0.0, 1e-14);
  }
}

TEST(SchurDecompose, RotationHasImaginaryUnitSpectrum) {
  Matrix A(2, 2);
  A << 0, 1, -1, 0;
  const SchurForm s = schur_decompose(A);
  const Complex a = s.triangular(0, 0), b = s.triangular(1, 1);
  EXPECT_NEAR(std::abs(a * b - Complex(1, 0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(a + b), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(std::abs(a.imag()) - 1.0), 0.0, 1e-14);
}

TEST(SchurDecompose, ReconstructsRandomMatrices) {
  std::mt19937_64 gen(21);
  for (int t = 0; t < 10; ++t) {
    const Matrix A = oracle::random_matrix(gen, 5, 5);
    const SchurForm s = schur_decompose(A);
    const ComplexMatrix recon = s.transform * s.triangular * s.transform.adjoint();
    EXPECT_LE((recon - A.cast<Complex>()).norm() / A.norm(), 1e-12);
    EXPECT_LE((s.transform.adjoint() * s.transform - ComplexMatrix::Identity(5, 5)).norm(), 1e-13);
    EXPECT_EQ(s.triangular.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm(), 0.0);
  }
  EXPECT_THROW(schur_decompose(Matrix::Zero(2, 3)), ContractViolation);
}

TEST(SchurCache, ReusesFormsForEqualMatrices) {
  SchurCache cache(2);
  std::mt19937_64 gen(22);
  const Matrix A = oracle::random_matrix(gen, 4, 4);
  auto f1 = cache.get(A);
  auto f2 = cache.get(Matrix(A));
  EXPECT_EQ(f1.get(), f2.get());
  EXPECT_EQ(cache.size(), 1u);
  cache.get(oracle::random_matrix(gen, 4, 4));
  cache.get(oracle::random_matrix(gen, 4, 4));
  EXPECT_LE(cache.size(), 2u);
  cache.clear();
  EXPECT_EQ(cache.size(), 0u);
}

TEST(SchurCache, ConcurrentReadersGetOneForm) {
  SchurCache cache;
  std::mt19937_64 gen(23);
  const Matrix A = oracle::random_matrix(gen, 6, 6);
  const auto first = cache.get(A);
  std::vector<std::thread> pool;
  std::vector<const SchurForm*> seen(8);
  for (int t = 0; t < 8; ++t) {
    pool.emplace_back([&, t] { seen[t] = cache.get(A).get(); });
  }
  for (auto& th : pool) th.join();
  for (auto* p : seen) EXPECT_EQ(p, first.get());
}

TEST(KronSumSystem, ApplyMatchesAssembly) {
  std::mt19937_64 gen(24);
  const Matrix A = oracle::random_matrix(gen, 3, 3);
  const KronSumSystem sys(A, 3, 0.25);
  EXPECT_EQ(sys.dimension(), 27);
  const Vector v = oracle::random_vector(gen, 27);
  EXPECT_LE(oracle::rel(sys.apply(v), kron_sum_assemble(A, 3, 0.25) * v), 1e-14);
  EXPECT_THROW(KronSumSystem(Matrix::Zero(2, 3), 2), ContractViolation);
}

TEST(SolveKronSum, ScalarCase) {
  const Matrix A = Matrix::Constant(1, 1, -1.0);
  const KronSumSolution r = solve_kron_sum(A, 3, vec({3.0}));
  EXPECT_NEAR(r.v[0], -1.0, 1e-15);
  const KronSumSolution f = solve_full(A, 3, vec({3.0}));
  EXPECT_NEAR(f.v[0], -1.0, 1e-15);
  EXPECT_EQ(r.report.recursion_depth, 3);
}

TEST(SolveKronSum, DiagonalCase) {
  Matrix A = Vector(vec({-1, -2})).asDiagonal();
  const Vector c = vec({2, 3, 3, 4});
  const Vector expected = vec({-1, -1, -1, -1});
  EXPECT_LE(oracle::rel(solve_kron_sum(A, 2, c).v, expected), 1e-15);
  EXPECT_LE(oracle::rel(solve_full(A, 2, c).v, expected), 1e-15);
}

TEST(SolveKronSum, MatchesDenseOracleOnStableFactors) {
  std::mt19937_64 gen(25);
  for (Index n = 1; n <= 8; ++n) {
    for (int d = 1; d <= 4; ++d) {
      for (int t = 0; t < 20; ++t) {
        const Matrix A = oracle::random_stable(gen, n);
        const Vector c = oracle::random_vector(gen, int_pow(n, d));
        const Vector vr = solve_kron_sum(A, d, c).v;
        const Vector vf = solve_full(A, d, c).v;
        EXPECT_LE(oracle::rel(vr, vf), 1e-9) << "n=" << n << " d=" << d << " t=" << t;
      }
    }
  }
}

TEST(SolveKronSum, FourByFourOrderThreeToTenDigits) {
  std::mt19937_64 gen(26);
  const Matrix A = oracle::random_stable(gen, 4);
  const Vector c = oracle::random_vector(gen, 64);
  EXPECT_LE(oracle::rel(solve_kron_sum(A, 3, c).v, solve_full(A, 3, c).v), 1e-10);
  const Matrix B = oracle::random_stable(gen, 6);
  const Vector e = oracle::random_vector(gen, 216);
  EXPECT_LE(oracle::rel(solve_kron_sum(B, 3, e).v, solve_full(B, 3, e).v), 1e-10);
}

TEST(SolveKronSum, ReportedResidualIsRecomputable) {
  std::mt19937_64 gen(27);
  for (int d = 1; d <= 4; ++d) {
    const Matrix A = oracle::random_stable(gen, 4);
    const Vector c = oracle::random_vector(gen, int_pow(4, d));
    const KronSumSolution s = solve_kron_sum(A, d, c, 0.3);
    const Vector r = kron_sum_apply(A, d, s.v) + 0.3 * s.v - c;
    EXPECT_NEAR(s.report.residual_norm, r.norm() / c.norm(), 1e-13);
    EXPECT_LE(s.report.residual_norm, 1e-10);
    EXPECT_FALSE(s.report.residual_warning);
    EXPECT_LE(s.report.imaginary_ratio, 1e-11);
    EXPECT_GT(s.report.min_pivot, 0.0);
  }
}

TEST(SolveKronSum, ShiftEqualsDiagonalUpdate) {
  std::mt19937_64 gen(28);
  for (int d = 1; d <= 4; ++d) {
    const Matrix A = oracle::random_stable(gen, 3);
    const Vector c = oracle::random_vector(gen, int_pow(3, d));
    const double lambda = 0.8;
    const Vector shifted = solve_kron_sum(A, d, c, lambda).v;
    const Matrix moved = A + (lambda / d) * Matrix::Identity(3, 3);
    EXPECT_LE(oracle::rel(shifted, solve_kron_sum(moved, d, c).v), 1e-11);
  }
}

TEST(SolveKronSum, StableFactorsNeverResonate) {
  std::mt19937_64 gen(29);
  for (int t = 0; t < 30; ++t) {
    const Matrix A = oracle::random_stable(gen, 3);
    const Vector c = oracle::random_vector(gen, 27);
    EXPECT_NO_THROW(solve_kron_sum(A, 3, c, 0.1 * t));
  }
}

TEST(SolveKronSum, ResonanceIsReported) {
  Matrix A = Vector(vec({1.0, -2.0})).asDiagonal();
  // eigenvalue sums: 2, -1, -1, -4; shift 1 makes the mixed sums vanish.
  try {
    solve_kron_sum(A, 2, Vector::Ones(4), 1.0);
    FAIL() << "expected SingularResonance";
  } catch (const SingularResonance& e) {
    EXPECT_LT(std::abs(e.pivot()), 1e-12);
  }
  EXPECT_THROW(solve_full(A, 2, Vector::Ones(4), 1.0), SingularResonance);
}

TEST(SolveKronSum, IsBitReproducible) {
  std::mt19937_64 gen(30);
  const Matrix A = oracle::random_stable(gen, 5);
  const Vector c = oracle::random_vector(gen, 625);
  KronSumOptions uncached;
  uncached.cache = nullptr;
  const Vector a = solve_kron_sum(A, 4, c).v;
  const Vector b = solve_kron_sum(A, 4, c).v;
  const Vector u = solve_kron_sum(A, 4, c, 0.0, uncached).v;
  EXPECT_TRUE(bit_equal(a, b));
  EXPECT_TRUE(bit_equal(a, u));
}

TEST(SolveKronSum, ConcurrentSolvesShareOneFactorization) {
  std::mt19937_64 gen(31);
  const Matrix A = oracle::random_stable(gen, 4);
  std::vector<Vector> rhs, serial, parallel(6);
  for (int t = 0; t < 6; ++t) {
    rhs.push_back(oracle::random_vector(gen, 256));
    serial.push_back(solve_kron_sum(A, 4, rhs.back()).v);
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < 6; ++t) {
    pool.emplace_back([&, t] { parallel[t] = solve_kron_sum(A, 4, rhs[t]).v; });
  }
  for (auto& th : pool) th.join();
  for (int t = 0; t < 6; ++t) EXPECT_TRUE(bit_equal(serial[t], parallel[t]));
}

TEST(SolveKronSum, RejectsMalformedInput) {
  EXPECT_THROW(solve_kron_sum(Matrix::Identity(2, 2), 2, Vector::Zero(3)), ContractViolation);
  EXPECT_THROW(solve_kron_sum(Matrix::Zero(2, 3), 2, Vector::Zero(4)), ContractViolation);
  EXPECT_THROW(solve_kron_sum(Matrix::Identity(2, 2), 0, Vector::Zero(1)), ContractViolation);
}

TEST(SolveFull, RefusesAboveDefaultCap) {
  const Matrix A = -Matrix::Identity(16, 16);
  EXPECT_EQ(full_solve_bytes(16, 4), std::size_t{65536} * 65536 * 8);
  EXPECT_THROW(solve_full(A, 4, Vector::Ones(65536)), SizeRefusal);
  AssemblyLimits tiny;
  tiny.max_bytes = 512;  // 9x9 doubles need 648
  EXPECT_THROW(solve_full(-Matrix::Identity(3, 3), 2, Vector::Ones(9), 0.0, tiny), SizeRefusal);
}
