#include <gtest/gtest.h>

#include <cstring>

#include "oracles.hpp"

using namespace qqr;

namespace {

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

double rel_entry(double got, double want, double scale) {
  return std::abs(got - want) / scale;
}

}  // namespace

TEST(RandomSystem, DeterministicPerSeed) {
  const QuadraticSystem a = random_system({6, 1, 0});
  const QuadraticSystem b = random_system({6, 1, 0});
  EXPECT_TRUE(bit_equal(a.A, b.A));
  EXPECT_TRUE(bit_equal(a.B, b.B));
  EXPECT_TRUE(bit_equal(a.N, b.N));
  const QuadraticSystem c = random_system({6, 1, 1});
  EXPECT_FALSE(bit_equal(a.A, c.A));
  EXPECT_FALSE(bit_equal(a.N, c.N));
}

TEST(RandomSystem, ShapesRangesAndWeights) {
  const QuadraticSystem s = random_system({6, 1, 0});
  EXPECT_EQ(s.A.rows(), 6);
  EXPECT_EQ(s.B.cols(), 1);
  EXPECT_EQ(s.N.cols(), 36);
  for (const Matrix* M : {&s.A, &s.B, &s.N}) {
    EXPECT_GE(M->minCoeff(), 0.0);
    EXPECT_LT(M->maxCoeff(), 1.0);
  }
  EXPECT_EQ(s.Q2, Matrix::Identity(6, 6));
  EXPECT_EQ(s.R2, Matrix::Identity(1, 1));
  EXPECT_NO_THROW(s.validate());
  EXPECT_THROW(random_system({0, 1, 0}), ContractViolation);
  EXPECT_THROW(random_system({2, 0, 0}), ContractViolation);
}

TEST(RandomSystem, DrawOrderIsAThenBThenN) {
  // The first n^2 draws fill A column-major, the next n*m fill B.
  const QuadraticSystem big = random_system({3, 2, 17});
  const QuadraticSystem small = random_system({3, 1, 17});
  EXPECT_TRUE(bit_equal(big.A, small.A));
  EXPECT_TRUE(bit_equal(Matrix(big.B.col(0)), small.B));
}

TEST(RandomSystem, SmallInstanceSolvesWithCleanResidualOrder) {
  const QuadraticSystem sys = random_system({2, 1, 42});
  const QqrSolution s = solve_qqr(sys, 3);
  std::mt19937_64 gen(7);
  Vector u = oracle::random_vector(gen, 2).normalized();
  std::vector<double> scales{1e-1, 1e-2, 1e-3}, r1;
  for (double sc : scales) r1.push_back(std::abs(hjb_residual(sys, s.value, s.feedback, sc * u).r1));
  EXPECT_GE(oracle::loglog_slope(scales, r1), 5 - 0.3);
}

TEST(BurgersDiscretization, FourCellMatrices) {
  const BurgersDiscretization d = burgers_discretization({4, 2, 0.001});
  for (Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(d.mass(i, i), 1.0 / 6, 1e-15);
    EXPECT_NEAR(d.mass(i, (i + 1) % 4), 1.0 / 24, 1e-15);
    EXPECT_NEAR(d.mass(i, (i + 3) % 4), 1.0 / 24, 1e-15);
    EXPECT_EQ(d.mass(i, (i + 2) % 4), 0.0);
    EXPECT_NEAR(d.stiffness(i, i), 8.0, 1e-14);
    EXPECT_NEAR(d.stiffness(i, (i + 1) % 4), -4.0, 1e-14);
    EXPECT_NEAR(d.stiffness(i, (i + 3) % 4), -4.0, 1e-14);
  }
}

TEST(BurgersDiscretization, StructuralProperties) {
  for (Index n : {5, 10, 16}) {
    const BurgersDiscretization d = burgers_discretization({n, 2, 0.001});
    const double h = 1.0 / n;
    EXPECT_LE((d.mass - d.mass.transpose()).norm(), 1e-15);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(d.mass).eigenvalues().minCoeff(), 0.0);
    EXPECT_LE((d.stiffness * Vector::Ones(n)).norm(), 1e-12);
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(d.stiffness).eigenvalues();
    EXPECT_NEAR(ev[0], 0.0, 1e-10);
    EXPECT_GT(ev[1], 1e-6);
    for (Index i = 0; i < n; ++i) EXPECT_NEAR(d.patches.row(i).sum(), h, 1e-15);

    std::mt19937_64 gen(n);
    for (int t = 0; t < 5; ++t) {
      const Vector z = oracle::random_vector(gen, n);
      const double total = Vector::Ones(n).dot(d.convection * lift(z, 2));
      EXPECT_LE(std::abs(total), 1e-13 * (d.convection.norm() * z.squaredNorm()));
    }
  }
}

TEST(BurgersDiscretization, IntegralsMatchGaussQuadrature) {
  for (auto [n, m] : {std::pair<Index, Index>{10, 2}, {7, 3}, {12, 5}}) {
    const BurgersDiscretization d = burgers_discretization({n, m, 0.001});
    const auto breaks = oracle::grid_breaks(n, m);
    const double mscale = d.mass.cwiseAbs().maxCoeff();
    const double sscale = d.stiffness.cwiseAbs().maxCoeff();
    const double cscale = d.convection.cwiseAbs().maxCoeff();
    const double pscale = d.patches.cwiseAbs().maxCoeff();
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        const double mij = oracle::integrate(
            [&](double x) { return oracle::hat(n, i, x) * oracle::hat(n, j, x); }, breaks);
        const double sij = oracle::integrate(
            [&](double x) { return oracle::hat_slope(n, i, x) * oracle::hat_slope(n, j, x); },
            breaks);
        EXPECT_LE(rel_entry(d.mass(i, j), mij, mscale), 1e-12);
        EXPECT_LE(rel_entry(d.stiffness(i, j), sij, sscale), 1e-12);
        for (Index k = 0; k < n; ++k) {
          const double cijk = oracle::integrate(
              [&](double x) {
                return 0.5 * oracle::hat(n, j, x) * oracle::hat(n, k, x) * oracle::hat_slope(n, i, x);
              },
              breaks);
          EXPECT_LE(rel_entry(d.convection(i, j * n + k), cijk, cscale), 1e-12)
              << "n=" << n << " i=" << i << " j=" << j << " k=" << k;
        }
      }
      for (Index p = 0; p < m; ++p) {
        const double lo = static_cast<double>(p) / m, hi = static_cast<double>(p + 1) / m;
        const double pik = oracle::integrate(
            [&](double x) { return (x >= lo && x < hi) ? oracle::hat(n, i, x) : 0.0; }, breaks);
        EXPECT_LE(rel_entry(d.patches(i, p), pik, pscale), 1e-12) << "n=" << n << " m=" << m;
      }
    }
  }
}

TEST(BurgersSystem, StandardFormFromDiscretization) {
  const BurgersSpec spec{10, 2, 0.001};
  const BurgersDiscretization d = burgers_discretization(spec);
  const QuadraticSystem s = burgers_system(spec);
  EXPECT_LE(oracle::rel(d.mass * s.A, -spec.eps * d.stiffness), 1e-13);
  EXPECT_LE(oracle::rel(d.mass * s.N, d.convection), 1e-13);
  EXPECT_LE(oracle::rel(d.mass * s.B, d.patches), 1e-13);
  EXPECT_EQ(s.Q2, d.mass);
  EXPECT_EQ(s.R2, Matrix::Identity(2, 2));
  EXPECT_LE((s.A * Vector::Ones(10)).norm(), 1e-14);

  // The only marginal mode of A is the constant vector.
  Eigen::EigenSolver<Matrix> es(s.A);
  int marginal = 0;
  for (Index i = 0; i < 10; ++i) {
    if (es.eigenvalues()[i].real() > -1e-12) {
      ++marginal;
      Vector mode = es.eigenvectors().col(i).real();
      mode /= mode[0];
      EXPECT_LE((mode - Vector::Ones(10)).norm(), 1e-10);
    }
  }
  EXPECT_EQ(marginal, 1);
  EXPECT_NO_THROW(solve_are(s.A, s.B, s.Q2, s.R2));
}

TEST(BurgersSystem, RejectsBadSpecs) {
  EXPECT_THROW(burgers_system({2, 1, 0.001}), ContractViolation);
  EXPECT_THROW(burgers_system({8, 0, 0.001}), ContractViolation);
  EXPECT_THROW(burgers_system({8, 2, 0.0}), ContractViolation);
  EXPECT_NO_THROW(burgers_system({7, 2, 0.01}));
}
