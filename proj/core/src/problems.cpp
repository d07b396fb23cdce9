#include "qqr/problems.hpp"

#include <algorithm>
#include <random>

namespace qqr {

namespace {

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

void fill_uniform(Matrix& M, std::mt19937_64& gen) {
  for (Index j = 0; j < M.cols(); ++j) {
    for (Index i = 0; i < M.rows(); ++i) {
      M(i, j) = uniform01(gen);
    }
  }
}

}  // namespace

QuadraticSystem random_system(const RandomSpec& spec) {
  if (spec.n < 1 || spec.m < 1) {
    throw ContractViolation("random_system: n and m must be >= 1");
  }
  std::mt19937_64 gen(spec.seed);
  QuadraticSystem sys;
  sys.A.resize(spec.n, spec.n);
  sys.B.resize(spec.n, spec.m);
  sys.N.resize(spec.n, spec.n * spec.n);
  fill_uniform(sys.A, gen);
  fill_uniform(sys.B, gen);
  fill_uniform(sys.N, gen);
  sys.Q2 = Matrix::Identity(spec.n, spec.n);
  sys.R2 = Matrix::Identity(spec.m, spec.m);
  return sys;
}

BurgersDiscretization burgers_discretization(const BurgersSpec& spec) {
  if (spec.n < 3) {
    throw ContractViolation("burgers: n must be >= 3");
  }
  if (spec.m < 1) {
    throw ContractViolation("burgers: m must be >= 1");
  }
  if (!(spec.eps > 0.0)) {
    throw ContractViolation("burgers: eps must be positive");
  }
  const Index n = spec.n;
  const Index m = spec.m;
  const double h = 1.0 / static_cast<double>(n);

  BurgersDiscretization fe;
  fe.mass = Matrix::Zero(n, n);
  fe.stiffness = Matrix::Zero(n, n);
  fe.convection = Matrix::Zero(n, n * n);
  fe.patches = Matrix::Zero(n, m);

  // Element e spans [e h, (e+1) h] with local nodes e and (e+1) mod n.
  const double local_mass[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
  const double local_slope[2] = {-1.0 / h, 1.0 / h};
  for (Index e = 0; e < n; ++e) {
    const Index node[2] = {e, (e + 1) % n};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        fe.mass(node[a], node[b]) += local_mass[a][b];
        fe.stiffness(node[a], node[b]) += h * local_slope[a] * local_slope[b];
      }
    }
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
          fe.convection(node[i], node[j] * n + node[k]) += 0.5 * local_slope[i] * local_mass[j][k];
        }
      }
    }

    // Patch sources: integrate the linear hats exactly over each overlap.
    const double x0 = static_cast<double>(e) * h;
    const double x1 = static_cast<double>(e + 1) * h;
    for (Index k = 0; k < m; ++k) {
      const double lo = std::max(x0, static_cast<double>(k) / static_cast<double>(m));
      const double hi = std::min(x1, static_cast<double>(k + 1) / static_cast<double>(m));
      if (!(hi > lo)) continue;
      const double left_lo = (x1 - lo) / h, left_hi = (x1 - hi) / h;
      const double right_lo = (lo - x0) / h, right_hi = (hi - x0) / h;
      fe.patches(node[0], k) += 0.5 * (hi - lo) * (left_lo + left_hi);
      fe.patches(node[1], k) += 0.5 * (hi - lo) * (right_lo + right_hi);
    }
  }
  return fe;
}

QuadraticSystem burgers_system(const BurgersSpec& spec) {
  const BurgersDiscretization fe = burgers_discretization(spec);
  Eigen::LLT<Matrix> mass(fe.mass);
  if (mass.info() != Eigen::Success) {
    throw NumericalFailure("burgers: mass matrix is not positive definite");
  }
  QuadraticSystem sys;
  sys.A = -spec.eps * mass.solve(fe.stiffness);
  sys.B = mass.solve(fe.patches);
  sys.N = mass.solve(fe.convection);
  sys.Q2 = fe.mass;
  sys.R2 = Matrix::Identity(spec.m, spec.m);
  return sys;
}

}  // namespace qqr
