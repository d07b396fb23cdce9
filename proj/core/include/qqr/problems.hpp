#pragma once

#include <cstdint>

#include "qqr/albrekht.hpp"

namespace qqr {

struct RandomSpec {
  Index n = 1;
  Index m = 1;
  std::uint64_t seed = 0;
};

/// A, B, N with independent uniform [0,1) entries drawn in column-major order
/// (A, then B, then N); Q2 = I, R2 = I.
///
/// Draws come from std::mt19937_64 seeded with `seed`, each double built from
/// the top 53 bits of one 64-bit output, so systems are bit-identical across
/// platforms for a given spec.
QuadraticSystem random_system(const RandomSpec& spec);

struct BurgersSpec {
  Index n = 16;       // periodic grid cells (= nodal basis functions)
  Index m = 2;        // control patches
  double eps = 0.001; // viscosity
};

/// Linear finite elements for z_t = eps z_xx - (1/2)(z^2)_x + sum_k chi_k u_k
/// on the periodic unit interval.
struct BurgersDiscretization {
  Matrix mass;        // M, row stencil h/6 [1 4 1]
  Matrix stiffness;   // S, row stencil 1/h [-1 2 -1]
  Matrix convection;  // C(i, j*n+k) = 1/2 int phi_j phi_k phi_i'
  Matrix patches;     // P(i, k) = int chi_k phi_i
};

BurgersDiscretization burgers_discretization(const BurgersSpec& spec);

/// Standard-form QQR system: A = -eps M^{-1} S, N = M^{-1} C, B = M^{-1} P,
/// Q2 = M, R2 = I.
QuadraticSystem burgers_system(const BurgersSpec& spec);

}  // namespace qqr
