#include <benchmark/benchmark.h>

#include <random>

#include "qqr/qqr.hpp"

using namespace qqr;

namespace {

Matrix stable_factor(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Matrix A(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) A(i, j) = dist(gen);
  const double shift = Eigen::EigenSolver<Matrix>(A, false).eigenvalues().real().maxCoeff() + 1.0;
  return A - shift * Matrix::Identity(n, n);
}

Vector random_rhs(Index len, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Vector v(len);
  for (Index i = 0; i < len; ++i) v[i] = dist(gen);
  return v;
}

void BM_KronSumApply(benchmark::State& state) {
  const Index n = state.range(0);
  const int d = static_cast<int>(state.range(1));
  const Matrix A = stable_factor(n, 1);
  const Vector v = random_rhs(int_pow(n, d), 2);
  for (auto _ : state) benchmark::DoNotOptimize(kron_sum_apply(A, d, v));
  state.SetItemsProcessed(state.iterations() * v.size());
}
BENCHMARK(BM_KronSumApply)->Args({10, 3})->Args({20, 3})->Args({10, 4})->Args({20, 4});

void BM_SolveKronSum(benchmark::State& state) {
  const Index n = state.range(0);
  const int d = static_cast<int>(state.range(1));
  const Matrix A = stable_factor(n, 3);
  const Vector c = random_rhs(int_pow(n, d), 4);
  for (auto _ : state) benchmark::DoNotOptimize(solve_kron_sum(A, d, c).v);
}
BENCHMARK(BM_SolveKronSum)->Args({6, 3})->Args({10, 3})->Args({20, 3})->Args({6, 4})->Args({10, 4})
    ->Unit(benchmark::kMillisecond);

void BM_SolveFull(benchmark::State& state) {
  const Index n = state.range(0);
  const int d = static_cast<int>(state.range(1));
  const Matrix A = stable_factor(n, 3);
  const Vector c = random_rhs(int_pow(n, d), 4);
  for (auto _ : state) benchmark::DoNotOptimize(solve_full(A, d, c).v);
}
BENCHMARK(BM_SolveFull)->Args({6, 3})->Args({10, 3})->Args({6, 4})->Unit(benchmark::kMillisecond);

void BM_SolveQqrBurgers(benchmark::State& state) {
  const QuadraticSystem sys = burgers_system({state.range(0), 2, 0.001});
  const int degree = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(solve_qqr(sys, degree).feedback.degree());
}
BENCHMARK(BM_SolveQqrBurgers)->Args({16, 2})->Args({32, 2})->Args({16, 3})->Args({24, 3})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
