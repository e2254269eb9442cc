// Serial vs OpenMP kernel comparison. Sizes mimic per-chunk update work on a
// mid-sized stream: a sparse delta hitting a few thousand rows against rank
// 32-ish factors.

#include <benchmark/benchmark.h>

#include "streamrec/kernels.hpp"

using namespace streamrec;

namespace {

SparseCoo make_sparse_matrix(Index rows, Index cols, Index nnz, uint64_t seed) {
  Rng rng(seed);
  SparseCoo s = SparseCoo::matrix(rows, cols);
  for (Index n = 0; n < nnz; ++n)
    s.add(static_cast<Index>(rng.uniform() * rows),
          static_cast<Index>(rng.uniform() * cols), rng.gaussian());
  s.compress();
  return s;
}

SparseCoo make_sparse_tensor(Index n1, Index n2, Index n3, Index nnz, uint64_t seed) {
  Rng rng(seed);
  SparseCoo s = SparseCoo::tensor(n1, n2, n3);
  for (Index n = 0; n < nnz; ++n)
    s.add(static_cast<Index>(rng.uniform() * n1),
          static_cast<Index>(rng.uniform() * n2),
          static_cast<Index>(rng.uniform() * n3), rng.gaussian());
  s.compress();
  return s;
}

void bm_spmm_serial(benchmark::State& state) {
  SparseCoo s = make_sparse_matrix(20000, 5000, 400000, 1);
  CsrMatrix a = to_csr(s);
  Rng rng(2);
  Matrix x = rng.gaussian_matrix(5000, 32);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::spmm_serial(a, x));
}

void bm_spmm_omp(benchmark::State& state) {
  SparseCoo s = make_sparse_matrix(20000, 5000, 400000, 1);
  CsrMatrix a = to_csr(s);
  Rng rng(2);
  Matrix x = rng.gaussian_matrix(5000, 32);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::spmm_omp(a, x));
}

void bm_ttm_pair_serial(benchmark::State& state) {
  SparseCoo t = make_sparse_tensor(20000, 5000, 20, 400000, 3);
  Rng rng(4);
  Matrix u2 = rng.gaussian_matrix(5000, 32);
  Matrix u3 = rng.gaussian_matrix(20, 5);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::ttm_pair_serial(t, 1, u2, u3));
}

void bm_ttm_pair_omp(benchmark::State& state) {
  SparseCoo t = make_sparse_tensor(20000, 5000, 20, 400000, 3);
  Rng rng(4);
  Matrix u2 = rng.gaussian_matrix(5000, 32);
  Matrix u3 = rng.gaussian_matrix(20, 5);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::ttm_pair_omp(t, 1, u2, u3));
}

}  // namespace

BENCHMARK(bm_spmm_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_spmm_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_ttm_pair_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_ttm_pair_omp)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
