// Serial reference kernels vs the OpenMP versions the library dispatches to.
#include <benchmark/benchmark.h>

#include "rcsearch/random.hpp"
#include "rcsearch/tensor/kernels.hpp"

namespace k = rcs::tensor::kernels;
using rcs::tensor::Matrix;
using rcs::tensor::Segments;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  rcs::Rng rng(seed);
  Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(-1.0, 1.0);
  return m;
}

template <void (*Fn)(const Matrix &, const Matrix &, Matrix &)>
void BM_matmul(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const Matrix a = random_matrix(n, d, 1);
  const Matrix b = random_matrix(d, d, 2);
  Matrix out;
  for (auto _ : state) {
    Fn(a, b, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * d * d));
}

template <void (*Fn)(const Matrix &, const Matrix &, Matrix &)>
void BM_matmul_at_b(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const Matrix a = random_matrix(n, d, 1);
  const Matrix g = random_matrix(n, d, 2);
  Matrix out(d, d);
  for (auto _ : state) {
    Fn(a, g, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <void (*Fn)(const Matrix &, const Segments &, Matrix &)>
void BM_segment_softmax(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix logits = random_matrix(n, 1, 3);
  Segments segs;
  for (std::size_t used = 0; used < n; used += 4) segs.push(std::min<std::size_t>(4, n - used));
  Matrix out;
  for (auto _ : state) {
    Fn(logits, segs, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

#define SHAPES ->Args({64, 64})->Args({512, 64})->Args({512, 256})->Args({4096, 256})

BENCHMARK(BM_matmul<k::serial::matmul>) SHAPES;
BENCHMARK(BM_matmul<k::parallel::matmul>) SHAPES;
BENCHMARK(BM_matmul_at_b<k::serial::matmul_at_b_add>) SHAPES;
BENCHMARK(BM_matmul_at_b<k::parallel::matmul_at_b_add>) SHAPES;
BENCHMARK(BM_segment_softmax<k::serial::segment_softmax>)->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_segment_softmax<k::parallel::segment_softmax>)->Arg(1 << 12)->Arg(1 << 18);

BENCHMARK_MAIN();
