// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include "qsk/kernels.hpp"
#include "qsk/localops.hpp"
#include "qsk/random.hpp"

namespace {

using namespace qsk;

Mat operand(long n, unsigned seed) {
  Rng rng(seed);
  return random_ginibre(n, n, rng);
}

// Square operator on `factors` qubits.
Dims qubits(int factors) { return Dims(factors, 2); }

template <Mat (*F)(const Mat&, const Mat&)>
void bm_kron(benchmark::State& st) {
  const long n = st.range(0);
  const Mat a = operand(n, 1), b = operand(n, 2);
  for (auto _ : st) benchmark::DoNotOptimize(F(a, b));
  st.SetComplexityN(n * n * n * n);
}

template <Mat (*F)(const Mat&, const Dims&, const std::vector<int>&)>
void bm_partial_trace(benchmark::State& st) {
  const int f = static_cast<int>(st.range(0));
  const Mat x = operand(1L << f, 3);
  std::vector<int> traced;
  for (int i = 0; i < f; i += 2) traced.push_back(i);
  for (auto _ : st) benchmark::DoNotOptimize(F(x, qubits(f), traced));
}

template <Mat (*F)(const Mat&, const Dims&, const Dims&, const std::vector<int>&)>
void bm_permute(benchmark::State& st) {
  const int f = static_cast<int>(st.range(0));
  const Mat x = operand(1L << f, 4);
  std::vector<int> perm;
  for (int i = f - 1; i >= 0; --i) perm.push_back(i);
  for (auto _ : st) benchmark::DoNotOptimize(F(x, qubits(f), qubits(f), perm));
}

void bm_no_signaling(benchmark::State& st) {
  const int m = static_cast<int>(st.range(0));
  const PartySpaces ps(Dims(m, 2), Dims(m, 2));
  const long d = ps.total_dim();
  const Mat j = Mat::Identity(d, d) / static_cast<double>(1L << m);
  for (auto _ : st) benchmark::DoNotOptimize(no_signaling_check(j, ps));
}

}  // namespace

BENCHMARK(bm_kron<qsk::serial::kron>)->Name("kron/serial")->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(bm_kron<qsk::par::kron>)->Name("kron/par")->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(bm_partial_trace<qsk::serial::partial_trace>)->Name("partial_trace/serial")->DenseRange(6, 10, 2);
BENCHMARK(bm_partial_trace<qsk::par::partial_trace>)->Name("partial_trace/par")->DenseRange(6, 10, 2);
BENCHMARK(bm_permute<qsk::serial::permute_systems>)->Name("permute/serial")->DenseRange(6, 10, 2);
BENCHMARK(bm_permute<qsk::par::permute_systems>)->Name("permute/par")->DenseRange(6, 10, 2);
BENCHMARK(bm_no_signaling)->Name("no_signaling")->DenseRange(2, 4, 1);

BENCHMARK_MAIN();
