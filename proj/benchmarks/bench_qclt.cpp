// bench_qclt.cpp — hot paths: operator apply, dense diagonalization, KPM
// moment recursion, Lanczos propagation and the Lyapunov cluster sum.
#include <benchmark/benchmark.h>

#include "qclt/clt.hpp"
#include "qclt/eig.hpp"
#include "qclt/krylov.hpp"
#include "qclt/model.hpp"
#include "qclt/spectrum.hpp"
#include "qclt/state.hpp"

using namespace qclt;

namespace {

HamiltonianOperator make_op(int n) {
  return HamiltonianOperator(build_ising(n, 1.0, 1.0, Boundary::open));
}

void BM_OperatorApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HamiltonianOperator op(build_ising(n, 1.0, 1.0, Boundary::open),
                               /*dense_threshold=*/0);
  const Vector in = all_plus_state(op.spec()).full_vector();
  Vector out = Vector::Zero(in.size());
  for (auto _ : state) {
    out.setZero();
    op.apply_add(in, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * in.size());
}
BENCHMARK(BM_OperatorApply)->Arg(8)->Arg(10)->Arg(12)->Arg(14);

void BM_DenseEigh(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix h = make_op(n).dense();
  for (auto _ : state) {
    const EigenSystem sys = eigh(h);
    benchmark::DoNotOptimize(sys.values.data());
  }
}
BENCHMARK(BM_DenseEigh)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_KpmDensity(benchmark::State& state) {
  const int moments = static_cast<int>(state.range(0));
  const HamiltonianOperator op(build_ising(12, 1.0, 1.0, Boundary::open),
                               /*dense_threshold=*/0);
  const ProductState st = all_up_state(op.spec());
  for (auto _ : state) {
    const SpectralMeasure density = spectral_density_kpm(op, st, moments);
    benchmark::DoNotOptimize(density.weights.data());
  }
  state.SetItemsProcessed(state.iterations() * moments);
}
BENCHMARK(BM_KpmDensity)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_KrylovExpm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HamiltonianOperator op(build_ising(n, 1.0, 1.0, Boundary::open),
                               /*dense_threshold=*/0);
  const Vector v = all_plus_state(op.spec()).full_vector();
  const ApplyFn apply = [&op](const Vector& in, Vector& out) {
    op.apply_add(in, out);
  };
  for (auto _ : state) {
    const KrylovResult res = expm_apply(apply, v, 0.5);
    benchmark::DoNotOptimize(res.vector.data());
  }
}
BENCHMARK(BM_KrylovExpm)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_LyapunovSum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ModelSpec spec = build_ising(n, 1.0, 1.0, Boundary::open);
  // fixed k: block windows stay small, so cost scales with the block count
  const BlockDecomposition blocks(spec, all_up_state(spec), 6);
  for (auto _ : state) {
    const LyapunovResult lyap = lyapunov_sum(blocks);
    benchmark::DoNotOptimize(lyap.sum);
  }
}
BENCHMARK(BM_LyapunovSum)->Arg(12)->Arg(18)->Arg(24);

void BM_ExactMeasure(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HamiltonianOperator op = make_op(n);
  const ProductState st = all_up_state(op.spec());
  op.eigensystem();  // cache the factorization; the loop times the contraction
  for (auto _ : state) {
    const SpectralMeasure measure = spectral_measure_exact(op, st);
    benchmark::DoNotOptimize(measure.weights.data());
  }
}
BENCHMARK(BM_ExactMeasure)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
