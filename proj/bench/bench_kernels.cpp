// Serial reference vs OpenMP kernels: robust verification trials and the
// barrier Hessian assembly.

#include <random>

#include <benchmark/benchmark.h>

#include "arinfo/informativity.hpp"
#include "arinfo/pendulum.hpp"
#include "arinfo/sdpfeas.hpp"

using namespace arinfo;

namespace {

const SynthesisResult& pendulum_result() {
  static const SynthesisResult r = [] {
    const auto f = pendulum::fixture("paper-B-recon");
    return synthesize_reduced(f.data, f.noise(), 2);
  }();
  return r;
}

void BM_VerifySerial(benchmark::State& state) {
  const auto& r = pendulum_result();
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_robust(r, static_cast<int>(state.range(0)), 1, false));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_VerifyParallel(benchmark::State& state) {
  const auto& r = pendulum_result();
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_robust(r, static_cast<int>(state.range(0)), 1, true));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct Block {
  Matrix ginv;
  std::vector<Matrix> store;
  std::vector<const Matrix*> bases;
  std::vector<int> vars;
};

Block make_block(int n, int k) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  auto rnd = [&](int r, int c) {
    Matrix a(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) a(i, j) = g(rng);
    return a;
  };
  Block b;
  const Matrix a = rnd(n, n);
  b.ginv = (a * a.transpose() + Matrix::Identity(n, n)).inverse();
  for (int i = 0; i < k; ++i) {
    const Matrix s = rnd(n, n);
    b.store.push_back(s + s.transpose());
  }
  for (int i = 0; i < k; ++i) {
    b.bases.push_back(&b.store[i]);
    b.vars.push_back(i);
  }
  return b;
}

template <bool Parallel>
void BM_Accumulate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int k = n * (n + 1) / 2;
  const Block b = make_block(n, k);
  Vector grad(k);
  Matrix hess(k, k);
  for (auto _ : state) {
    grad.setZero();
    hess.setZero();
    if constexpr (Parallel) {
      accumulate_block_parallel(b.ginv, b.bases, b.vars, grad, hess);
    } else {
      accumulate_block_serial(b.ginv, b.bases, b.vars, grad, hess);
    }
    benchmark::DoNotOptimize(hess.data());
  }
}

}  // namespace

BENCHMARK(BM_VerifySerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifyParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Accumulate<false>)->Arg(6)->Arg(12)->Arg(18)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Accumulate<true>)->Arg(6)->Arg(12)->Arg(18)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
