#include <benchmark/benchmark.h>

#include <vector>

#include "hdsgd/kernels.hpp"
#include "hdsgd/sampler.hpp"

using namespace hdsgd;

namespace {

RowMat random_rows(int d, int cols) {
  Sampler rng(1, Stream::test);
  RowMat w(d, cols);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < cols; ++j) w(i, j) = rng.normal();
  return w;
}

Exec exec_of(const benchmark::State& s) { return s.range(1) ? Exec::parallel : Exec::serial; }

void BM_Project(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const RowMat w = random_rows(d, 2);
  std::vector<double> a(d, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::project(w, a, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * d);
}

void BM_SgdUpdate(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  RowMat w = random_rows(d, 2);
  std::vector<double> a(d, 0.5);
  SmallVec g = SmallVec::Constant(1, 1e-3);
  for (auto _ : state) {
    kernels::sgd_update(w, 1, a, g, 1e-6, 0.0, exec_of(state));
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * d);
}

void BM_Overlap(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const RowMat w = random_rows(d, 4);
  std::vector<double> lambda(d, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::overlap(w, lambda, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * d);
}

void BM_GroupRhs(benchmark::State& state) {
  const int groups = static_cast<int>(state.range(0));
  const int p = 2;
  std::vector<double> lambda(groups), mult(groups, 1.0), s(groups * p * p), ds(s.size());
  for (int g = 0; g < groups; ++g) {
    lambda[g] = 0.5 + g / double(groups);
    s[g * 4 + 0] = 1.0, s[g * 4 + 1] = 0.2, s[g * 4 + 2] = 0.2, s[g * 4 + 3] = 1.0;
  }
  kernels::GroupRhsArgs args{groups, p, 1, lambda.data(), mult.data(), SmallMat::Identity(2, 2),
                             SmallMat::Constant(1, 1, 0.3), 1.0, 0.0, true};
  for (auto _ : state) {
    kernels::group_rhs(args, s, ds, exec_of(state));
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * groups);
}

void args(benchmark::internal::Benchmark* b) {
  for (int d : {1 << 12, 1 << 16, 1 << 20})
    for (int par : {0, 1}) b->Args({d, par});
  b->ArgNames({"d", "parallel"});
}

}  // namespace

BENCHMARK(BM_Project)->Apply(args);
BENCHMARK(BM_SgdUpdate)->Apply(args);
BENCHMARK(BM_Overlap)->Apply(args);
BENCHMARK(BM_GroupRhs)->Apply(args);

BENCHMARK_MAIN();
