// Serial vs OpenMP kernels, the Chebyshev filter and per-user prediction on a
// synthetic clustered graph.

#include <vector>

#include <benchmark/benchmark.h>

#include "chebycf/kernels.hpp"
#include "chebycf/pipeline.hpp"
#include "chebycf/synthetic.hpp"

using namespace chebycf;

namespace {

const InteractionDataset& dataset() {
  static const InteractionDataset d = [] {
    synthetic::ClusteredOptions o;
    o.users = 6000;
    o.items = 5000;
    o.clusters = 12;
    o.in_density = 0.03;
    o.out_density = 0.001;
    o.test_fraction = 0.0;
    return synthetic::clustered_dataset(o);
  }();
  return d;
}

const NormalizedGraph& graph() {
  static const NormalizedGraph g = normalize(dataset());
  return g;
}

template <bool Parallel>
void BM_CsrBlockProduct(benchmark::State& state) {
  const CsrMatrix& a = graph().r_tilde_t();
  const auto width = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(a.cols * width, 1.0), y(a.rows * width);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::csr_block_product(a, x, y, width);
    } else {
      kernels::serial::csr_block_product(a, x, y, width);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.nnz() * width));
}
BENCHMARK(BM_CsrBlockProduct<false>)->Name("csr_block_product/serial")->Arg(1)->Arg(32)->Arg(256);
BENCHMARK(BM_CsrBlockProduct<true>)->Name("csr_block_product/omp")->Arg(1)->Arg(32)->Arg(256);

void BM_ChebyshevFilter(benchmark::State& state) {
  const auto spec = ChebyFilterSpec::plateau(4.0, static_cast<int>(state.range(0)));
  std::vector<std::size_t> users(64);
  for (std::size_t u = 0; u < users.size(); ++u) users[u] = u;
  const SignalBlock x = dataset().train_signals(users);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_chebyshev_filter(spec, graph(), x));
  }
}
BENCHMARK(BM_ChebyshevFilter)->Arg(2)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_PredictPerUser(benchmark::State& state) {
  static const ChebyCFModel model = fit(dataset(), {4.0, 0.3, 64, 0.2, 8});
  const auto batch = static_cast<std::size_t>(state.range(0));
  std::vector<std::size_t> users(batch);
  for (std::size_t u = 0; u < batch; ++u) users[u] = u;
  const SignalBlock x = dataset().train_signals(users);
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_batch(model, x));
  }
  state.counters["per_user_s"] = benchmark::Counter(
      static_cast<double>(batch * state.iterations()),
      benchmark::Counter::kIsRate | benchmark::Counter::kInvert);
}
BENCHMARK(BM_PredictPerUser)->Arg(1)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
