// Serial reference vs OpenMP kernels. Set OMP_NUM_THREADS to vary threads.

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "ncci/kernels.hpp"

namespace {

using namespace ncci;

struct OrdinalData {
  std::vector<double> x;
  std::vector<int> y;
  std::vector<double> thresholds = {-2.0, -1.0, -0.3, 0.3, 1.0, 2.0};
  std::vector<double> beta = {0.4, -0.2, 0.1, 0.3};
  kernels::OrdinalRows rows;
};

OrdinalData make_ordinal(std::size_t n) {
  OrdinalData d;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> cat(0, 6);
  d.x.resize(n * d.beta.size());
  for (auto& v : d.x) v = normal(rng);
  d.y.resize(n);
  for (auto& v : d.y) v = cat(rng);
  d.rows = {d.x, d.y, n, d.beta.size(), 7};
  return d;
}

template <bool Parallel>
void BM_OrdinalLoglikGrad(benchmark::State& state) {
  auto d = make_ordinal(static_cast<std::size_t>(state.range(0)));
  std::vector<double> grad(d.thresholds.size() + d.beta.size());
  for (auto _ : state) {
    double ll = Parallel ? kernels::parallel::ordinal_loglik_grad(d.rows, d.thresholds, d.beta, grad)
                         : kernels::serial::ordinal_loglik_grad(d.rows, d.thresholds, d.beta, grad);
    benchmark::DoNotOptimize(ll);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

std::vector<TokenSequence> random_sentences(std::size_t n, std::uint64_t seed) {
  static const char* vocab[] = {"more", "people", "have", "been", "to", "russia",
                                "than", "i",      "the",  "a",    "not", "students"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(6, 14), word(0, 11);
  std::vector<TokenSequence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> toks(static_cast<std::size_t>(len(rng)));
    for (auto& t : toks) t = vocab[word(rng)];
    out.push_back(TokenSequence::from_tokens(std::move(toks)));
  }
  return out;
}

template <bool Parallel>
void BM_BatchDld(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto a = random_sentences(n, 1), b = random_sentences(n, 2);
  for (auto _ : state) {
    auto d = Parallel ? kernels::parallel::batch_dld(a, b, {}) : kernels::serial::batch_dld(a, b, {});
    benchmark::DoNotOptimize(d.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_OrdinalLoglikGrad<false>)->Name("ordinal_loglik_grad/serial")->Arg(10000)->Arg(100000);
BENCHMARK(BM_OrdinalLoglikGrad<true>)->Name("ordinal_loglik_grad/parallel")->Arg(10000)->Arg(100000);
BENCHMARK(BM_BatchDld<false>)->Name("batch_dld/serial")->Arg(1000)->Arg(10000);
BENCHMARK(BM_BatchDld<true>)->Name("batch_dld/parallel")->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
