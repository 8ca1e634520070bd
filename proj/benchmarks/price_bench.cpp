#include <benchmark/benchmark.h>

#include "bargain/price.hpp"

namespace {

void BM_ExtractPrice(benchmark::State& state) {
  const std::string text =
      "I understand this is a lovely balloon, but it's more than I planned to spend. "
      "Between the two of us, would you let it go for $15.50 if I pay right away?";
  for (auto _ : state) benchmark::DoNotOptimize(bargain::extract_price(text));
}
BENCHMARK(BM_ExtractPrice);

void BM_ExtractPriceNoMatch(benchmark::State& state) {
  const std::string text(static_cast<std::size_t>(state.range(0)), 'a');
  for (auto _ : state) benchmark::DoNotOptimize(bargain::extract_price(text));
}
BENCHMARK(BM_ExtractPriceNoMatch)->Range(64, 4096);

}  // namespace
