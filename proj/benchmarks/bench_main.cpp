#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "hlc/eval/metrics.hpp"
#include "hlc/patterns.hpp"
#include "hlc/shot_pool.hpp"

namespace {

using namespace hlc;
namespace ht = hlc::testing;

void BM_Embed(benchmark::State& state) {
  eval::Rng rng(1);
  const auto text = ht::random_requirement(rng, "appropriate");
  for (auto _ : state) benchmark::DoNotOptimize(deterministic_fallback_embed(text, 256));
}
BENCHMARK(BM_Embed);

void BM_Detect(benchmark::State& state) {
  const auto catalog = WeakWordCatalog::from_entries({"certain", "appropriate", "as soon as possible", "usually",
                                                      "several", "user-friendly", "if possible", "adequate"});
  const std::string text = ht::kText92;
  for (auto _ : state) benchmark::DoNotOptimize(detect(text, catalog));
}
BENCHMARK(BM_Detect);

void BM_Retrieve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  eval::Rng rng(2);
  std::vector<std::shared_ptr<const ValidatedExample>> records;
  for (std::size_t i = 0; i < n; ++i) {
    records.push_back(std::make_shared<const ValidatedExample>(
        ht::make_example("e" + std::to_string(i), "r" + std::to_string(i), ht::random_requirement(rng, "certain"),
                         "certain", i % 2 ? Label::defect : Label::not_defect, 256)));
  }
  const PoolSnapshot pool(256, records);
  const auto target = deterministic_fallback_embed(ht::random_requirement(rng, "certain"), 256);
  for (auto _ : state) benchmark::DoNotOptimize(retrieve_balanced(pool, target, 12, std::string_view("r0")));
}
BENCHMARK(BM_Retrieve)->Arg(20)->Arg(320)->Arg(5000);

void BM_Bootstrap(benchmark::State& state) {
  std::vector<eval::LabeledPair> pairs;
  eval::Rng rng(3);
  for (int i = 0; i < 422; ++i) {
    pairs.push_back({rng.uniform_index(2) ? Label::defect : Label::not_defect,
                     rng.uniform_index(2) ? Label::defect : Label::not_defect});
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::bootstrap_ci(pairs, 10'000, 0));
}
BENCHMARK(BM_Bootstrap)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
