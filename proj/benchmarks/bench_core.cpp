#include <benchmark/benchmark.h>

#include "incat/annotate.hpp"
#include "incat/kmodes.hpp"
#include "incat/themes.hpp"
#include "synthetic.hpp"

using namespace incat;

namespace {

const CategoricalMatrix& fixture() {
  static const auto sample = testing::sample_published_modes(6851, 0.05, 2018);
  return sample.rows;
}

void BM_Hamming(benchmark::State& state) {
  const auto& m = fixture();
  std::size_t i = 0, total = 0;
  for (auto _ : state) {
    total += hamming_dissimilarity(m.row(i % m.rows()), m.row((i * 7 + 3) % m.rows()));
    ++i;
  }
  benchmark::DoNotOptimize(total);
}
BENCHMARK(BM_Hamming);

void BM_Fit(benchmark::State& state) {
  const auto& m = fixture();
  const auto k = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(fit(m, {.k = k, .init = InitMethod::Huang, .seed = seed++}).cost);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.rows()));
}
BENCHMARK(BM_Fit)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_CombinationStats(benchmark::State& state) {
  const auto& m = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(combination_stats(m).combos.size());
}
BENCHMARK(BM_CombinationStats)->Unit(benchmark::kMicrosecond);

void BM_Preannotate(benchmark::State& state) {
  const auto& ts = TypeSystem::defaults();
  const auto dict = Dictionary::defaults();
  std::string text;
  for (int i = 0; i < 40; ++i)
    text += "SQL injection in the login form of Example CMS before 2.1 allows remote attackers to execute "
            "arbitrary code via a crafted HTTP request to the web interface. ";
  const Document doc{"bench", DocumentSource::ThreatReport, text};
  for (auto _ : state) benchmark::DoNotOptimize(preannotate(doc, dict, ts).size());
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Preannotate);

} // namespace
BENCHMARK_MAIN();
