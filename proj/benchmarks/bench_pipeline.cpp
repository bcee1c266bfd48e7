#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "topseg/extract.hpp"
#include "topseg/inference.hpp"
#include "topseg/metrics.hpp"
#include "topseg/random.hpp"
#include "topseg/sampling.hpp"
#include "topseg/scorers.hpp"
#include "topseg/synth.hpp"
#include "topseg/text.hpp"

using namespace topseg;

namespace {

const corpus::Corpus& synth_corpus() {
  static const corpus::Corpus c = [] {
    synth::SynthConfig cfg;
    return synth::generate(cfg);
  }();
  return c;
}

inference::Segmentation random_seg(Rng& rng, std::size_t n) {
  inference::Segmentation s;
  s.doc_id = "d";
  s.labels.resize(n - 1);
  for (auto& y : s.labels) y = rng.bernoulli(0.2) ? 0 : 1;
  return s;
}

}  // namespace

static void BM_Pk(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ref = random_seg(rng, n), hyp = random_seg(rng, n);
  const std::size_t k = metrics::default_window(ref, metrics::WindowMode::half_avg_segment);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::pk(ref, hyp, k));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Pk)->Arg(30)->Arg(300)->Arg(3000);

static void BM_Tokenize(benchmark::State& state) {
  std::string text;
  for (const auto& s : synth_corpus().documents.front().sections)
    for (const auto& p : s.paragraphs) text += p + " We’re not liable for U.S. $1,000.50 in damages. ";
  for (auto _ : state) benchmark::DoNotOptimize(text::tokenize(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Tokenize);

static void BM_Enumeration(benchmark::State& state) {
  const std::vector<std::string> lines = {"Section 3. Liability", "iv. Warranty", "Generally speaking", "b) Fees", "12: Law"};
  for (auto _ : state)
    for (const auto& l : lines) benchmark::DoNotOptimize(extract::recognize_enumeration(l));
}
BENCHMARK(BM_Enumeration);

static void BM_Sample(benchmark::State& state) {
  const auto strategy = static_cast<sampling::Strategy>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sampling::sample_pairs(synth_corpus(), {strategy, 3, 3, 0}));
  state.SetLabel(std::string(sampling::to_string(strategy)));
}
BENCHMARK(BM_Sample)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

static void BM_TrainTfidf(benchmark::State& state) {
  const auto pairs = sampling::sample_pairs(synth_corpus(), {sampling::Strategy::CP, 3, 3, 0}).pairs;
  const auto chunks = sampling::all_chunks(synth_corpus(), sampling::ChunkKind::paragraph);
  for (auto _ : state) benchmark::DoNotOptimize(scorers::train_scorer({}, chunks, pairs, {}));
}
BENCHMARK(BM_TrainTfidf)->Unit(benchmark::kMillisecond);

static void BM_ScorePair(benchmark::State& state) {
  const auto pairs = sampling::sample_pairs(synth_corpus(), {sampling::Strategy::CP, 3, 3, 0}).pairs;
  const auto chunks = sampling::all_chunks(synth_corpus(), sampling::ChunkKind::paragraph);
  const auto model = scorers::train_scorer({}, chunks, pairs, {});
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& p = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(model.score(p.a, p.b));
  }
}
BENCHMARK(BM_ScorePair);

static void BM_SegmentCorpus(benchmark::State& state) {
  const auto pairs = sampling::sample_pairs(synth_corpus(), {sampling::Strategy::CP, 3, 3, 0}).pairs;
  const auto chunks = sampling::all_chunks(synth_corpus(), sampling::ChunkKind::paragraph);
  const auto model = scorers::train_scorer({}, chunks, pairs, {});
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(inference::segment_corpus(synth_corpus(), model, {}, threads));
}
BENCHMARK(BM_SegmentCorpus)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
