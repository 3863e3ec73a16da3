#include "esgpv/featurizer.hpp"
#include "esgpv/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace esgpv;

namespace {

const std::vector<PromiseRecord>& corpus() {
    static const auto records = make_fixture(200, 99);
    return records;
}

void BM_FeaturizePromise(benchmark::State& state) {
    const auto& records = corpus();
    size_t i = 0;
    for (auto _ : state) {
        const auto& rec = records[i++ % records.size()];
        benchmark::DoNotOptimize(
            featurize_promise(rec.raw_text, LexiconSet::builtin(),
                              default_sentiment_scorer()));
    }
}
BENCHMARK(BM_FeaturizePromise);

void BM_FeaturizeTiming(benchmark::State& state) {
    const auto& records = corpus();
    size_t i = 0;
    for (auto _ : state) {
        const auto& rec = records[i++ % records.size()];
        benchmark::DoNotOptimize(featurize_timing(rec.raw_text, LexiconSet::builtin(),
                                                  default_entity_detector()));
    }
}
BENCHMARK(BM_FeaturizeTiming);

void BM_TagBlockParse(benchmark::State& state) {
    const auto ann = featurize_timing("by 2040 and within two years", LexiconSet::builtin(),
                                      default_entity_detector());
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_tag_block(Subtask::Timing, ann.tag_text));
    }
}
BENCHMARK(BM_TagBlockParse);

} // namespace

BENCHMARK_MAIN();
