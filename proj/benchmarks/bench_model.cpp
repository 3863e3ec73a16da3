#include "esgpv/inference.hpp"
#include "esgpv/model.hpp"
#include "esgpv/synthetic.hpp"
#include "esgpv/trainer.hpp"

#include <benchmark/benchmark.h>

using namespace esgpv;

namespace {

ModelConfig bench_config() {
    ModelConfig config;
    config.encoder.hidden_size = 32;
    config.encoder.num_layers = 2;
    config.encoder.num_heads = 4;
    config.encoder.ffn_size = 64;
    config.encoder.max_len = 64;
    config.head_dropout = 0.0;
    return config;
}

MultiTaskModel& bench_model() {
    static MultiTaskModel model = [] {
        const auto records = make_fixture(50, 77);
        std::vector<std::string> texts;
        for (const auto& rec : records) texts.push_back(enrich_context(rec));
        return MultiTaskModel(bench_config(), Vocabulary::build(texts, 2000), 7);
    }();
    return model;
}

void BM_EncoderForward(benchmark::State& state) {
    auto& model = bench_model();
    const auto input = tokenize("[PAGE 3] [ESG REPORT] We commit to reach net zero "
                                "emissions within two years as confirmed in our report",
                                model.vocab(), 64);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.forward(input, ag::Mode::Eval, nullptr));
    }
}
BENCHMARK(BM_EncoderForward);

void BM_ForwardBackward(benchmark::State& state) {
    auto& model = bench_model();
    const auto input = tokenize("[PAGE 3] [ESG REPORT] We pledge to improve safety",
                                model.vocab(), 64);
    for (auto _ : state) {
        model.params().zero_grad();
        auto out = model.forward(input, ag::Mode::Eval, nullptr);
        auto loss = combined_loss(task_loss(out.promise_logits, 1, model.config().loss),
                                  task_loss(out.evidence_logits, 0, model.config().loss),
                                  model.config().loss);
        ag::backward(loss);
        benchmark::DoNotOptimize(loss->val(0, 0));
    }
}
BENCHMARK(BM_ForwardBackward);

void BM_PredictTTA(benchmark::State& state) {
    auto& model = bench_model();
    const auto records = make_fixture(20, 78);
    TTAConfig config;
    config.n_passes = static_cast<int>(state.range(0));
    config.word_dropout_rate = 0.10;
    size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict_tta(records[i++ % records.size()], model, config));
    }
}
BENCHMARK(BM_PredictTTA)->Arg(1)->Arg(3);

} // namespace

BENCHMARK_MAIN();
