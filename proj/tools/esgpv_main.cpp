// esgpv: promise-verification pipeline CLI.
//
// Subcommands: featurize, tune, train, predict, evaluate, submit,
// make-fixture. Exit codes: 0 success, 2 validation error, 1 internal error.

#include "esgpv/checkpoint.hpp"
#include "esgpv/common.hpp"
#include "esgpv/config.hpp"
#include "esgpv/corpus.hpp"
#include "esgpv/featurizer.hpp"
#include "esgpv/inference.hpp"
#include "esgpv/metrics.hpp"
#include "esgpv/submission.hpp"
#include "esgpv/synthetic.hpp"
#include "esgpv/trainer.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace esgpv;

struct GlobalArgs {
    std::string config_path;
    uint64_t seed = 0;
    bool seed_set = false;
    bool permissive = false;

    PipelineConfig load() const {
        PipelineConfig cfg =
            config_path.empty() ? default_config() : load_config(config_path);
        if (seed_set) {
            cfg.seed = seed;
            cfg.multitask.seed = seed;
            cfg.tta.seed = seed;
        }
        return cfg;
    }

    SchemaMode schema_mode() const {
        return permissive ? SchemaMode::Permissive : SchemaMode::Strict;
    }
};

InputKind input_for_model(const std::string& model_name) {
    if (model_name == "base") return InputKind::Raw;
    if (model_name == "feature") return InputKind::Featurized;
    if (model_name == "combined") return InputKind::Context;
    throw ValidationError("unknown model '" + model_name + "'");
}

Subtask subtask_arg(int number) {
    const auto task = parse_subtask(number);
    if (!task) throw ValidationError("subtask must be 1, 2, 3 or 4");
    return *task;
}

int run_featurize(const GlobalArgs& global, int subtask_number, const std::string& in_path,
                  const std::string& out_path, const std::string& lexicon_dir) {
    const Subtask task = subtask_arg(subtask_number);
    const LexiconSet lexicons =
        lexicon_dir.empty() ? LexiconSet::builtin() : LexiconSet::load_dir(lexicon_dir);
    const LexiconSentimentScorer scorer(lexicons.positive_sentiment,
                                        lexicons.negative_sentiment);
    const RegexEntityDetector detector;

    auto records = load_corpus(in_path, global.schema_mode());
    for (auto& rec : records) {
        const auto annotation = featurize(task, rec.raw_text, lexicons, scorer, detector);
        rec.enriched_text = enrich(rec, annotation);
    }
    save_corpus_jsonl(out_path, records);
    std::cout << "featurized " << records.size() << " records for subtask "
              << subtask_number << " -> " << out_path << "\n";
    return 0;
}

int run_tune(const GlobalArgs& global, int subtask_number, const std::string& model_name,
             const std::string& in_path, const std::string& out_path, int n_trials_override) {
    const Subtask task = subtask_arg(subtask_number);
    const auto cfg = global.load();
    const int n_trials = n_trials_override > 0 ? n_trials_override : cfg.n_trials;
    const auto options = cfg.train_options(input_for_model(model_name));

    const auto all = load_corpus(in_path, global.schema_mode());
    const auto records = with_label(all, task);
    if (records.empty()) {
        throw ValidationError("no records carry a " + std::string(subtask_name(task)) +
                              " label");
    }

    std::ofstream log(out_path, std::ios::binary);
    if (!log) throw ValidationError("cannot open for writing: " + out_path);

    std::vector<TrialResult> history;
    for (int t = 0; t < n_trials; ++t) {
        const auto trial = sample_trials(cfg.search, n_trials, cfg.seed, history);
        auto result = run_cv_trial(records, trial, task, options, cfg.cv_folds, cfg.seed);
        log << trial_result_to_json(result) << "\n";
        log.flush();
        std::cout << "trial " << trial.trial_index << ": lr=" << trial.learning_rate
                  << " batch=" << trial.batch_size << " wd=" << trial.weight_decay
                  << " mean_val_loss=" << result.mean_validation_loss << "\n";
        history.push_back(std::move(result));
    }
    const auto& best = select_best(history);
    std::cout << "best trial " << best.config.trial_index << " (mean_val_loss="
              << best.mean_validation_loss << ") -> " << out_path << "\n";
    return 0;
}

std::vector<TrialResult> load_trial_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open trial log: " + path);
    std::vector<TrialResult> results;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        results.push_back(trial_result_from_json(line));
    }
    if (results.empty()) throw ValidationError("trial log is empty: " + path);
    return results;
}

int run_train(const GlobalArgs& global, const std::string& model_name, int subtask_number,
              const std::string& in_path, const std::string& out_dir,
              const std::string& trials_path, int epochs_override) {
    const auto cfg = global.load();
    const auto all = load_corpus(in_path, global.schema_mode());

    if (model_name == "combined") {
        const auto records = with_label(all, Subtask::Promise);
        if (records.empty()) throw ValidationError("no promise-labelled records");
        auto trained = train_multitask(records, cfg.multitask, cfg.model);
        save_checkpoint(out_dir, *trained.model, trained.metrics);
        std::cout << "combined model: best epoch " << trained.best_epoch << ", promise F1 "
                  << trained.metrics.at("promise_f1") << ", evidence F1 "
                  << trained.metrics.at("evidence_f1") << " -> " << out_dir << "\n";
        return 0;
    }

    const Subtask task = subtask_arg(subtask_number);
    const auto options = cfg.train_options(input_for_model(model_name));
    const auto records = with_label(all, task);
    if (records.empty()) {
        throw ValidationError("no records carry a " + std::string(subtask_name(task)) +
                              " label");
    }

    TrialConfig trial;
    int epochs = epochs_override > 0 ? epochs_override : 5;
    if (!trials_path.empty()) {
        const auto history = load_trial_log(trials_path);
        const auto& best = select_best(history);
        trial = best.config;
        if (epochs_override <= 0 && !best.fold_best_epochs.empty()) {
            epochs = median_epoch(best.fold_best_epochs);
        }
    } else {
        trial.learning_rate = 2e-5;
        trial.batch_size = 8;
        trial.weight_decay = 0.01;
    }

    auto trained = train_final(records, trial, task, epochs, options);
    save_checkpoint(out_dir, *trained.model, trained.metrics);
    std::cout << model_name << " model for subtask " << subtask_number << ": "
              << trained.epochs_trained << " epochs, final train loss "
              << trained.metrics.at("train_loss") << " -> " << out_dir << "\n";
    return 0;
}

int run_predict(const GlobalArgs& global, const std::string& model_dir,
                const std::string& in_path, const std::string& out_path, int tta_passes,
                double word_dropout, bool no_tta, bool no_vary_metadata) {
    auto cfg = global.load();
    auto loaded = load_checkpoint(model_dir);

    TTAConfig tta = cfg.tta;
    if (tta_passes > 0) tta.n_passes = tta_passes;
    if (word_dropout >= 0.0) tta.word_dropout_rate = word_dropout;
    if (no_vary_metadata) tta.vary_metadata = false;

    const auto records = load_corpus(in_path, global.schema_mode());
    std::vector<Prediction> predictions;
    predictions.reserve(records.size());
    for (const auto& rec : records) {
        predictions.push_back(no_tta ? plain_predict(rec, *loaded.model, tta)
                                     : predict_tta(rec, *loaded.model, tta));
    }
    save_predictions_jsonl(out_path, predictions);
    std::cout << "predicted " << predictions.size() << " records ("
              << (no_tta ? 1 : tta.n_passes) << " passes) -> " << out_path << "\n";
    return 0;
}

int run_evaluate(const GlobalArgs& global, const std::string& submission_path,
                 const std::string& gold_path, const std::string& report_path) {
    const auto submission = load_submission_csv(submission_path);
    const auto gold = load_corpus(gold_path, global.schema_mode());
    const auto report = evaluate(submission, gold);
    const auto json_text = report.to_json();
    std::cout << json_text << "\n";
    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary);
        if (!out) throw ValidationError("cannot open for writing: " + report_path);
        out << json_text << "\n";
    }
    return 0;
}

int run_submit(const GlobalArgs& global, const std::string& pred12_path,
               const std::string& pred3_path, const std::string& pred4_path,
               const std::string& in_path, const std::string& out_path) {
    const auto records = load_corpus(in_path, global.schema_mode());
    const auto pred12 = load_predictions_jsonl(pred12_path);
    const auto pred34 = merge_predictions(
        {load_predictions_jsonl(pred3_path), load_predictions_jsonl(pred4_path)});
    const auto rows = assemble_submission(pred12, pred34, records);
    write_submission_csv(out_path, rows);
    std::cout << "wrote " << rows.size() << " submission rows -> " << out_path << "\n";
    return 0;
}

int run_make_fixture(const GlobalArgs& global, int n, const std::string& out_path) {
    const auto cfg = global.load();
    const auto records = make_fixture(n, cfg.seed);
    save_corpus_jsonl(out_path, records);
    std::cout << "wrote " << records.size() << " synthetic records -> " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ESG promise-verification pipeline"};
    app.require_subcommand(1);

    GlobalArgs global;
    app.add_option("--config", global.config_path, "train.yaml configuration file");
    app.add_option("--seed", global.seed, "override the configured seed")
        ->each([&](const std::string&) { global.seed_set = true; });
    app.add_flag("--permissive", global.permissive,
                 "accept dependent labels on non-promise rows");

    // featurize
    auto* featurize_cmd =
        app.add_subcommand("featurize", "prepend subtask feature tags to records");
    int subtask_number = 1;
    std::string in_path, out_path, lexicon_dir;
    featurize_cmd->add_option("--subtask", subtask_number, "subtask 1-4")->required();
    featurize_cmd->add_option("--in", in_path, "input records (.jsonl or .csv)")->required();
    featurize_cmd->add_option("--out", out_path, "output records with enriched_text")
        ->required();
    featurize_cmd->add_option("--lexicons", lexicon_dir,
                              "lexicon directory (default: built-in bundle)");

    // tune
    auto* tune_cmd = app.add_subcommand("tune", "hyperparameter search with k-fold CV");
    int tune_subtask = 1, tune_trials = 0;
    std::string tune_in, tune_out, tune_model = "feature";
    tune_cmd->add_option("--subtask", tune_subtask, "subtask 1-4")->required();
    tune_cmd->add_option("--model", tune_model, "base or feature (default feature)");
    tune_cmd->add_option("--in", tune_in, "labelled records")->required();
    tune_cmd->add_option("--out", tune_out, "trial log (.jsonl)")->required();
    tune_cmd->add_option("--trials", tune_trials, "number of trials (default from config)");

    // train
    auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
    std::string train_model, train_in, train_out, train_trials;
    int train_subtask = 0, train_epochs = 0;
    train_cmd->add_option("--model", train_model, "base, feature or combined")->required();
    train_cmd->add_option("--subtask", train_subtask, "subtask 1-4 (base/feature)");
    train_cmd->add_option("--in", train_in, "labelled records")->required();
    train_cmd->add_option("--out", train_out, "checkpoint directory")->required();
    train_cmd->add_option("--trials", train_trials, "trial log from tune (base/feature)");
    train_cmd->add_option("--epochs", train_epochs, "override the epoch budget");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "test-time-augmented inference");
    std::string predict_model, predict_in, predict_out;
    int tta_passes = 0;
    double word_dropout = -1.0;
    bool no_tta = false, no_vary_metadata = false;
    predict_cmd->add_option("--model", predict_model, "checkpoint directory")->required();
    predict_cmd->add_option("--in", predict_in, "records to score")->required();
    predict_cmd->add_option("--out", predict_out, "predictions (.jsonl)")->required();
    predict_cmd->add_option("--tta-passes", tta_passes, "forward passes (default 3)");
    predict_cmd->add_option("--word-dropout", word_dropout, "word dropout rate (default 0.10)");
    predict_cmd->add_flag("--no-tta", no_tta, "single un-augmented forward pass");
    predict_cmd->add_flag("--no-vary-metadata", no_vary_metadata,
                          "keep the source tag fixed across passes");

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score a submission against gold");
    std::string eval_submission, eval_gold, eval_report;
    evaluate_cmd->add_option("--submission", eval_submission, "submission CSV")->required();
    evaluate_cmd->add_option("--gold", eval_gold, "gold records")->required();
    evaluate_cmd->add_option("--out", eval_report, "write the JSON report here too");

    // submit
    auto* submit_cmd =
        app.add_subcommand("submit", "merge predictions into a submission CSV");
    std::string sub_pred12, sub_pred3, sub_pred4, sub_in, sub_out;
    submit_cmd->add_option("--pred12", sub_pred12, "combined-model predictions")->required();
    submit_cmd->add_option("--pred3", sub_pred3, "clarity predictions")->required();
    submit_cmd->add_option("--pred4", sub_pred4, "timing predictions")->required();
    submit_cmd->add_option("--in", sub_in, "records covered by the submission")->required();
    submit_cmd->add_option("--out", sub_out, "submission CSV")->required();

    // make-fixture
    auto* fixture_cmd =
        app.add_subcommand("make-fixture", "write a synthetic labelled corpus");
    int fixture_n = 200;
    std::string fixture_out;
    fixture_cmd->add_option("--n", fixture_n, "number of records (default 200)");
    fixture_cmd->add_option("--out", fixture_out, "output records (.jsonl)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (featurize_cmd->parsed()) {
            return run_featurize(global, subtask_number, in_path, out_path, lexicon_dir);
        }
        if (tune_cmd->parsed()) {
            return run_tune(global, tune_subtask, tune_model, tune_in, tune_out, tune_trials);
        }
        if (train_cmd->parsed()) {
            return run_train(global, train_model, train_subtask, train_in, train_out,
                             train_trials, train_epochs);
        }
        if (predict_cmd->parsed()) {
            return run_predict(global, predict_model, predict_in, predict_out, tta_passes,
                               word_dropout, no_tta, no_vary_metadata);
        }
        if (evaluate_cmd->parsed()) {
            return run_evaluate(global, eval_submission, eval_gold, eval_report);
        }
        if (submit_cmd->parsed()) {
            return run_submit(global, sub_pred12, sub_pred3, sub_pred4, sub_in, sub_out);
        }
        if (fixture_cmd->parsed()) {
            return run_make_fixture(global, fixture_n, fixture_out);
        }
    } catch (const ValidationError& e) {
        std::cerr << "esgpv: error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "esgpv: internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
