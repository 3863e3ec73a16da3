#include "esgpv/trainer.hpp"

#include "esgpv/common.hpp"
#include "esgpv/heads.hpp"
#include "esgpv/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace esgpv {

namespace {

// Tokenized training view of one record.
struct Example {
    const PromiseRecord* record;
    TokenizedText input;
    int label = -1;          // single-task label
    int promise_label = -1;  // multitask
    int evidence_label = -1; // -1 when absent
};

std::vector<std::string> transformed_texts(const std::vector<PromiseRecord>& records,
                                           InputKind kind, Subtask task) {
    std::vector<std::string> texts;
    texts.reserve(records.size());
    for (const auto& rec : records) texts.push_back(transform_text(kind, task, rec));
    return texts;
}

std::vector<Example> make_single_examples(const std::vector<PromiseRecord>& records,
                                          InputKind kind, Subtask task,
                                          const Vocabulary& vocab, int max_len) {
    std::vector<Example> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        const auto label = rec.labels ? label_index(*rec.labels, task) : std::nullopt;
        if (!label) {
            throw ValidationError("record '" + rec.id + "' lacks a " +
                                  std::string(subtask_name(task)) + " label");
        }
        Example ex;
        ex.record = &rec;
        ex.input = tokenize(transform_text(kind, task, rec), vocab, max_len);
        ex.label = *label;
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<const Example*> pick(const std::vector<Example>& examples,
                                 const std::vector<std::string>& ids) {
    std::map<std::string, const Example*> by_id;
    for (const auto& ex : examples) by_id[ex.record->id] = &ex;
    std::vector<const Example*> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw InternalError("split references unknown id " + id);
        out.push_back(it->second);
    }
    return out;
}

double mean_validation_loss(SingleTaskModel& model, const std::vector<const Example*>& val,
                            const LossConfig& base_loss) {
    // Selection loss: the configured kind without class weighting, so trial
    // scores stay comparable across weighting choices.
    LossConfig loss_cfg = base_loss;
    loss_cfg.class_weights.reset();
    double total = 0.0;
    for (const auto* ex : val) {
        auto logits = model.forward_logits(ex->input, ag::Mode::Eval, nullptr);
        total += task_loss(logits, ex->label, loss_cfg)->val(0, 0);
    }
    return total / static_cast<double>(val.size());
}

struct SingleRun {
    double best_val_loss = 0.0;
    int best_epoch = 0;
    int epochs_run = 0;
    double final_train_loss = 0.0;
};

// Shared Model 1-2 loop: constant learning rate, per-epoch validation with
// early stopping when `val` is non-empty and patience >= 0.
SingleRun train_single_model(SingleTaskModel& model, const std::vector<const Example*>& train,
                             const std::vector<const Example*>& val, const TrialConfig& config,
                             const TrainOptions& options, int max_epochs, int patience,
                             uint64_t run_seed) {
    LossConfig loss_cfg = model.config().loss;
    if (options.class_weighted) {
        std::vector<int> labels;
        labels.reserve(train.size());
        for (const auto* ex : train) labels.push_back(ex->label);
        loss_cfg.class_weights =
            inverse_frequency_weights(labels, class_count(model.task()));
    }

    AdamW optimizer(config.weight_decay);
    DetRng data_rng(mix_seed(run_seed, 0xda7a));
    DetRng dropout_rng(mix_seed(run_seed, 0xd409));

    std::vector<const Example*> order = train;
    EarlyStopper stopper(patience);
    SingleRun run;
    std::map<std::string, ag::Mat> best_params;

    for (int epoch = 1; epoch <= max_epochs; ++epoch) {
        data_rng.shuffle(order);
        double epoch_loss = 0.0;
        size_t at = 0;
        while (at < order.size()) {
            const size_t batch_end =
                std::min(order.size(), at + static_cast<size_t>(config.batch_size));
            const double inv = 1.0 / static_cast<double>(batch_end - at);
            model.params().zero_grad();
            ag::Value batch_loss;
            for (size_t i = at; i < batch_end; ++i) {
                auto logits =
                    model.forward_logits(order[i]->input, ag::Mode::Train, &dropout_rng);
                auto loss = ag::scale(task_loss(logits, order[i]->label, loss_cfg), inv);
                batch_loss = batch_loss ? ag::add(batch_loss, loss) : loss;
            }
            if (!std::isfinite(batch_loss->val(0, 0))) {
                throw InternalError("non-finite training loss at epoch " +
                                    std::to_string(epoch));
            }
            epoch_loss += batch_loss->val(0, 0) * static_cast<double>(batch_end - at);
            ag::backward(batch_loss);
            optimizer.step(model.params(), config.learning_rate);
            at = batch_end;
        }
        run.final_train_loss = epoch_loss / static_cast<double>(order.size());
        run.epochs_run = epoch;

        if (val.empty() || patience < 0) continue;
        const double val_loss = mean_validation_loss(model, val, model.config().loss);
        const bool stop = stopper.record(val_loss);
        if (stopper.best_epoch() == epoch) best_params = model.params().snapshot();
        if (stop) break;
    }

    if (!val.empty() && patience >= 0) {
        run.best_val_loss = stopper.best_loss();
        run.best_epoch = stopper.best_epoch();
        if (!best_params.empty()) model.params().restore(best_params);
    } else {
        run.best_epoch = run.epochs_run;
        run.best_val_loss = run.final_train_loss;
    }
    return run;
}

} // namespace

void TrainSchedule::validate() const {
    if (epochs < 1) throw ValidationError("schedule: epochs must be >= 1");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
        throw ValidationError("schedule: warmup_fraction must be in [0,1)");
    }
    if (grad_accum_steps < 1) throw ValidationError("schedule: grad_accum_steps must be >= 1");
    if (micro_batch < 1) throw ValidationError("schedule: micro_batch must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValidationError("schedule: train_fraction must be in (0,1)");
    }
}

bool EarlyStopper::record(double validation_loss) {
    ++epoch_;
    if (validation_loss < best_) {
        best_ = validation_loss;
        best_epoch_ = epoch_;
    }
    return epoch_ - best_epoch_ >= patience_;
}

bool BestTracker::record(double score) {
    ++epoch_;
    if (score > best_) {
        best_ = score;
        best_epoch_ = epoch_;
        return true;
    }
    return false;
}

int median_epoch(std::vector<int> epochs) {
    if (epochs.empty()) throw ValidationError("median_epoch: empty input");
    std::sort(epochs.begin(), epochs.end());
    return epochs[(epochs.size() - 1) / 2];
}

std::vector<double> inverse_frequency_weights(const std::vector<int>& labels, int n_classes) {
    std::vector<double> counts(static_cast<size_t>(n_classes), 0.0);
    for (int label : labels) {
        if (label < 0 || label >= n_classes) {
            throw ValidationError("label out of range in weight computation");
        }
        counts[static_cast<size_t>(label)] += 1.0;
    }
    const double n = static_cast<double>(labels.size());
    std::vector<double> weights(static_cast<size_t>(n_classes), 0.0);
    int present = 0;
    for (int c = 0; c < n_classes; ++c) {
        if (counts[static_cast<size_t>(c)] > 0) ++present;
    }
    double sum = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        if (counts[static_cast<size_t>(c)] > 0) {
            weights[static_cast<size_t>(c)] =
                n / (static_cast<double>(present) * counts[static_cast<size_t>(c)]);
            sum += weights[static_cast<size_t>(c)] * counts[static_cast<size_t>(c)];
        }
    }
    // Normalize so the weighted mean over the data stays 1.
    for (auto& w : weights) w *= n / sum;
    return weights;
}

TrialResult run_cv_trial(const std::vector<PromiseRecord>& records, const TrialConfig& config,
                         Subtask subtask, const TrainOptions& options, int k, uint64_t seed) {
    const auto folds = stratified_kfold(records, k, subtask, seed);
    const auto vocab = Vocabulary::build(
        transformed_texts(records, options.input, subtask), options.model.encoder.vocab_limit);
    const auto examples = make_single_examples(records, options.input, subtask, vocab,
                                               options.model.encoder.max_len);

    TrialResult result;
    result.config = config;
    for (const auto& fold : folds) {
        const uint64_t run_seed = mix_seed(seed, static_cast<uint64_t>(config.trial_index),
                                           static_cast<uint64_t>(fold.fold_index));
        SingleTaskModel model(options.model, subtask, options.input, vocab,
                              mix_seed(run_seed, 0x111));
        apply_freezing(model.encoder(), model.params(),
                       options.model.encoder.trainable_top_layers);

        const auto train = pick(examples, fold.train_ids);
        const auto val = pick(examples, fold.validation_ids);
        const auto run = train_single_model(model, train, val, config, options,
                                            options.max_epochs, options.patience, run_seed);
        result.fold_losses.push_back(run.best_val_loss);
        result.fold_best_epochs.push_back(run.best_epoch);
    }
    double sum = 0.0;
    for (double loss : result.fold_losses) sum += loss;
    result.mean_validation_loss = sum / static_cast<double>(result.fold_losses.size());
    return result;
}

TrainedSingle train_final(const std::vector<PromiseRecord>& records, const TrialConfig& config,
                          Subtask subtask, int epochs, const TrainOptions& options) {
    if (epochs < 1) throw ValidationError("train_final: epochs must be >= 1");
    const auto vocab = Vocabulary::build(
        transformed_texts(records, options.input, subtask), options.model.encoder.vocab_limit);
    const auto examples = make_single_examples(records, options.input, subtask, vocab,
                                               options.model.encoder.max_len);
    std::vector<const Example*> train;
    train.reserve(examples.size());
    for (const auto& ex : examples) train.push_back(&ex);

    const uint64_t run_seed = mix_seed(options.seed, static_cast<uint64_t>(subtask), 0xf17a);
    TrainedSingle out;
    out.model = std::make_unique<SingleTaskModel>(options.model, subtask, options.input, vocab,
                                                  mix_seed(run_seed, 0x111));
    apply_freezing(out.model->encoder(), out.model->params(),
                   options.model.encoder.trainable_top_layers);

    const auto run =
        train_single_model(*out.model, train, {}, config, options, epochs, -1, run_seed);
    out.epochs_trained = run.epochs_run;
    out.metrics = {{"train_loss", run.final_train_loss},
                   {"epochs", static_cast<double>(run.epochs_run)},
                   {"learning_rate", config.learning_rate},
                   {"batch_size", static_cast<double>(config.batch_size)},
                   {"weight_decay", config.weight_decay}};
    return out;
}

TrainedMulti train_multitask(const std::vector<PromiseRecord>& records,
                             const TrainSchedule& schedule, const ModelConfig& model_config) {
    schedule.validate();
    model_config.loss.validate();

    const auto [train_ids, val_ids] =
        holdout_split(records, schedule.train_fraction, Subtask::Promise, schedule.seed);
    if (val_ids.empty()) throw ValidationError("multitask: empty validation split");

    const auto vocab =
        Vocabulary::build(transformed_texts(records, InputKind::Context, Subtask::Promise),
                          model_config.encoder.vocab_limit);

    std::vector<Example> examples;
    examples.reserve(records.size());
    for (const auto& rec : records) {
        if (!rec.labels) {
            throw ValidationError("record '" + rec.id + "' lacks labels");
        }
        Example ex;
        ex.record = &rec;
        ex.input = tokenize(transform_text(InputKind::Context, Subtask::Promise, rec), vocab,
                            model_config.encoder.max_len);
        ex.promise_label = static_cast<int>(rec.labels->promise_status);
        const auto ev = label_index(*rec.labels, Subtask::Evidence);
        ex.evidence_label = ev ? *ev : -1;
        examples.push_back(std::move(ex));
    }
    auto train = pick(examples, train_ids);
    auto val = pick(examples, val_ids);

    TrainedMulti out;
    out.model = std::make_unique<MultiTaskModel>(model_config, vocab,
                                                 mix_seed(schedule.seed, 0x333));
    auto& model = *out.model;

    AdamW optimizer(schedule.weight_decay);
    DetRng data_rng(mix_seed(schedule.seed, 0xda7a));
    DetRng dropout_rng(mix_seed(schedule.seed, 0xd409));

    const auto group_size =
        static_cast<size_t>(schedule.micro_batch) * static_cast<size_t>(schedule.grad_accum_steps);
    const auto updates_per_epoch =
        static_cast<int64_t>((train.size() + group_size - 1) / group_size);
    const int64_t total_updates = updates_per_epoch * schedule.epochs;

    auto record_loss = [&](const Example& ex, ag::Mode mode, DetRng* rng) {
        auto fwd = model.forward(ex.input, mode, rng);
        auto lp = task_loss(fwd.promise_logits, ex.promise_label, model_config.loss);
        ag::Value le = ex.evidence_label >= 0
                           ? task_loss(fwd.evidence_logits, ex.evidence_label,
                                       model_config.loss)
                           : ag::constant(ag::Mat::Zero(1, 1));
        return combined_loss(lp, le, model_config.loss);
    };

    auto eval_f1 = [&]() {
        std::vector<int> p_pred, p_gold, e_pred, e_gold;
        for (const auto* ex : val) {
            auto fwd = model.forward(ex->input, ag::Mode::Eval, nullptr);
            const auto pp = softmax_vector(fwd.promise_logits->val.row(0).transpose());
            p_pred.push_back(pp(1) >= 0.5 ? 1 : 0);
            p_gold.push_back(ex->promise_label);
            if (ex->evidence_label >= 0) {
                const auto ep = softmax_vector(fwd.evidence_logits->val.row(0).transpose());
                e_pred.push_back(ep(1) >= 0.5 ? 1 : 0);
                e_gold.push_back(ex->evidence_label);
            }
        }
        const double f1_p = f1_score(p_pred, p_gold, Averaging::Binary, 2);
        const double f1_e =
            e_gold.empty() ? 0.0 : f1_score(e_pred, e_gold, Averaging::Binary, 2);
        return std::make_pair(f1_p, f1_e);
    };

    BestTracker tracker;
    std::map<std::string, ag::Mat> best_params;
    double best_f1_p = 0.0, best_f1_e = 0.0;
    int64_t update = 0;
    for (int epoch = 1; epoch <= schedule.epochs; ++epoch) {
        data_rng.shuffle(train);
        size_t at = 0;
        while (at < train.size()) {
            const size_t group_end = std::min(train.size(), at + group_size);
            const double inv = 1.0 / static_cast<double>(group_end - at);
            model.params().zero_grad();
            size_t micro_at = at;
            while (micro_at < group_end) {
                const size_t micro_end =
                    std::min(group_end, micro_at + static_cast<size_t>(schedule.micro_batch));
                ag::Value micro_loss;
                for (size_t i = micro_at; i < micro_end; ++i) {
                    auto loss =
                        ag::scale(record_loss(*train[i], ag::Mode::Train, &dropout_rng), inv);
                    micro_loss = micro_loss ? ag::add(micro_loss, loss) : loss;
                }
                if (!std::isfinite(micro_loss->val(0, 0))) {
                    throw InternalError(
                        "non-finite loss (epoch " + std::to_string(epoch) + ", update " +
                        std::to_string(update + 1) + ", lr " +
                        std::to_string(lr_at(update + 1, total_updates,
                                             schedule.warmup_fraction, schedule.lr)) + ")");
                }
                ag::backward(micro_loss);
                micro_at = micro_end;
            }
            ++update;
            optimizer.step(model.params(), lr_at(update, total_updates,
                                                 schedule.warmup_fraction, schedule.lr));
            at = group_end;
        }

        const auto [f1_p, f1_e] = eval_f1();
        if (tracker.record((f1_p + f1_e) / 2.0)) {
            best_params = model.params().snapshot();
            best_f1_p = f1_p;
            best_f1_e = f1_e;
        }
    }

    if (!best_params.empty()) model.params().restore(best_params);
    out.best_epoch = tracker.best_epoch();
    out.metrics = {{"promise_f1", best_f1_p},
                   {"evidence_f1", best_f1_e},
                   {"mean_f1", tracker.best_score()},
                   {"best_epoch", static_cast<double>(tracker.best_epoch())},
                   {"updates", static_cast<double>(update)}};
    return out;
}

} // namespace esgpv
