#include "esgpv/tpe.hpp"

#include "esgpv/common.hpp"
#include "esgpv/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace esgpv {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

double clamp(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

// Parzen window over 1-D observations with a fixed Gaussian bandwidth.
struct Kde {
    std::vector<double> obs;
    double bandwidth;

    double log_density(double x) const {
        double sum = 0.0;
        for (double o : obs) {
            const double z = (x - o) / bandwidth;
            sum += std::exp(-0.5 * z * z);
        }
        const double norm =
            static_cast<double>(obs.size()) * bandwidth * 2.5066282746310002;
        return std::log(sum / norm + 1e-12);
    }
};

Kde make_kde(std::vector<double> obs, double lo, double hi) {
    const double range = hi - lo;
    const double n = static_cast<double>(obs.size());
    double bw = range * 1.06 * std::pow(n, -0.2);
    bw = clamp(bw, range / 20.0, range);
    return {std::move(obs), bw};
}

double sample_continuous(DetRng& rng, const std::vector<double>& good,
                         const std::vector<double>& bad, double lo, double hi,
                         int n_candidates) {
    const Kde g = make_kde(good, lo, hi);
    const Kde b = make_kde(bad, lo, hi);
    double best_x = lo;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_candidates; ++i) {
        const double center = g.obs[rng.uniform_int(g.obs.size())];
        const double x = clamp(rng.normal(center, g.bandwidth), lo, hi);
        const double score = g.log_density(x) - b.log_density(x);
        if (score > best_score) {
            best_score = score;
            best_x = x;
        }
    }
    return best_x;
}

int sample_categorical(DetRng& rng, const std::vector<int>& values,
                       const std::vector<int>& good, const std::vector<int>& bad,
                       int n_candidates) {
    const auto k = values.size();
    std::vector<double> pg(k, 1.0), pb(k, 1.0); // +1 smoothing
    for (int v : good) {
        for (size_t i = 0; i < k; ++i) {
            if (values[i] == v) pg[i] += 1.0;
        }
    }
    for (int v : bad) {
        for (size_t i = 0; i < k; ++i) {
            if (values[i] == v) pb[i] += 1.0;
        }
    }
    double g_total = 0.0, b_total = 0.0;
    for (size_t i = 0; i < k; ++i) {
        g_total += pg[i];
        b_total += pb[i];
    }
    for (size_t i = 0; i < k; ++i) {
        pg[i] /= g_total;
        pb[i] /= b_total;
    }

    size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_candidates; ++c) {
        // Draw a candidate from the good distribution.
        double u = rng.uniform();
        size_t pick = k - 1;
        for (size_t i = 0; i < k; ++i) {
            if (u < pg[i]) {
                pick = i;
                break;
            }
            u -= pg[i];
        }
        const double score = std::log(pg[pick]) - std::log(pb[pick]);
        if (score > best_score) {
            best_score = score;
            best = pick;
        }
    }
    return values[best];
}

} // namespace

TrialConfig sample_trials(const SearchSpace& space, int n_trials, uint64_t seed,
                          const std::vector<TrialResult>& history, const TpeOptions& options) {
    if (n_trials < 1) throw ValidationError("n_trials must be at least 1");
    const auto trial_index = static_cast<int>(history.size());
    if (trial_index >= n_trials) {
        throw ValidationError("trial budget exhausted: " + std::to_string(trial_index) +
                              " of " + std::to_string(n_trials));
    }

    DetRng rng(mix_seed(seed, static_cast<uint64_t>(trial_index), 0x7b5e));
    TrialConfig config;
    config.trial_index = trial_index;

    if (trial_index < options.n_startup || history.empty()) {
        config.learning_rate =
            clamp(std::exp(rng.uniform(std::log(space.lr_min), std::log(space.lr_max))),
                  space.lr_min, space.lr_max);
        config.batch_size =
            space.batch_sizes[rng.uniform_int(space.batch_sizes.size())];
        config.weight_decay = rng.uniform(space.wd_min, space.wd_max);
        return config;
    }

    auto sorted = history;
    std::sort(sorted.begin(), sorted.end(), [](const TrialResult& a, const TrialResult& b) {
        if (a.mean_validation_loss != b.mean_validation_loss)
            return a.mean_validation_loss < b.mean_validation_loss;
        return a.config.trial_index < b.config.trial_index;
    });
    const auto n_good = std::max<size_t>(
        1, static_cast<size_t>(std::ceil(options.gamma_quantile *
                                         static_cast<double>(sorted.size()))));

    std::vector<double> lr_good, lr_bad, wd_good, wd_bad;
    std::vector<int> batch_good, batch_bad;
    for (size_t i = 0; i < sorted.size(); ++i) {
        const auto& c = sorted[i].config;
        if (i < n_good) {
            lr_good.push_back(std::log(c.learning_rate));
            wd_good.push_back(c.weight_decay);
            batch_good.push_back(c.batch_size);
        } else {
            lr_bad.push_back(std::log(c.learning_rate));
            wd_bad.push_back(c.weight_decay);
            batch_bad.push_back(c.batch_size);
        }
    }
    if (lr_bad.empty()) { // degenerate split: reuse good as the background
        lr_bad = lr_good;
        wd_bad = wd_good;
        batch_bad = batch_good;
    }

    config.learning_rate =
        clamp(std::exp(sample_continuous(rng, lr_good, lr_bad, std::log(space.lr_min),
                                         std::log(space.lr_max), options.n_candidates)),
              space.lr_min, space.lr_max);
    config.weight_decay = sample_continuous(rng, wd_good, wd_bad, space.wd_min, space.wd_max,
                                            options.n_candidates);
    config.batch_size = sample_categorical(rng, space.batch_sizes, batch_good, batch_bad,
                                           options.n_candidates);
    return config;
}

const TrialResult& select_best(const std::vector<TrialResult>& results) {
    if (results.empty()) throw ValidationError("no trial results");
    const TrialResult* best = &results.front();
    for (const auto& r : results) {
        if (r.mean_validation_loss < best->mean_validation_loss ||
            (r.mean_validation_loss == best->mean_validation_loss &&
             r.config.trial_index < best->config.trial_index)) {
            best = &r;
        }
    }
    return *best;
}

std::string trial_result_to_json(const TrialResult& result) {
    ordered_json j;
    j["trial"] = result.config.trial_index;
    j["learning_rate"] = result.config.learning_rate;
    j["batch_size"] = result.config.batch_size;
    j["weight_decay"] = result.config.weight_decay;
    j["fold_losses"] = result.fold_losses;
    j["mean_validation_loss"] = result.mean_validation_loss;
    if (!result.fold_best_epochs.empty()) j["fold_best_epochs"] = result.fold_best_epochs;
    return j.dump();
}

TrialResult trial_result_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ValidationError("invalid trial log line: " + std::string(e.what()));
    }
    TrialResult r;
    r.config.trial_index = j.at("trial").get<int>();
    r.config.learning_rate = j.at("learning_rate").get<double>();
    r.config.batch_size = j.at("batch_size").get<int>();
    r.config.weight_decay = j.at("weight_decay").get<double>();
    r.fold_losses = j.at("fold_losses").get<std::vector<double>>();
    r.mean_validation_loss = j.at("mean_validation_loss").get<double>();
    if (j.contains("fold_best_epochs")) {
        r.fold_best_epochs = j.at("fold_best_epochs").get<std::vector<int>>();
    }
    return r;
}

} // namespace esgpv
