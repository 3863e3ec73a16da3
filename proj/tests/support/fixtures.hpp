#pragma once

#include "esgpv/corpus.hpp"
#include "esgpv/rng.hpp"

#include <string>
#include <vector>

namespace fixtures {

// Minimal labelled corpus with the requested per-class counts on the
// promise label.
inline std::vector<esgpv::PromiseRecord> binary_corpus(int n_yes, int n_no) {
    std::vector<esgpv::PromiseRecord> records;
    int i = 0;
    for (int c = 0; c < n_yes + n_no; ++c) {
        esgpv::PromiseRecord rec;
        rec.id = "rec" + std::to_string(100 + i++);
        rec.raw_text = c < n_yes ? "we pledge to improve results soon"
                                 : "the office reviewed routine matters";
        esgpv::LabelSet labels;
        labels.promise_status =
            c < n_yes ? esgpv::PromiseStatus::Yes : esgpv::PromiseStatus::No;
        rec.labels = labels;
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace fixtures
