#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "esgpv/common.hpp"
#include "esgpv/corpus.hpp"
#include "esgpv/rng.hpp"

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

using namespace esgpv;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

std::map<int, int> fold_class_counts(const FoldSplit& fold,
                                     const std::vector<PromiseRecord>& records,
                                     Subtask task) {
    std::map<int, int> counts;
    for (const auto& id : fold.validation_ids) {
        const auto& rec = record_by_id(records, id);
        ++counts[*label_index(*rec.labels, task)];
    }
    return counts;
}

} // namespace

TEST_SUITE("corpus") {

TEST_CASE("jsonl loading canonicalizes labels") {
    const auto path = write_temp(
        "corpus_ok.jsonl",
        R"({"id":"a","text":"We pledge X","page_number":3,"promise_status":"Yes","evidence_status":"No","evidence_quality":"Not Clear","verification_timeline":"2-5 years"})"
        "\n"
        R"({"id":"b","text":"Nothing here","promise_status":"no"})"
        "\n");
    const auto records = load_corpus(path, SchemaMode::Strict);
    REQUIRE(records.size() == 2);
    CHECK(records[0].page_number == 3);
    CHECK(records[0].labels->promise_status == PromiseStatus::Yes);
    CHECK(records[0].labels->clarity == Clarity::NotClear);
    CHECK(records[0].labels->timing == Timing::TwoToFiveYears);
    CHECK(records[1].labels->promise_status == PromiseStatus::No);
    CHECK_FALSE(records[1].labels->evidence_status.has_value());
}

TEST_CASE("empty file yields an empty corpus") {
    const auto path = write_temp("corpus_empty.jsonl", "");
    CHECK(load_corpus(path, SchemaMode::Strict).empty());
}

TEST_CASE("dependent labels on a non-promise row fail in strict mode only") {
    const auto path = write_temp(
        "corpus_dep.jsonl",
        R"({"id":"a","text":"t","promise_status":"No","evidence_status":"Yes"})"
        "\n");
    CHECK_THROWS_AS(load_corpus(path, SchemaMode::Strict), ValidationError);
    const auto records = load_corpus(path, SchemaMode::Permissive);
    CHECK(records[0].labels->evidence_status == EvidenceStatus::Yes);
}

TEST_CASE("malformed rows name the row and field") {
    const auto path =
        write_temp("corpus_bad.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\"}\n");
    try {
        load_corpus(path, SchemaMode::Strict);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string what = e.what();
        CHECK(what.find("row 2") != std::string::npos);
        CHECK(what.find("text") != std::string::npos);
    }
}

TEST_CASE("duplicate ids are rejected") {
    const auto path = write_temp("corpus_dup.jsonl",
                                 "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n");
    CHECK_THROWS_AS(load_corpus(path, SchemaMode::Strict), ValidationError);
}

TEST_CASE("csv adapter maps columns by header") {
    const auto path = write_temp("corpus.csv",
                                 "id,text,page_number,promise_status,extra\n"
                                 "a,\"We commit, firmly\",7,Yes,ignored\n"
                                 "b,Plain text,,No,\n");
    const auto records = load_corpus(path, SchemaMode::Strict);
    REQUIRE(records.size() == 2);
    CHECK(records[0].raw_text == "We commit, firmly");
    CHECK(records[0].page_number == 7);
    CHECK_FALSE(records[1].page_number.has_value());
}

TEST_CASE("record round-trips through jsonl") {
    auto records = fixtures::binary_corpus(2, 2);
    records[0].labels->evidence_status = EvidenceStatus::Yes;
    records[0].labels->clarity = Clarity::Misleading;
    records[0].labels->timing = Timing::Other;
    records[0].page_number = 12;
    const auto path = std::filesystem::temp_directory_path() / "corpus_rt.jsonl";
    save_corpus_jsonl(path, records);
    const auto loaded = load_corpus(path, SchemaMode::Strict);
    REQUIRE(loaded.size() == records.size());
    CHECK(loaded[0].labels->clarity == Clarity::Misleading);
    CHECK(loaded[0].labels->timing == Timing::Other);
    CHECK(loaded[0].page_number == 12);
}

TEST_CASE("kfold: 8 records 4/4 at k=4 gives 1/1 validation folds") {
    const auto records = fixtures::binary_corpus(4, 4);
    const auto folds = stratified_kfold(records, 4, Subtask::Promise, 7);
    for (const auto& fold : folds) {
        auto counts = fold_class_counts(fold, records, Subtask::Promise);
        CHECK(counts[0] == 1);
        CHECK(counts[1] == 1);
    }
}

TEST_CASE("kfold: 9 records 5/4 at k=4 matches the allocation oracle") {
    const auto records = fixtures::binary_corpus(5, 4);
    const auto folds = stratified_kfold(records, 4, Subtask::Promise, 11);
    std::vector<std::vector<long long>> got;
    for (const auto& fold : folds) {
        auto counts = fold_class_counts(fold, records, Subtask::Promise);
        got.push_back({counts[0], counts[1]});
    }
    std::sort(got.begin(), got.end());
    // class order is No=0, Yes=1
    CHECK(got == oracles::stratified_fold_counts({4, 5}, 4));
}

TEST_CASE("kfold is deterministic per seed and byte-identical in manifests") {
    const auto records = fixtures::binary_corpus(6, 6);
    const auto a = stratified_kfold(records, 3, Subtask::Promise, 99);
    const auto b = stratified_kfold(records, 3, Subtask::Promise, 99);
    CHECK(split_manifest_json(99, 3, a) == split_manifest_json(99, 3, b));
    const auto c = stratified_kfold(records, 3, Subtask::Promise, 100);
    CHECK(split_manifest_json(99, 3, a) != split_manifest_json(100, 3, c));
}

TEST_CASE("kfold partition and stratification properties hold on random corpora") {
    DetRng rng(123);
    for (int trial = 0; trial < 40; ++trial) {
        const int k = 2 + static_cast<int>(rng.uniform_int(4));
        const int n_yes = k + static_cast<int>(rng.uniform_int(20));
        const int n_no = k + static_cast<int>(rng.uniform_int(20));
        const auto records = fixtures::binary_corpus(n_yes, n_no);
        const auto folds = stratified_kfold(records, k, Subtask::Promise, rng.next());

        // Partition: validation ids are disjoint and cover the corpus.
        std::set<std::string> seen;
        size_t total = 0;
        for (const auto& fold : folds) {
            for (const auto& id : fold.validation_ids) {
                CHECK(seen.insert(id).second);
                ++total;
            }
            std::set<std::string> train(fold.train_ids.begin(), fold.train_ids.end());
            for (const auto& id : fold.validation_ids) CHECK(train.count(id) == 0);
            CHECK(fold.train_ids.size() + fold.validation_ids.size() == records.size());
        }
        CHECK(total == records.size());

        // Stratification: |fold proportion - corpus proportion| <= 1/|fold|.
        const double corpus_prop =
            static_cast<double>(n_yes) / static_cast<double>(n_yes + n_no);
        for (const auto& fold : folds) {
            auto counts = fold_class_counts(fold, records, Subtask::Promise);
            const double fold_size = static_cast<double>(fold.validation_ids.size());
            const double prop = static_cast<double>(counts[1]) / fold_size;
            CHECK(std::abs(prop - corpus_prop) <= 1.0 / fold_size + 1e-12);
        }
    }
}

TEST_CASE("kfold rejects classes smaller than k") {
    const auto records = fixtures::binary_corpus(3, 8);
    try {
        stratified_kfold(records, 4, Subtask::Promise, 1);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("Yes") != std::string::npos);
    }
    CHECK_THROWS_AS(stratified_kfold(records, 1, Subtask::Promise, 1), ValidationError);
}

TEST_CASE("holdout: exact proportions 60/40 at fraction 0.9") {
    const auto records = fixtures::binary_corpus(60, 40);
    const auto [train, val] = holdout_split(records, 0.9, Subtask::Promise, 5);
    CHECK(train.size() == 90);
    CHECK(val.size() == 10);
    int yes = 0, no = 0;
    for (const auto& id : val) {
        (record_by_id(records, id).labels->promise_status == PromiseStatus::Yes ? yes : no)++;
    }
    CHECK(yes == 6);
    CHECK(no == 4);
}

TEST_CASE("holdout: 10 records 5/5 at fraction 0.9 rounds to one validation record") {
    const auto records = fixtures::binary_corpus(5, 5);
    const auto [train, val] = holdout_split(records, 0.9, Subtask::Promise, 3);
    CHECK(val.size() == 1);
    CHECK(train.size() == 9);
}

TEST_CASE("holdout: fraction 0.75 on 8 records 4/4 gives 1/1 validation") {
    const auto records = fixtures::binary_corpus(4, 4);
    const auto [train, val] = holdout_split(records, 0.75, Subtask::Promise, 3);
    REQUIRE(val.size() == 2);
    int yes = 0, no = 0;
    for (const auto& id : val) {
        (record_by_id(records, id).labels->promise_status == PromiseStatus::Yes ? yes : no)++;
    }
    CHECK(yes == 1);
    CHECK(no == 1);
}

TEST_CASE("holdout matches the largest-remainder oracle on small corpora") {
    DetRng rng(77);
    for (int trial = 0; trial < 60; ++trial) {
        const int n_yes = 1 + static_cast<int>(rng.uniform_int(8));
        const int n_no = 1 + static_cast<int>(rng.uniform_int(8));
        if (n_yes + n_no > 12 || n_yes + n_no < 3) continue;
        const double fraction = 0.5 + 0.4 * rng.uniform();
        const auto records = fixtures::binary_corpus(n_yes, n_no);
        const auto [train, val] = holdout_split(records, fraction, Subtask::Promise,
                                                rng.next());
        long long yes = 0, no = 0;
        for (const auto& id : val) {
            (record_by_id(records, id).labels->promise_status == PromiseStatus::Yes ? yes
                                                                                    : no)++;
        }
        const auto optimal = oracles::optimal_holdout_counts({static_cast<long long>(n_no),
                                                              static_cast<long long>(n_yes)},
                                                             fraction);
        CHECK(optimal.count({no, yes}) == 1);
    }
}

TEST_CASE("holdout rejects a single-class corpus") {
    const auto records = fixtures::binary_corpus(6, 0);
    CHECK_THROWS_AS(holdout_split(records, 0.9, Subtask::Promise, 1), ValidationError);
}

TEST_CASE("split manifest round-trips") {
    const auto records = fixtures::binary_corpus(4, 4);
    const auto folds = stratified_kfold(records, 2, Subtask::Promise, 21);
    const auto text = split_manifest_json(21, 2, folds);
    const auto parsed = parse_split_manifest(text);
    REQUIRE(parsed.size() == folds.size());
    for (size_t i = 0; i < folds.size(); ++i) {
        CHECK(parsed[i].fold_index == folds[i].fold_index);
        CHECK(parsed[i].train_ids == folds[i].train_ids);
        CHECK(parsed[i].validation_ids == folds[i].validation_ids);
    }
}

} // TEST_SUITE
