// Drives the installed-style CLI binary end to end over a temp workspace.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "esgpv/corpus.hpp"
#include "esgpv/submission.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef ESGPV_CLI_PATH
#error "ESGPV_CLI_PATH must point at the esgpv binary"
#endif

namespace {

namespace fs = std::filesystem;

const fs::path g_work = fs::temp_directory_path() / "esgpv_cli_work";

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ESGPV_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string path_of(const char* name) { return (g_work / name).string(); }

} // namespace

TEST_SUITE("cli") {

TEST_CASE("full pipeline: fixture, featurize, train, predict, submit, evaluate") {
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    // Speedy desk-scale config.
    {
        std::ofstream cfg(g_work / "train.yaml");
        cfg << "seed: 42\n"
               "encoder: {hidden_size: 16, num_layers: 2, num_heads: 2, ffn_size: 32, "
               "max_len: 64}\n"
               "head: {dropout: 0.0}\n"
               "cv: {folds: 2, patience: 2, max_epochs: 2}\n"
               "search: {trials: 2}\n"
               "multitask: {epochs: 2, lr: 0.002, micro_batch: 4, grad_accum_steps: 1}\n"
               "tta: {passes: 2, word_dropout: 0.1}\n";
    }
    const std::string base = "--config " + path_of("train.yaml") + " ";

    REQUIRE(run_cli(base + "make-fixture --n 60 --out " + path_of("records.jsonl")) == 0);
    REQUIRE(run_cli(base + "featurize --subtask 3 --in " + path_of("records.jsonl") +
                    " --out " + path_of("enriched3.jsonl")) == 0);

    REQUIRE(run_cli(base + "train --model combined --in " + path_of("records.jsonl") +
                    " --out " + path_of("ckpt12")) == 0);
    REQUIRE(run_cli(base + "train --model feature --subtask 3 --epochs 2 --in " +
                    path_of("records.jsonl") + " --out " + path_of("ckpt3")) == 0);
    REQUIRE(run_cli(base + "train --model feature --subtask 4 --epochs 2 --in " +
                    path_of("records.jsonl") + " --out " + path_of("ckpt4")) == 0);

    REQUIRE(run_cli(base + "predict --model " + path_of("ckpt12") + " --tta-passes 2 --in " +
                    path_of("records.jsonl") + " --out " + path_of("pred12.jsonl")) == 0);
    REQUIRE(run_cli(base + "predict --model " + path_of("ckpt3") + " --in " +
                    path_of("records.jsonl") + " --out " + path_of("pred3.jsonl")) == 0);
    REQUIRE(run_cli(base + "predict --model " + path_of("ckpt4") + " --in " +
                    path_of("records.jsonl") + " --out " + path_of("pred4.jsonl")) == 0);

    REQUIRE(run_cli(base + "submit --pred12 " + path_of("pred12.jsonl") + " --pred3 " +
                    path_of("pred3.jsonl") + " --pred4 " + path_of("pred4.jsonl") +
                    " --in " + path_of("records.jsonl") + " --out " +
                    path_of("submission.csv")) == 0);
    REQUIRE(run_cli(base + "evaluate --submission " + path_of("submission.csv") +
                    " --gold " + path_of("records.jsonl") + " --out " +
                    path_of("report.json")) == 0);

    const auto rows = esgpv::load_submission_csv(g_work / "submission.csv");
    const auto records = esgpv::load_corpus(g_work / "records.jsonl",
                                            esgpv::SchemaMode::Strict);
    CHECK(rows.size() == records.size());
    CHECK(fs::exists(g_work / "report.json"));
}

TEST_CASE("tune writes a trial log usable by train") {
    // Reuses the workspace from the pipeline test.
    REQUIRE(fs::exists(g_work / "records.jsonl"));
    const std::string base = "--config " + path_of("train.yaml") + " ";
    REQUIRE(run_cli(base + "tune --subtask 1 --model base --trials 2 --in " +
                    path_of("records.jsonl") + " --out " + path_of("trials.jsonl")) == 0);
    std::ifstream log(g_work / "trials.jsonl");
    int lines = 0;
    std::string line;
    while (std::getline(log, line)) {
        if (!line.empty()) ++lines;
    }
    CHECK(lines == 2);
    REQUIRE(run_cli(base + "train --model base --subtask 1 --trials " +
                    path_of("trials.jsonl") + " --in " + path_of("records.jsonl") +
                    " --out " + path_of("ckpt1")) == 0);
}

TEST_CASE("validation failures exit with code 2") {
    CHECK(run_cli("featurize --subtask 9 --in nope.jsonl --out x.jsonl") == 2);
    CHECK(run_cli("featurize --subtask 1 --in /does/not/exist.jsonl --out x.jsonl") == 2);
    CHECK(run_cli("predict --model /does/not/exist --in nope.jsonl --out x.jsonl") == 2);
}

TEST_CASE("strict mode rejects dependent labels unless --permissive") {
    const auto bad = g_work / "bad.jsonl";
    {
        std::ofstream out(bad);
        out << R"({"id":"a","text":"t","promise_status":"No","evidence_status":"Yes"})"
            << "\n";
    }
    CHECK(run_cli("featurize --subtask 1 --in " + bad.string() + " --out " +
                  path_of("bad_out.jsonl")) == 2);
    CHECK(run_cli("--permissive featurize --subtask 1 --in " + bad.string() + " --out " +
                  path_of("bad_out.jsonl")) == 0);
}

} // TEST_SUITE
