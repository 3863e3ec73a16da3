#pragma once

#include "esgpv/corpus.hpp"

#include <cstdint>
#include <vector>

namespace esgpv {

// Deterministic synthetic corpus in the task schema. Labels are decidable
// from surface cues (promise verbs, proof terms and figures, vague versus
// specific wording, horizon phrases), so desk-scale models can separate
// them. Real task datasets are licensed externally and never ship with
// this repo.
std::vector<PromiseRecord> make_fixture(int n_records, uint64_t seed);

} // namespace esgpv
