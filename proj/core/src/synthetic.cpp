#include "esgpv/synthetic.hpp"

#include "esgpv/common.hpp"
#include "esgpv/rng.hpp"

#include <array>

namespace esgpv {

namespace {

constexpr std::array<const char*, 4> kPromiseOpeners = {
    "We commit to", "We pledge to", "Our goal is to", "We will undertake to"};

constexpr std::array<const char*, 4> kPromiseActions = {
    "reduce our carbon footprint", "reach net zero emissions",
    "improve workplace safety standards", "expand renewable energy use"};

constexpr std::array<const char*, 4> kNonPromise = {
    "The company operates facilities in several regions",
    "The quarterly newsletter was published for shareholders",
    "The annual general meeting took place as planned",
    "Routine operational matters were reviewed by the board"};

constexpr std::array<const char*, 2> kEvidenceYes = {
    "as confirmed in our audited sustainability report showing a 15% reduction",
    "as documented in our public disclosure with 12500 tonnes avoided"};

constexpr std::array<const char*, 2> kEvidenceNo = {
    "across all of our operations", "for the benefit of our stakeholders"};

constexpr std::array<const char*, 3> kClarityMarkers = {
    "with a specific measurable milestone",   // Clear
    "which we might possibly consider",       // Not Clear
    "delivering unparalleled world beating excellence"}; // Misleading

constexpr std::array<const char*, 4> kTimingMarkers = {
    "within two years", "within five years", "by 2040", "over the long run eventually"};

constexpr std::array<const char*, 3> kFillers = {
    "", "across every division", "together with our partners"};

} // namespace

std::vector<PromiseRecord> make_fixture(int n_records, uint64_t seed) {
    if (n_records < 10) throw ValidationError("fixture needs at least 10 records");
    DetRng rng(splitmix64(seed));

    std::vector<PromiseRecord> records;
    records.reserve(static_cast<size_t>(n_records));
    int yes_count = 0;
    for (int i = 0; i < n_records; ++i) {
        PromiseRecord rec;
        char id[16];
        std::snprintf(id, sizeof(id), "r%04d", i + 1);
        rec.id = id;
        rec.page_number = 1 + static_cast<int>(rng.uniform_int(40));

        LabelSet labels;
        const bool is_promise = i % 5 < 3; // 60% promises
        if (is_promise) {
            const int j = yes_count++;
            labels.promise_status = PromiseStatus::Yes;
            labels.evidence_status = j % 2 == 0 ? EvidenceStatus::Yes : EvidenceStatus::No;
            labels.clarity = static_cast<Clarity>(j % 3);
            labels.timing = static_cast<Timing>(j % 4);

            std::string text = std::string(kPromiseOpeners[rng.uniform_int(4)]) + " " +
                               kPromiseActions[rng.uniform_int(4)];
            text += " " + std::string(kClarityMarkers[j % 3]);
            text += " ";
            text += kTimingMarkers[j % 4];
            if (*labels.evidence_status == EvidenceStatus::Yes) {
                text += " " + std::string(kEvidenceYes[rng.uniform_int(2)]);
            } else {
                text += " " + std::string(kEvidenceNo[rng.uniform_int(2)]);
            }
            const char* filler = kFillers[rng.uniform_int(3)];
            if (*filler) text += std::string(" ") + filler;
            rec.raw_text = text;
        } else {
            labels.promise_status = PromiseStatus::No;
            std::string text = kNonPromise[rng.uniform_int(4)];
            const char* filler = kFillers[rng.uniform_int(3)];
            if (*filler) text += std::string(" ") + filler;
            rec.raw_text = text;
        }
        rec.labels = labels;
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace esgpv
