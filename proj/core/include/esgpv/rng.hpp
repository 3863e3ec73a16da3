#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace esgpv {

uint64_t splitmix64(uint64_t x);
uint64_t fnv1a64(std::string_view s);

// Mixes up to three seeds into one. Order-sensitive.
uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c = 0);

// mt19937_64 core with hand-rolled transforms. The standard pins the raw
// engine output but not the <random> distributions, so every draw here goes
// through our own code to keep streams stable across standard libraries.
class DetRng {
public:
    explicit DetRng(uint64_t seed) : eng_(seed) {}

    uint64_t next() { return eng_(); }

    // [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0,n), unbiased via rejection.
    uint64_t uniform_int(uint64_t n);

    // Box-Muller, mean 0 sd 1.
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Fisher-Yates.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_int(i)]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace esgpv
