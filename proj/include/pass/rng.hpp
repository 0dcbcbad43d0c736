#pragma once

#include <cstdint>
#include <random>

namespace pass {

// splitmix64 finalizer, used to derive independent seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed of trial `trial`'s private stream; depends only on (seed, trial).
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

// mt19937_64 with a portable 53-bit uniform on [0, 1).
class Stream {
public:
    explicit Stream(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t bits() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

}  // namespace pass
