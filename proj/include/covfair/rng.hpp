#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace covfair {

/// Portable seeded generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Standard distributions are not portable, so index and real draws
/// are derived from raw engine output here.
///
/// Stream splitting: every operation that needs randomness derives its own
/// stream as `Rng(seed, tag, index)`, where `tag` names the operation and
/// `index` the unit of work (resample number, sample position, trial, ...).
/// The engine seed is splitmix64(seed ^ splitmix64(hash(tag) + index)), so
/// streams are independent of scheduling order and of each other.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n);

    /// Uniform real in [0, 1) with 53 bits of precision.
    double uniform01();

    /// Uniform real in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Fisher-Yates shuffle driven by uniform_index.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    static std::uint64_t splitmix64(std::uint64_t x);

private:
    std::mt19937_64 engine_;
};

}  // namespace covfair
