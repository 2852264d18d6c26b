#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace feverscreen {

// Seeded random source used everywhere randomness is needed. Doubles are
// derived from raw 64-bit draws with fixed bit arithmetic instead of
// std::uniform_real_distribution, whose output is implementation-defined;
// a given seed therefore produces one stream for the life of the project.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Box-Muller; draws two uniforms per call, no cached spare.
    double normal(double mean, double stddev);

    // Rejection sampling. `lo` is inclusive, `hi` exclusive. Throws Error
    // after too many rejections (degenerate bounds).
    double truncated_normal(double mean, double stddev,
                            std::optional<double> lo,
                            std::optional<double> hi);

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[below(i)]);
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace feverscreen
