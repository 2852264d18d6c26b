#include "feverscreen/rng.hpp"

#include <cmath>
#include <numbers>

#include "feverscreen/error.hpp"

namespace feverscreen {

double Rng::normal(double mean, double stddev) {
    double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
}

double Rng::truncated_normal(double mean, double stddev,
                             std::optional<double> lo,
                             std::optional<double> hi) {
    constexpr int kMaxRejections = 100000;
    for (int i = 0; i < kMaxRejections; ++i) {
        double x = normal(mean, stddev);
        if (lo && x < *lo) continue;
        if (hi && x >= *hi) continue;
        return x;
    }
    throw Error("truncated_normal: bounds reject effectively all samples");
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw Error("Rng::below: n must be positive");
    std::uint64_t min = (-n) % n;  // 2^64 mod n
    for (;;) {
        std::uint64_t r = gen_();
        if (r >= min) return r % n;
    }
}

}  // namespace feverscreen
