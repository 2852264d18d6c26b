#include <cmath>
#include <doctest.h>

#include "feverscreen/error.hpp"
#include "feverscreen/rng.hpp"
#include "feverscreen/sensor.hpp"

using namespace feverscreen;

namespace {
const SensorModel kDefault{};  // k_d 1, t_c 2, s0 3, ambient 25
}

TEST_CASE("attenuate_at_distance basics") {
    CHECK(attenuate_at_distance(38.0, 0.0, kDefault) == 38.0);
    for (double d : {0.0, 0.5, 2.0, 10.0}) {
        CHECK(attenuate_at_distance(25.0, d, kDefault) == 25.0);
    }
    // 25 + 13*exp(-0.5), evaluated independently at high precision
    CHECK(attenuate_at_distance(38.0, 1.5, kDefault) ==
          doctest::Approx(32.884898576264234).epsilon(1e-12));
    CHECK_THROWS_AS(attenuate_at_distance(38.0, -0.1, kDefault), Error);
}

TEST_CASE("attenuation is monotone non-increasing in distance") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        double body = rng.uniform(26.0, 42.0);
        double d1 = rng.uniform(0.0, 5.0);
        double d2 = d1 + rng.uniform(0.0, 5.0);
        CHECK(attenuate_at_distance(body, d1, kDefault) >=
              attenuate_at_distance(body, d2, kDefault));
    }
}

TEST_CASE("step_sensor fixed point and errors") {
    SensorState s{31.0, 0.0};
    SensorState next = step_sensor(s, 31.0, 0.1, kDefault);
    CHECK(next.reading == 31.0);
    CHECK(next.time == doctest::Approx(0.1));
    CHECK_THROWS_AS(step_sensor(s, 38.0, 0.0, kDefault), Error);
    CHECK_THROWS_AS(step_sensor(s, 38.0, -0.5, kDefault), Error);
    CHECK_THROWS_AS(step_sensor(s, 38.0, kDefault.t_c / 5.0 + 0.01, kDefault), Error);
}

namespace {
// Euler endpoint after total time T, for convergence checks.
double euler_endpoint(double start, double target, double dt, double total,
                      const SensorModel& model) {
    SensorState s{start, 0.0};
    auto steps = static_cast<std::size_t>(total / dt + 0.5);
    for (std::size_t i = 0; i < steps; ++i) s = step_sensor(s, target, dt, model);
    return s.reading;
}
}  // namespace

TEST_CASE("euler trajectory approaches the analytic exponential") {
    // T(t) = 38 + (25-38) e^{-t/2}; at t=2 that is 38 - 13/e
    const double analytic = 33.217567264771250;
    double reading = euler_endpoint(25.0, 38.0, 0.005, 2.0, kDefault);
    CHECK(reading == doctest::Approx(analytic).epsilon(1e-2));
}

TEST_CASE("euler error halves with dt (first order)") {
    const double analytic = 33.217567264771250;
    double err_coarse = std::abs(euler_endpoint(25.0, 38.0, 0.04, 2.0, kDefault) - analytic);
    double err_fine = std::abs(euler_endpoint(25.0, 38.0, 0.02, 2.0, kDefault) - analytic);
    double ratio = err_coarse / err_fine;
    CHECK(ratio >= 1.8);
    CHECK(ratio <= 2.2);
}

TEST_CASE("simulate_reading_series") {
    SUBCASE("ambient body gives a constant series") {
        auto r = simulate_reading_series(25.0, 1.0, 50, 0.1, 0.0, 3, kDefault);
        for (double v : r) CHECK(v == 25.0);
    }
    SUBCASE("settles to the target") {
        auto r = simulate_reading_series(38.0, 0.0, 200, 0.1, 0.0, 3, kDefault);
        CHECK(std::abs(r.back() - 38.0) < 0.01);
    }
    SUBCASE("noiseless series never overshoots and is monotone") {
        auto r = simulate_reading_series(39.0, 0.5, 100, 0.2, 0.0, 3, kDefault);
        double target = attenuate_at_distance(39.0, 0.5, kDefault);
        double prev = 25.0;
        for (double v : r) {
            CHECK(v <= target);
            CHECK(v >= prev);
            prev = v;
        }
    }
    SUBCASE("deterministic for a fixed seed") {
        auto a = simulate_reading_series(38.0, 0.0, 60, 0.25, 0.1, 42, kDefault);
        auto b = simulate_reading_series(38.0, 0.0, 60, 0.25, 0.1, 42, kDefault);
        CHECK(a == b);
        auto c = simulate_reading_series(38.0, 0.0, 60, 0.25, 0.1, 43, kDefault);
        CHECK(a != c);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(simulate_reading_series(38.0, 0.0, 0, 0.1, 0.0, 1, kDefault), Error);
        CHECK_THROWS_AS(simulate_reading_series(38.0, 0.0, 10, 0.1, -1.0, 1, kDefault), Error);
    }
}

TEST_CASE("sensor model validation") {
    SensorModel bad = kDefault;
    bad.t_c = 0.0;
    CHECK_THROWS_AS(validate(bad), Error);
    bad = kDefault;
    bad.s0 = -1.0;
    CHECK_THROWS_AS(validate(bad), Error);
    bad = kDefault;
    bad.k_d = -0.5;
    CHECK_THROWS_AS(validate(bad), Error);
}
