#pragma once

#include <cstdint>
#include <vector>

namespace feverscreen {

// First-order thermal sensor plant. The sensing element relaxes toward the
// apparent target temperature with time constant t_c; standoff distance
// attenuates the apparent temperature exponentially with length scale s0.
struct SensorModel {
    double k_d = 1.0;        // dissipation factor; gain on heat flow that
                             // cancels in the normalized lag equation
    double t_c = 2.0;        // thermal time constant [s], > 0
    double s0 = 3.0;         // attenuation length scale [m], > 0
    double t_ambient = 25.0; // ambient temperature [degC]
};

struct SensorState {
    double reading = 25.0;   // current measured temperature [degC]
    double time = 0.0;       // elapsed time [s]
};

void validate(const SensorModel& model);

// Apparent temperature seen from `distance` meters away:
//   t_ambient + (body_temp - t_ambient) * exp(-distance / s0)
double attenuate_at_distance(double body_temp, double distance,
                             const SensorModel& model);

// One explicit Euler step of t_c * dB/dt = target - B. Requires
// 0 < dt <= t_c / 5.
SensorState step_sensor(const SensorState& state, double target_temp,
                        double dt, const SensorModel& model);

// Reading trace of a sensor that starts at ambient and relaxes toward the
// distance-attenuated body temperature, with additive Gaussian measurement
// noise on each recorded value. Deterministic for a fixed seed.
std::vector<double> simulate_reading_series(double body_temp, double distance,
                                            std::size_t n_steps, double dt,
                                            double noise_std,
                                            std::uint64_t seed,
                                            const SensorModel& model);

}  // namespace feverscreen
