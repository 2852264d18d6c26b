#include "feverscreen/sensor.hpp"

#include <cmath>

#include "feverscreen/error.hpp"
#include "feverscreen/rng.hpp"

namespace feverscreen {

void validate(const SensorModel& model) {
    if (!(model.t_c > 0.0)) throw Error("sensor model: t_c must be > 0");
    if (!(model.s0 > 0.0)) throw Error("sensor model: s0 must be > 0");
    if (model.k_d < 0.0) throw Error("sensor model: k_d must be >= 0");
}

double attenuate_at_distance(double body_temp, double distance,
                             const SensorModel& model) {
    validate(model);
    if (distance < 0.0) {
        throw Error("attenuate_at_distance: distance must be >= 0");
    }
    return model.t_ambient +
           (body_temp - model.t_ambient) * std::exp(-distance / model.s0);
}

SensorState step_sensor(const SensorState& state, double target_temp,
                        double dt, const SensorModel& model) {
    validate(model);
    if (!(dt > 0.0) || dt > model.t_c / 5.0) {
        throw Error("step_sensor: dt must be in (0, t_c/5]");
    }
    SensorState next;
    next.reading = state.reading + dt * (target_temp - state.reading) / model.t_c;
    next.time = state.time + dt;
    return next;
}

std::vector<double> simulate_reading_series(double body_temp, double distance,
                                            std::size_t n_steps, double dt,
                                            double noise_std,
                                            std::uint64_t seed,
                                            const SensorModel& model) {
    if (n_steps == 0) throw Error("simulate_reading_series: n_steps must be >= 1");
    if (noise_std < 0.0) throw Error("simulate_reading_series: noise_std must be >= 0");
    double target = attenuate_at_distance(body_temp, distance, model);
    Rng rng(seed);
    SensorState state{model.t_ambient, 0.0};
    std::vector<double> readings;
    readings.reserve(n_steps);
    for (std::size_t i = 0; i < n_steps; ++i) {
        state = step_sensor(state, target, dt, model);
        double noise = noise_std > 0.0 ? rng.normal(0.0, noise_std) : 0.0;
        readings.push_back(state.reading + noise);
    }
    return readings;
}

}  // namespace feverscreen
