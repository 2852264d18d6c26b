#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "feverscreen/sensor.hpp"

namespace feverscreen {

struct Sample {
    std::vector<double> features;  // lagged reading window, length L
    int label = 0;                 // 1 = febrile profile, 0 = afebrile
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;

    bool empty() const { return train.empty() && val.empty() && test.empty(); }
};

struct Dataset {
    std::vector<Sample> samples;
    SplitIndices split;  // filled by split_dataset; empty until then
};

// Synthetic screening cohort. Positive-class body temperatures are drawn
// at or above fever_threshold; negative-class ones below negative_temp_cap.
struct CohortSpec {
    std::size_t n_positive = 693;
    std::size_t n_negative = 693;
    double positive_temp_mean = 38.8;
    double positive_temp_std = 0.10;
    double negative_temp_mean = 36.8;
    double negative_temp_std = 0.08;
    double fever_threshold = 38.0;   // positive body temps >= this
    double negative_temp_cap = 37.5; // negative body temps < this
    double distance_min = 0.0;       // meters
    double distance_max = 0.0;
    std::size_t input_delays = 9;    // window length = input + output delays
    std::size_t output_delays = 2;
    std::size_t n_steps = 60;        // simulated readings per subject
    double dt = 0.25;                // seconds
    double noise_std = 0.05;         // degC per reading
    std::uint64_t seed = 42;
};

// One sample per subject; the feature window is the final L readings of the
// subject's simulated trace. Deterministic for a fixed seed. Split indices
// are left empty.
Dataset generate_cohort(const CohortSpec& spec, const SensorModel& sensor);

// All sliding windows of length input_delays + output_delays.
std::vector<std::vector<double>> extract_features(
    std::span<const double> readings, std::size_t input_delays,
    std::size_t output_delays);

// Stratified 70:15:15 shuffle-split. Sizes are exact:
// |train| = floor(0.70 n), |val| = floor(0.15 n), |test| = remainder.
Dataset split_dataset(Dataset dataset, std::uint64_t seed);

// CSV schema: header r1,...,rL,label; readings serialized at 9 significant
// digits; label in {0,1}.
Dataset read_csv(const std::string& path);
void write_csv(const Dataset& dataset, const std::string& path);
std::string to_csv(const Dataset& dataset);
Dataset parse_csv(const std::string& text);

// Split manifest: {"train":[...],"val":[...],"test":[...]} of 0-based indices.
std::string split_manifest_json(const SplitIndices& split);
SplitIndices parse_split_manifest(const std::string& json_text,
                                  std::size_t n_samples);
void write_split_manifest(const SplitIndices& split, const std::string& path);
SplitIndices read_split_manifest(const std::string& path,
                                 std::size_t n_samples);

}  // namespace feverscreen
