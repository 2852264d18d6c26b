#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "feverscreen/network.hpp"

namespace feverscreen {

struct NarxConfig {
    std::size_t input_delays = 9;
    std::size_t output_delays = 2;
    double threshold = 0.5;  // verdict positive iff score >= threshold
};

// Predictive cost over a finite horizon:
//   J = sum_{j=n1..n2} (desired[j] - reference[j])^2
//     + increment_weight * sum_{j=1..nu} (tentative step increments)^2
// `desired` and `reference` cover offsets t+n1 .. t+n2 (n2-n1+1 entries);
// `tentative` covers t-1 .. t+nu-1 (nu+1 entries, element 0 is the
// caller-supplied initial value at t-1).
struct CostSpec {
    int n1 = 1;
    int n2 = 2;
    int nu = 1;
    double increment_weight = 0.05;  // p
    std::vector<double> desired;     // y_r
    std::vector<double> reference;   // y_m
    std::vector<double> tentative;   // u'
};

// Lag window for the detector: the last input_delays + output_delays
// readings in chronological order (reference-input lags followed by
// plant-output lags).
std::vector<double> build_narx_input(std::span<const double> readings,
                                     const NarxConfig& cfg);

double evaluate_cost_j(const CostSpec& spec);

// Maps a candidate tentative sequence to the reference-model response over
// the horizon (n2 - n1 + 1 values).
using ResponseFn =
    std::function<std::vector<double>(const std::vector<double>&)>;

// Exhaustive search over the candidate grid; ties broken by lowest index.
// Each candidate replaces `tentative` in the template; when `response` is
// given it also replaces `reference`.
std::pair<std::vector<double>, double> minimize_cost_j(
    const CostSpec& spec_template,
    const std::vector<std::vector<double>>& candidates,
    const ResponseFn& response = nullptr);

struct Verdict {
    double score = 0.0;
    bool positive = false;
    double threshold = 0.5;
};

// Score = network output on the normalized lag window; positive iff
// score >= threshold (boundary fails safe toward detection).
Verdict classify(const Network& net, std::span<const double> readings,
                 const NarxConfig& cfg);

std::string verdict_json_line(const Verdict& v);

struct RocPoint {
    double threshold = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
};

// `single_class` is set (and points left empty) when the labels contain
// only one class; that is a reported condition, not an error.
struct RocSweep {
    bool single_class = false;
    std::vector<RocPoint> points;
};

// Thresholds are uniform over the observed score range, plus one closing
// point just above the maximum so the curve reaches (0,0). Points are
// ordered by ascending threshold; TPR and FPR are non-increasing.
RocSweep roc_sweep(std::span<const double> scores, std::span<const int> labels,
                   std::size_t n_thresholds);

// Scores each labeled window with the network, then sweeps.
RocSweep roc_sweep(const Network& net, const std::vector<Sample>& windows,
                   std::size_t n_thresholds);

}  // namespace feverscreen
