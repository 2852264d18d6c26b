#include "feverscreen/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "feverscreen/error.hpp"

namespace feverscreen {

std::vector<double> build_narx_input(std::span<const double> readings,
                                     const NarxConfig& cfg) {
    if (cfg.input_delays < 1) throw Error("narx config: input_delays must be >= 1");
    std::size_t window = cfg.input_delays + cfg.output_delays;
    if (readings.size() < window) {
        throw Error("insufficient history: need " + std::to_string(window) +
                    " readings, got " + std::to_string(readings.size()));
    }
    return {readings.end() - window, readings.end()};
}

namespace {

void validate(const CostSpec& spec) {
    if (spec.n1 > spec.n2) throw Error("cost spec: n1 must be <= n2");
    if (spec.nu < 1) throw Error("cost spec: nu must be >= 1");
    if (spec.increment_weight < 0.0) throw Error("cost spec: p must be >= 0");
    std::size_t horizon = static_cast<std::size_t>(spec.n2 - spec.n1 + 1);
    if (spec.desired.size() != horizon || spec.reference.size() != horizon) {
        throw Error("cost spec: desired/reference must cover t+n1..t+n2 (" +
                    std::to_string(horizon) + " values)");
    }
    if (spec.tentative.size() != static_cast<std::size_t>(spec.nu) + 1) {
        throw Error("cost spec: tentative must cover t-1..t+nu-1 (" +
                    std::to_string(spec.nu + 1) + " values)");
    }
}

}  // namespace

double evaluate_cost_j(const CostSpec& spec) {
    validate(spec);
    double tracking = 0.0;
    for (std::size_t i = 0; i < spec.desired.size(); ++i) {
        double d = spec.desired[i] - spec.reference[i];
        tracking += d * d;
    }
    double increments = 0.0;
    for (std::size_t i = 1; i < spec.tentative.size(); ++i) {
        double d = spec.tentative[i] - spec.tentative[i - 1];
        increments += d * d;
    }
    return tracking + spec.increment_weight * increments;
}

std::pair<std::vector<double>, double> minimize_cost_j(
    const CostSpec& spec_template,
    const std::vector<std::vector<double>>& candidates,
    const ResponseFn& response) {
    if (candidates.empty()) throw Error("minimize_cost_j: empty candidate grid");
    std::size_t best_index = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        CostSpec spec = spec_template;
        spec.tentative = candidates[c];
        if (response) spec.reference = response(candidates[c]);
        double cost = evaluate_cost_j(spec);
        if (cost < best_cost) {
            best_cost = cost;
            best_index = c;
        }
    }
    return {candidates[best_index], best_cost};
}

Verdict classify(const Network& net, std::span<const double> readings,
                 const NarxConfig& cfg) {
    auto window = build_narx_input(readings, cfg);
    if (window.size() != net.input_size()) {
        throw Error("classify: window length " + std::to_string(window.size()) +
                    " does not match network input " +
                    std::to_string(net.input_size()));
    }
    auto x = normalize_window(net, window);
    Verdict v;
    v.score = forward(net, x)[0];
    v.threshold = cfg.threshold;
    v.positive = v.score >= cfg.threshold;
    return v;
}

std::string verdict_json_line(const Verdict& v) {
    nlohmann::ordered_json j;
    j["score"] = v.score;
    j["verdict"] = v.positive ? "positive" : "negative";
    j["threshold"] = v.threshold;
    return j.dump();
}

RocSweep roc_sweep(std::span<const double> scores, std::span<const int> labels,
                   std::size_t n_thresholds) {
    if (scores.empty() || scores.size() != labels.size()) {
        throw Error("roc_sweep: scores and labels must be non-empty and equal length");
    }
    if (n_thresholds < 2) throw Error("roc_sweep: need at least 2 thresholds");

    std::size_t n_pos = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw Error("roc_sweep: labels must be 0 or 1");
        n_pos += static_cast<std::size_t>(l);
    }
    RocSweep sweep;
    if (n_pos == 0 || n_pos == labels.size()) {
        sweep.single_class = true;
        return sweep;
    }

    auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
    double lo = *lo_it;
    double hi = *hi_it;

    std::vector<double> thresholds;
    thresholds.reserve(n_thresholds + 1);
    for (std::size_t k = 0; k < n_thresholds; ++k) {
        double t = lo + (hi - lo) * static_cast<double>(k) /
                            static_cast<double>(n_thresholds - 1);
        thresholds.push_back(t);
    }
    // closing point just above the maximum so the curve reaches (0,0)
    thresholds.push_back(std::nextafter(hi, std::numeric_limits<double>::infinity()));

    std::size_t n_neg = labels.size() - n_pos;
    for (double t : thresholds) {
        std::size_t tp = 0;
        std::size_t fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) {
                if (labels[i] == 1) ++tp;
                else ++fp;
            }
        }
        RocPoint p;
        p.threshold = t;
        p.tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
        p.fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
        sweep.points.push_back(p);
    }
    return sweep;
}

RocSweep roc_sweep(const Network& net, const std::vector<Sample>& windows,
                   std::size_t n_thresholds) {
    if (windows.empty()) throw Error("roc_sweep: no windows");
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(windows.size());
    labels.reserve(windows.size());
    for (const Sample& s : windows) {
        auto x = normalize_window(net, s.features);
        scores.push_back(forward(net, x)[0]);
        labels.push_back(s.label);
    }
    return roc_sweep(scores, labels, n_thresholds);
}

}  // namespace feverscreen
