#include "feverscreen/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "feverscreen/error.hpp"
#include "feverscreen/rng.hpp"

namespace feverscreen {

namespace {

std::string format_reading(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << text;
    if (!out) throw Error("write failed: " + path);
}

void validate(const CohortSpec& spec) {
    if (spec.n_positive == 0 || spec.n_negative == 0) {
        throw Error("cohort spec: both class counts must be positive");
    }
    if (spec.n_positive + spec.n_negative < 10) {
        throw Error("cohort spec: need at least 10 subjects");
    }
    if (spec.positive_temp_std < 0.0 || spec.negative_temp_std < 0.0) {
        throw Error("cohort spec: temperature std must be >= 0");
    }
    if (spec.negative_temp_cap > spec.fever_threshold) {
        throw Error("cohort spec: negative cap must not exceed fever threshold");
    }
    if (spec.distance_min < 0.0 || spec.distance_max < spec.distance_min) {
        throw Error("cohort spec: invalid distance range");
    }
    if (spec.input_delays < 1) {
        throw Error("cohort spec: input_delays must be >= 1");
    }
    std::size_t window = spec.input_delays + spec.output_delays;
    if (spec.n_steps < window) {
        throw Error("cohort spec: n_steps shorter than the feature window");
    }
    if (!(spec.dt > 0.0)) throw Error("cohort spec: dt must be > 0");
}

}  // namespace

Dataset generate_cohort(const CohortSpec& spec, const SensorModel& sensor) {
    validate(spec);
    validate(sensor);
    std::size_t window = spec.input_delays + spec.output_delays;
    Rng rng(spec.seed);
    Dataset ds;
    ds.samples.reserve(spec.n_positive + spec.n_negative);

    auto add_class = [&](std::size_t count, double mean, double std,
                         std::optional<double> lo, std::optional<double> hi,
                         int label) {
        for (std::size_t i = 0; i < count; ++i) {
            double body = rng.truncated_normal(mean, std, lo, hi);
            double distance = rng.uniform(spec.distance_min, spec.distance_max);
            std::uint64_t series_seed = rng.next_u64();
            auto readings = simulate_reading_series(
                body, distance, spec.n_steps, spec.dt, spec.noise_std,
                series_seed, sensor);
            Sample s;
            s.features.assign(readings.end() - window, readings.end());
            s.label = label;
            ds.samples.push_back(std::move(s));
        }
    };

    add_class(spec.n_positive, spec.positive_temp_mean, spec.positive_temp_std,
              spec.fever_threshold, std::nullopt, 1);
    add_class(spec.n_negative, spec.negative_temp_mean, spec.negative_temp_std,
              std::nullopt, spec.negative_temp_cap, 0);
    return ds;
}

std::vector<std::vector<double>> extract_features(
    std::span<const double> readings, std::size_t input_delays,
    std::size_t output_delays) {
    std::size_t window = input_delays + output_delays;
    if (window == 0) throw Error("extract_features: window length is zero");
    if (readings.size() < window) {
        throw Error("extract_features: need at least " + std::to_string(window) +
                    " readings, got " + std::to_string(readings.size()));
    }
    std::vector<std::vector<double>> windows;
    windows.reserve(readings.size() - window + 1);
    for (std::size_t i = 0; i + window <= readings.size(); ++i) {
        windows.emplace_back(readings.begin() + i, readings.begin() + i + window);
    }
    return windows;
}

Dataset split_dataset(Dataset dataset, std::uint64_t seed) {
    std::size_t n = dataset.samples.size();
    if (n < 20) throw Error("split_dataset: need at least 20 samples");

    // Exact-floor sizes via integer arithmetic; 0.70*100 in floating point
    // lands below 70.
    std::size_t n_train = 7 * n / 10;
    std::size_t n_val = 15 * n / 100;

    // Per-class shuffled index pools, in ascending label order.
    std::map<int, std::vector<std::size_t>> pools;
    for (std::size_t i = 0; i < n; ++i) pools[dataset.samples[i].label].push_back(i);
    Rng rng(seed);
    for (auto& [label, pool] : pools) rng.shuffle(pool);

    // Proportional interleave of the pools: every prefix carries each class
    // in proportion to its global share (within one sample), so slicing the
    // sequence stratifies all three splits.
    std::vector<std::size_t> order;
    order.reserve(n);
    std::map<int, std::size_t> emitted;
    for (std::size_t step = 1; step <= n; ++step) {
        int pick = 0;
        long long best_deficit = -1;
        for (const auto& [label, pool] : pools) {
            if (emitted[label] == pool.size()) continue;
            long long deficit = static_cast<long long>(pool.size() * step) -
                                static_cast<long long>(emitted[label] * n);
            if (deficit > best_deficit) {
                best_deficit = deficit;
                pick = label;
            }
        }
        order.push_back(pools[pick][emitted[pick]++]);
    }

    SplitIndices split;
    split.train.assign(order.begin(), order.begin() + n_train);
    split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    split.test.assign(order.begin() + n_train + n_val, order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.test.begin(), split.test.end());
    dataset.split = std::move(split);
    return dataset;
}

std::string to_csv(const Dataset& dataset) {
    if (dataset.samples.empty()) throw Error("to_csv: empty dataset");
    std::size_t width = dataset.samples.front().features.size();
    std::ostringstream out;
    for (std::size_t c = 1; c <= width; ++c) out << 'r' << c << ',';
    out << "label\n";
    for (const Sample& s : dataset.samples) {
        if (s.features.size() != width) {
            throw Error("to_csv: inconsistent feature width");
        }
        for (double r : s.features) out << format_reading(r) << ',';
        out << s.label << '\n';
    }
    return out.str();
}

Dataset parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw Error("csv: empty input");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string tok;
        while (std::getline(hs, tok, ',')) header.push_back(tok);
    }
    if (header.size() < 2 || header.back() != "label") {
        throw Error("csv: header must be r1,...,rN,label");
    }
    std::size_t width = header.size() - 1;
    for (std::size_t c = 0; c < width; ++c) {
        if (header[c] != "r" + std::to_string(c + 1)) {
            throw Error("csv: header must be r1,...,rN,label");
        }
    }

    Dataset ds;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) cells.push_back(tok);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        if (cells.size() != width + 1) {
            throw Error("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(width + 1) + " columns, got " +
                        std::to_string(cells.size()));
        }
        Sample s;
        s.features.reserve(width);
        for (std::size_t c = 0; c < width; ++c) {
            try {
                std::size_t pos = 0;
                double v = std::stod(cells[c], &pos);
                if (pos != cells[c].size()) throw std::invalid_argument(cells[c]);
                if (!std::isfinite(v)) throw std::invalid_argument(cells[c]);
                s.features.push_back(v);
            } catch (const std::exception&) {
                throw Error("csv line " + std::to_string(line_no) +
                            ": bad reading '" + cells[c] + "'");
            }
        }
        const std::string& lab = cells[width];
        if (lab == "0") s.label = 0;
        else if (lab == "1") s.label = 1;
        else
            throw Error("csv line " + std::to_string(line_no) +
                        ": label must be 0 or 1, got '" + lab + "'");
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.empty()) throw Error("csv: no data rows");
    return ds;
}

void write_csv(const Dataset& dataset, const std::string& path) {
    write_file(path, to_csv(dataset));
}

Dataset read_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::string split_manifest_json(const SplitIndices& split) {
    nlohmann::ordered_json j;
    j["train"] = split.train;
    j["val"] = split.val;
    j["test"] = split.test;
    return j.dump() + "\n";
}

SplitIndices parse_split_manifest(const std::string& json_text,
                                  std::size_t n_samples) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("split manifest: ") + e.what());
    }
    SplitIndices split;
    try {
        split.train = j.at("train").get<std::vector<std::size_t>>();
        split.val = j.at("val").get<std::vector<std::size_t>>();
        split.test = j.at("test").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("split manifest: ") + e.what());
    }
    std::vector<char> seen(n_samples, 0);
    std::size_t covered = 0;
    for (const auto* part : {&split.train, &split.val, &split.test}) {
        for (std::size_t idx : *part) {
            if (idx >= n_samples) {
                throw Error("split manifest: index " + std::to_string(idx) +
                            " out of range");
            }
            if (seen[idx]) {
                throw Error("split manifest: index " + std::to_string(idx) +
                            " appears twice");
            }
            seen[idx] = 1;
            ++covered;
        }
    }
    if (covered != n_samples) {
        throw Error("split manifest: indices do not cover the dataset");
    }
    return split;
}

void write_split_manifest(const SplitIndices& split, const std::string& path) {
    write_file(path, split_manifest_json(split));
}

SplitIndices read_split_manifest(const std::string& path,
                                 std::size_t n_samples) {
    return parse_split_manifest(read_file(path), n_samples);
}

}  // namespace feverscreen
