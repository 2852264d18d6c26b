#include "feverscreen/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "feverscreen/error.hpp"
#include "feverscreen/rng.hpp"

namespace feverscreen {

namespace {

constexpr int kModelVersion = 1;

struct ForwardTrace {
    // activations[k] is the input to layer k; activations.back() is the
    // network output.
    std::vector<std::vector<double>> activations;
};

ForwardTrace forward_trace(const Network& net, std::span<const double> input) {
    if (net.layers.empty()) throw Error("forward: network has no layers");
    if (input.size() != net.input_size()) {
        throw Error("forward: input length " + std::to_string(input.size()) +
                    " does not match network input " +
                    std::to_string(net.input_size()));
    }
    ForwardTrace trace;
    trace.activations.reserve(net.layers.size() + 1);
    trace.activations.emplace_back(input.begin(), input.end());
    for (const Layer& layer : net.layers) {
        const auto& x = trace.activations.back();
        std::vector<double> y(layer.out);
        for (std::size_t j = 0; j < layer.out; ++j) {
            double acc = layer.biases[j];
            for (std::size_t i = 0; i < layer.in; ++i) {
                acc += layer.weight(j, i) * x[i];
            }
            y[j] = layer.activation == Activation::Tansig ? tansig(acc) : acc;
        }
        trace.activations.push_back(std::move(y));
    }
    return trace;
}

std::string hex_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_hex_double(const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + s.size()) {
        throw Error("model file: bad numeric literal '" + s + "'");
    }
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

double tansig(double x) {
    double t = 2.0 / (1.0 + std::exp(-2.0 * x)) - 1.0;
    // keep the open interval even where rounding lands exactly on +-1
    if (t >= 1.0) t = std::nextafter(1.0, 0.0);
    if (t <= -1.0) t = std::nextafter(-1.0, 0.0);
    return t;
}

Network init_weights(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    if (dims.size() < 2) throw Error("init_weights: need at least two dimensions");
    for (std::size_t d : dims) {
        if (d == 0) throw Error("init_weights: zero layer dimension");
    }
    Rng rng(seed);
    Network net;
    net.layers.reserve(dims.size() - 1);
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        Layer layer;
        layer.in = dims[k];
        layer.out = dims[k + 1];
        layer.activation =
            (k + 2 == dims.size()) ? Activation::Linear : Activation::Tansig;
        double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
        layer.weights.resize(layer.in * layer.out);
        for (double& w : layer.weights) w = rng.uniform(-bound, bound);
        layer.biases.assign(layer.out, 0.0);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

std::vector<double> forward(const Network& net, std::span<const double> input) {
    return forward_trace(net, input).activations.back();
}

double mse_loss(std::span<const double> outputs, std::span<const double> targets) {
    if (outputs.empty()) throw Error("mse_loss: empty input");
    if (outputs.size() != targets.size()) {
        throw Error("mse_loss: length mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        double d = outputs[i] - targets[i];
        acc += d * d;
    }
    return acc / static_cast<double>(outputs.size());
}

Gradients backprop_gradients(const Network& net, std::span<const double> input,
                             std::span<const double> target) {
    if (target.size() != net.output_size()) {
        throw Error("backprop_gradients: target length mismatch");
    }
    ForwardTrace trace = forward_trace(net, input);

    Gradients grads;
    grads.weights.resize(net.layers.size());
    grads.biases.resize(net.layers.size());

    // d(mse)/d(output)
    const auto& out = trace.activations.back();
    std::vector<double> delta(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        delta[j] = 2.0 * (out[j] - target[j]) / static_cast<double>(out.size());
    }

    for (std::size_t k = net.layers.size(); k-- > 0;) {
        const Layer& layer = net.layers[k];
        const auto& x = trace.activations[k];
        const auto& y = trace.activations[k + 1];
        // through the activation: tansig'(z) = 1 - tansig(z)^2
        if (layer.activation == Activation::Tansig) {
            for (std::size_t j = 0; j < layer.out; ++j) {
                delta[j] *= 1.0 - y[j] * y[j];
            }
        }
        auto& gw = grads.weights[k];
        auto& gb = grads.biases[k];
        gw.resize(layer.in * layer.out);
        gb.resize(layer.out);
        for (std::size_t j = 0; j < layer.out; ++j) {
            gb[j] = delta[j];
            for (std::size_t i = 0; i < layer.in; ++i) {
                gw[j * layer.in + i] = delta[j] * x[i];
            }
        }
        if (k > 0) {
            std::vector<double> prev(layer.in, 0.0);
            for (std::size_t j = 0; j < layer.out; ++j) {
                for (std::size_t i = 0; i < layer.in; ++i) {
                    prev[i] += delta[j] * layer.weight(j, i);
                }
            }
            delta = std::move(prev);
        }
    }
    return grads;
}

void sgd_step(Network& net, const Gradients& gradients, double learning_rate) {
    if (gradients.weights.size() != net.layers.size() ||
        gradients.biases.size() != net.layers.size()) {
        throw Error("sgd_step: gradient layer count mismatch");
    }
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        Layer& layer = net.layers[k];
        if (gradients.weights[k].size() != layer.weights.size() ||
            gradients.biases[k].size() != layer.biases.size()) {
            throw Error("sgd_step: gradient shape mismatch");
        }
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            layer.weights[i] -= learning_rate * gradients.weights[k][i];
        }
        for (std::size_t i = 0; i < layer.biases.size(); ++i) {
            layer.biases[i] -= learning_rate * gradients.biases[k][i];
        }
    }
}

std::vector<double> normalize_window(const Network& net,
                                     std::span<const double> raw) {
    std::vector<double> x(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        x[i] = (raw[i] - net.normalization.offset) / net.normalization.scale;
    }
    return x;
}

namespace {

Gradients zero_like(const Network& net) {
    Gradients g;
    g.weights.resize(net.layers.size());
    g.biases.resize(net.layers.size());
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        g.weights[k].assign(net.layers[k].weights.size(), 0.0);
        g.biases[k].assign(net.layers[k].biases.size(), 0.0);
    }
    return g;
}

double split_mse(const Network& net,
                 const std::vector<std::vector<double>>& inputs,
                 const std::vector<double>& targets,
                 const std::vector<std::size_t>& indices) {
    if (indices.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> outs;
    std::vector<double> tgts;
    outs.reserve(indices.size());
    tgts.reserve(indices.size());
    for (std::size_t idx : indices) {
        outs.push_back(forward(net, inputs[idx])[0]);
        tgts.push_back(targets[idx]);
    }
    return mse_loss(outs, tgts);
}

}  // namespace

TrainingReport train(const Network& initial, const Dataset& dataset,
                     const TrainConfig& config) {
    if (dataset.split.train.empty() || dataset.split.val.empty()) {
        throw Error("train: dataset needs non-empty train and validation splits");
    }
    if (config.max_epochs < 1) throw Error("train: max_epochs must be >= 1");
    if (!(config.learning_rate > 0.0)) throw Error("train: learning_rate must be > 0");
    if (config.patience < 1) throw Error("train: patience must be >= 1");
    if (config.batch_size < 1) throw Error("train: batch_size must be >= 1");
    if (config.momentum < 0.0 || config.momentum >= 1.0) {
        throw Error("train: momentum must be in [0, 1)");
    }
    if (initial.layers.empty() || initial.output_size() != 1) {
        throw Error("train: detector network must have a single output");
    }

    // Normalized, clamped inputs and clamped targets, fixed for the run.
    std::vector<std::vector<double>> inputs(dataset.samples.size());
    std::vector<double> targets(dataset.samples.size());
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const Sample& s = dataset.samples[i];
        if (s.features.size() != initial.input_size()) {
            throw Error("train: sample width " + std::to_string(s.features.size()) +
                        " does not match network input " +
                        std::to_string(initial.input_size()));
        }
        auto x = normalize_window(initial, s.features);
        for (double& v : x) v = std::max(v, config.min_reference);
        inputs[i] = std::move(x);
        targets[i] = std::min(static_cast<double>(s.label), config.max_plant_output);
    }

    // Per-class pools of train indices, ascending label order.
    std::vector<std::size_t> pos_pool;
    std::vector<std::size_t> neg_pool;
    for (std::size_t idx : dataset.split.train) {
        (dataset.samples[idx].label == 1 ? pos_pool : neg_pool).push_back(idx);
    }

    Network net = initial;
    Rng rng(config.seed);
    Gradients velocity = zero_like(net);
    Gradients batch_grad = zero_like(net);

    TrainingReport report;
    report.best_network = net;
    std::size_t bad_epochs = 0;

    std::vector<std::size_t> order;
    order.reserve(dataset.split.train.size());

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        // Class-stratified epoch order: shuffle each pool, then interleave
        // so every batch mirrors the global label ratio.
        rng.shuffle(neg_pool);
        rng.shuffle(pos_pool);
        order.clear();
        std::size_t pi = 0;
        std::size_t ni = 0;
        std::size_t n_p = pos_pool.size();
        std::size_t n_n = neg_pool.size();
        while (pi < n_p || ni < n_n) {
            if (ni >= n_n || (pi < n_p && pi * n_n <= ni * n_p)) {
                order.push_back(pos_pool[pi++]);
            } else {
                order.push_back(neg_pool[ni++]);
            }
        }

        for (std::size_t start = 0; start < order.size();
             start += config.batch_size) {
            std::size_t end = std::min(start + config.batch_size, order.size());
            double inv = 1.0 / static_cast<double>(end - start);
            for (auto& layer : batch_grad.weights) std::fill(layer.begin(), layer.end(), 0.0);
            for (auto& layer : batch_grad.biases) std::fill(layer.begin(), layer.end(), 0.0);
            for (std::size_t b = start; b < end; ++b) {
                std::size_t idx = order[b];
                double tgt = targets[idx];
                Gradients g = backprop_gradients(net, inputs[idx],
                                                 std::span<const double>(&tgt, 1));
                for (std::size_t k = 0; k < g.weights.size(); ++k) {
                    for (std::size_t i = 0; i < g.weights[k].size(); ++i) {
                        batch_grad.weights[k][i] += g.weights[k][i];
                    }
                    for (std::size_t i = 0; i < g.biases[k].size(); ++i) {
                        batch_grad.biases[k][i] += g.biases[k][i];
                    }
                }
            }
            for (std::size_t k = 0; k < velocity.weights.size(); ++k) {
                for (std::size_t i = 0; i < velocity.weights[k].size(); ++i) {
                    velocity.weights[k][i] = config.momentum * velocity.weights[k][i] +
                                             batch_grad.weights[k][i] * inv;
                }
                for (std::size_t i = 0; i < velocity.biases[k].size(); ++i) {
                    velocity.biases[k][i] = config.momentum * velocity.biases[k][i] +
                                            batch_grad.biases[k][i] * inv;
                }
            }
            sgd_step(net, velocity, config.learning_rate);
        }

        report.train_mse.push_back(split_mse(net, inputs, targets, dataset.split.train));
        report.val_mse.push_back(split_mse(net, inputs, targets, dataset.split.val));
        report.test_mse.push_back(split_mse(net, inputs, targets, dataset.split.test));

        double val = report.val_mse.back();
        if (val < report.best_val_mse) {
            report.best_val_mse = val;
            report.best_epoch = epoch;
            report.best_network = net;
            bad_epochs = 0;
        } else if (++bad_epochs >= config.patience) {
            break;
        }
    }
    return report;
}

std::string model_to_json(const Network& net) {
    if (net.layers.empty()) throw Error("model_to_json: empty network");
    nlohmann::ordered_json j;
    j["version"] = kModelVersion;
    std::vector<std::size_t> dims{net.layers.front().in};
    for (const Layer& l : net.layers) dims.push_back(l.out);
    j["dims"] = dims;
    auto acts = nlohmann::ordered_json::array();
    for (const Layer& l : net.layers) {
        acts.push_back(l.activation == Activation::Tansig ? "tansig" : "linear");
    }
    j["activations"] = acts;
    auto weights = nlohmann::ordered_json::array();
    auto biases = nlohmann::ordered_json::array();
    for (const Layer& l : net.layers) {
        auto w = nlohmann::ordered_json::array();
        for (double v : l.weights) w.push_back(hex_double(v));
        weights.push_back(std::move(w));
        auto b = nlohmann::ordered_json::array();
        for (double v : l.biases) b.push_back(hex_double(v));
        biases.push_back(std::move(b));
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    j["normalization"] = {{"offset", hex_double(net.normalization.offset)},
                          {"scale", hex_double(net.normalization.scale)}};
    return j.dump(2) + "\n";
}

Network model_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("model file: ") + e.what());
    }
    try {
        int version = j.at("version").get<int>();
        if (version != kModelVersion) {
            throw Error("model file: unsupported version " + std::to_string(version));
        }
        auto dims = j.at("dims").get<std::vector<std::size_t>>();
        auto acts = j.at("activations").get<std::vector<std::string>>();
        const auto& weights = j.at("weights");
        const auto& biases = j.at("biases");
        if (dims.size() < 2 || acts.size() != dims.size() - 1 ||
            weights.size() != dims.size() - 1 || biases.size() != dims.size() - 1) {
            throw Error("model file: inconsistent layer structure");
        }
        Network net;
        for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
            Layer layer;
            layer.in = dims[k];
            layer.out = dims[k + 1];
            if (layer.in == 0 || layer.out == 0) {
                throw Error("model file: zero layer dimension");
            }
            if (acts[k] == "tansig") layer.activation = Activation::Tansig;
            else if (acts[k] == "linear") layer.activation = Activation::Linear;
            else throw Error("model file: unknown activation '" + acts[k] + "'");
            auto wl = weights.at(k).get<std::vector<std::string>>();
            auto bl = biases.at(k).get<std::vector<std::string>>();
            if (wl.size() != layer.in * layer.out || bl.size() != layer.out) {
                throw Error("model file: weight shape mismatch at layer " +
                            std::to_string(k));
            }
            layer.weights.reserve(wl.size());
            for (const auto& s : wl) layer.weights.push_back(parse_hex_double(s));
            layer.biases.reserve(bl.size());
            for (const auto& s : bl) layer.biases.push_back(parse_hex_double(s));
            for (double v : layer.weights) {
                if (!std::isfinite(v)) throw Error("model file: non-finite weight");
            }
            for (double v : layer.biases) {
                if (!std::isfinite(v)) throw Error("model file: non-finite bias");
            }
            net.layers.push_back(std::move(layer));
        }
        const auto& norm = j.at("normalization");
        net.normalization.offset =
            parse_hex_double(norm.at("offset").get<std::string>());
        net.normalization.scale =
            parse_hex_double(norm.at("scale").get<std::string>());
        if (!(net.normalization.scale != 0.0)) {
            throw Error("model file: normalization scale must be non-zero");
        }
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("model file: ") + e.what());
    }
}

void save_model(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << model_to_json(net);
    if (!out) throw Error("write failed: " + path);
}

Network load_model(const std::string& path) {
    return model_from_json(read_file(path));
}

}  // namespace feverscreen
