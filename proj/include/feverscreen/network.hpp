#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "feverscreen/dataset.hpp"

namespace feverscreen {

enum class Activation { Tansig, Linear };

struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;  // row-major, out x in
    std::vector<double> biases;   // out
    Activation activation = Activation::Tansig;

    double weight(std::size_t row, std::size_t col) const {
        return weights[row * in + col];
    }
};

// Affine input conditioning baked into the model file: x = (r - offset)/scale.
struct Normalization {
    double offset = 30.0;
    double scale = 10.0;
};

struct Network {
    std::vector<Layer> layers;
    Normalization normalization;

    std::size_t input_size() const { return layers.empty() ? 0 : layers.front().in; }
    std::size_t output_size() const { return layers.empty() ? 0 : layers.back().out; }
};

struct TrainConfig {
    std::size_t max_epochs = 11;
    std::vector<std::size_t> hidden_sizes = {8};
    double learning_rate = 0.05;
    double momentum = 0.9;
    std::size_t patience = 3;
    std::size_t batch_size = 16;
    std::uint64_t seed = 42;
    double min_reference = -0.05;   // lower clamp on normalized inputs
    double max_plant_output = 2.0;  // upper clamp on training targets
    // Further table-of-parameters entries with no role in a pure detector,
    // carried for reference only: maximum interval per second = 2,
    // delayed controller outputs = 1.
};

struct TrainingReport {
    std::vector<double> train_mse;  // one entry per epoch actually run
    std::vector<double> val_mse;
    std::vector<double> test_mse;
    std::size_t best_epoch = 0;     // 1-based
    double best_val_mse = std::numeric_limits<double>::infinity();
    Network best_network;           // snapshot at best_epoch
};

// Per-layer gradients, same shapes as the network's weights and biases.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

// 2/(1+exp(-2x)) - 1, identical to tanh(x); saturates, never overflows.
double tansig(double x);

// Hidden layers tansig, final layer linear. Weights uniform in
// (-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero. Deterministic per seed.
Network init_weights(const std::vector<std::size_t>& dims, std::uint64_t seed);

std::vector<double> forward(const Network& net, std::span<const double> input);

double mse_loss(std::span<const double> outputs, std::span<const double> targets);

// Reverse-mode gradients of mse_loss(forward(net, input), target) with
// respect to every weight and bias.
Gradients backprop_gradients(const Network& net, std::span<const double> input,
                             std::span<const double> target);

// w <- w - lr * g, elementwise.
void sgd_step(Network& net, const Gradients& gradients, double learning_rate);

// (r - offset)/scale for every entry of a raw reading window.
std::vector<double> normalize_window(const Network& net,
                                     std::span<const double> raw);

// Minibatch gradient descent with classical momentum over the train split,
// early-stopped on the validation split. Batches are class-stratified so
// each one mirrors the global label ratio. Returns per-epoch MSE curves and
// the network snapshot from the best-validation epoch.
TrainingReport train(const Network& initial, const Dataset& dataset,
                     const TrainConfig& config);

// Model file: JSON with version, dims, activations, row-major weights and
// biases as hex-float strings, and the normalization pair.
std::string model_to_json(const Network& net);
Network model_from_json(const std::string& json_text);
void save_model(const Network& net, const std::string& path);
Network load_model(const std::string& path);

}  // namespace feverscreen
