#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "feverscreen/network.hpp"

namespace feverscreen {

// Signed fixed-point format with total_bits total width and frac_bits
// fractional bits. Representable range is
// [-2^(total-frac-1), 2^(total-frac-1) - 2^-frac].
struct QFormat {
    unsigned total_bits = 16;
    unsigned frac_bits = 12;

    std::int64_t q_min() const {
        return -(std::int64_t{1} << (total_bits - 1));
    }
    std::int64_t q_max() const {
        return (std::int64_t{1} << (total_bits - 1)) - 1;
    }
    double ulp() const { return std::ldexp(1.0, -static_cast<int>(frac_bits)); }
};

void validate(const QFormat& q);

// Round-to-nearest-even quantization onto the QFormat grid, saturating at
// the representable range. `saturated` is set when saturation occurred.
std::int32_t quantize_value(double x, const QFormat& q, bool* saturated = nullptr);
double dequantize_value(std::int64_t v, const QFormat& q);

// Arithmetic right shift with round-to-nearest-even on the dropped bits.
std::int64_t rne_shift_right(std::int64_t value, unsigned bits);

// Fixed-point compilation of a trained network. The tansig lookup table has
// 256 entries over the clamped pre-activation range [-4, 4), indexed by the
// top 8 bits of the clamped value; entry k holds the quantized tansig of the
// bucket midpoint. Normalization is carried as (1/scale, offset/scale) in
// QFormat, because raw offsets like 30 degC exceed the default Q4.12 range;
// the datapath itself consumes already-normalized inputs.
struct QuantizedModel {
    QFormat format;
    std::vector<std::size_t> dims;
    std::vector<Activation> activations;          // per layer
    std::vector<std::vector<std::int32_t>> weights;  // per layer, row-major
    std::vector<std::vector<std::int32_t>> biases;
    std::array<std::int32_t, 256> tansig_lut{};
    std::int32_t inv_scale_q = 0;         // quantize(1/scale)
    std::int32_t offset_over_scale_q = 0; // quantize(offset/scale)
    std::uint64_t saturation_count = 0;
    std::string fingerprint;              // FNV-1a 64 of the model JSON
};

QuantizedModel quantize_model(const Network& net, const QFormat& q);

// Reference semantics of the generated hardware: quantize the normalized
// input window, then pure integer MACs with a widened accumulator,
// round-to-nearest-even rescale after each layer, LUT tansig. Returns the
// dequantized output score.
double fixed_point_forward(const QuantizedModel& qm,
                           std::span<const double> normalized_input);

// Self-contained Verilog-2001 module. Weights and biases are the only
// localparam constants; the tansig LUT is a case statement; the datapath is
// a sequential multiply-accumulate FSM whose rounding and shifts match
// fixed_point_forward exactly. Emission is byte-deterministic.
std::string emit_verilog(const QuantizedModel& qm,
                         const std::string& module_name);

// Sidecar manifest: dims, format, saturation count, fingerprint.
std::string quantized_manifest_json(const QuantizedModel& qm);

std::uint64_t fnv1a64(std::span<const char> bytes);

}  // namespace feverscreen
