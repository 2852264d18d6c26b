#include "feverscreen/hdlgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "feverscreen/error.hpp"

namespace feverscreen {

void validate(const QFormat& q) {
    if (q.frac_bits == 0 || q.frac_bits >= q.total_bits || q.total_bits > 32) {
        throw Error("qformat: need 0 < frac_bits < total_bits <= 32");
    }
    if (q.frac_bits < 5) {
        throw Error("qformat: tansig lookup needs frac_bits >= 5");
    }
}

std::uint64_t fnv1a64(std::span<const char> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::int32_t quantize_value(double x, const QFormat& q, bool* saturated) {
    if (saturated) *saturated = false;
    double scaled = std::ldexp(x, static_cast<int>(q.frac_bits));
    // default FP environment rounds ties to even
    double rounded = std::nearbyint(scaled);
    if (rounded > static_cast<double>(q.q_max())) {
        if (saturated) *saturated = true;
        return static_cast<std::int32_t>(q.q_max());
    }
    if (rounded < static_cast<double>(q.q_min())) {
        if (saturated) *saturated = true;
        return static_cast<std::int32_t>(q.q_min());
    }
    return static_cast<std::int32_t>(rounded);
}

double dequantize_value(std::int64_t v, const QFormat& q) {
    return std::ldexp(static_cast<double>(v), -static_cast<int>(q.frac_bits));
}

namespace {

// shared by the 64-bit public entry point and the widened accumulator path
template <typename Int>
Int rne_shift_impl(Int value, unsigned bits) {
    if (bits == 0) return value;
    Int floor = value >> bits;  // arithmetic shift, rounds toward -inf
    Int rem = value - (floor << bits);
    Int half = Int{1} << (bits - 1);
    if (rem > half || (rem == half && (floor & 1))) ++floor;
    return floor;
}

struct LutRange {
    std::int64_t lo;
    std::int64_t hi;
    unsigned shift;
};

LutRange lut_range(const QFormat& q) {
    LutRange r;
    r.lo = std::max<std::int64_t>(q.q_min(), -(std::int64_t{4} << q.frac_bits));
    r.hi = std::min<std::int64_t>(q.q_max(), (std::int64_t{4} << q.frac_bits) - 1);
    r.shift = q.frac_bits - 5;  // 256 buckets over [-4, 4)
    return r;
}

std::size_t lut_index_for(std::int64_t value, const QFormat& q) {
    LutRange r = lut_range(q);
    std::int64_t c = std::clamp(value, r.lo, r.hi);
    return static_cast<std::size_t>((c >> r.shift) + 128);
}

}  // namespace

std::int64_t rne_shift_right(std::int64_t value, unsigned bits) {
    return rne_shift_impl(value, bits);
}

QuantizedModel quantize_model(const Network& net, const QFormat& q) {
    validate(q);
    if (net.layers.empty()) throw Error("quantize_model: empty network");
    for (const Layer& layer : net.layers) {
        if (layer.in > 1024 || layer.out > 1024) {
            throw Error("quantize_model: layer dimensions above 1024 are not supported");
        }
    }
    QuantizedModel qm;
    qm.format = q;
    qm.dims.push_back(net.layers.front().in);
    for (const Layer& layer : net.layers) qm.dims.push_back(layer.out);

    bool sat = false;
    for (const Layer& layer : net.layers) {
        qm.activations.push_back(layer.activation);
        std::vector<std::int32_t> w;
        w.reserve(layer.weights.size());
        for (double v : layer.weights) {
            w.push_back(quantize_value(v, q, &sat));
            qm.saturation_count += sat;
        }
        qm.weights.push_back(std::move(w));
        std::vector<std::int32_t> b;
        b.reserve(layer.biases.size());
        for (double v : layer.biases) {
            b.push_back(quantize_value(v, q, &sat));
            qm.saturation_count += sat;
        }
        qm.biases.push_back(std::move(b));
    }

    // entry k holds tansig at the midpoint of bucket k over [-4, 4)
    for (std::size_t k = 0; k < qm.tansig_lut.size(); ++k) {
        double mid = -4.0 + (static_cast<double>(k) + 0.5) / 32.0;
        qm.tansig_lut[k] = quantize_value(tansig(mid), q, nullptr);
    }

    qm.inv_scale_q = quantize_value(1.0 / net.normalization.scale, q, &sat);
    qm.saturation_count += sat;
    qm.offset_over_scale_q =
        quantize_value(net.normalization.offset / net.normalization.scale, q, &sat);
    qm.saturation_count += sat;

    std::string canonical = model_to_json(net);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "0x%016llx",
                  static_cast<unsigned long long>(
                      fnv1a64(std::span<const char>(canonical.data(), canonical.size()))));
    qm.fingerprint = buf;
    return qm;
}

double fixed_point_forward(const QuantizedModel& qm,
                           std::span<const double> normalized_input) {
    if (qm.dims.empty() || normalized_input.size() != qm.dims.front()) {
        throw Error("fixed_point_forward: input length mismatch");
    }
    const QFormat& q = qm.format;
    std::vector<std::int64_t> act(normalized_input.size());
    for (std::size_t i = 0; i < normalized_input.size(); ++i) {
        act[i] = quantize_value(normalized_input[i], q, nullptr);
    }
    for (std::size_t layer = 0; layer < qm.weights.size(); ++layer) {
        std::size_t in = qm.dims[layer];
        std::size_t out = qm.dims[layer + 1];
        std::vector<std::int64_t> next(out);
        for (std::size_t j = 0; j < out; ++j) {
            // bias joins the accumulator at product scale (2^-2f)
            __int128 acc = static_cast<__int128>(qm.biases[layer][j]) << q.frac_bits;
            for (std::size_t i = 0; i < in; ++i) {
                acc += static_cast<__int128>(qm.weights[layer][j * in + i]) * act[i];
            }
            __int128 y = rne_shift_impl(acc, q.frac_bits);
            std::int64_t clamped = static_cast<std::int64_t>(
                std::clamp<__int128>(y, q.q_min(), q.q_max()));
            if (qm.activations[layer] == Activation::Tansig) {
                clamped = qm.tansig_lut[lut_index_for(clamped, q)];
            }
            next[j] = clamped;
        }
        act = std::move(next);
    }
    return dequantize_value(act[0], q);
}

namespace {

bool valid_identifier(const std::string& name) {
    if (name.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_') {
        return false;
    }
    for (char c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

std::string signed_literal(std::int64_t value, unsigned width) {
    std::ostringstream out;
    if (value < 0) out << '-';
    out << width << "'sd" << (value < 0 ? -value : value);
    return out.str();
}

}  // namespace

std::string emit_verilog(const QuantizedModel& qm,
                         const std::string& module_name) {
    if (!valid_identifier(module_name)) {
        throw Error("emit_verilog: '" + module_name +
                    "' is not a valid module identifier");
    }
    const QFormat& q = qm.format;
    const unsigned w = q.total_bits;
    const std::size_t n_layers = qm.weights.size();
    for (std::size_t d : qm.dims) {
        if (d > 256) {
            throw Error("emit_verilog: layer dimensions above 256 are not supported");
        }
    }

    std::size_t max_dim = *std::max_element(qm.dims.begin(), qm.dims.end());
    unsigned sum_bits = 1;
    while ((std::size_t{1} << sum_bits) < max_dim) ++sum_bits;
    const unsigned acc_w = 2 * w + sum_bits + 2;
    const LutRange lr = lut_range(q);

    std::ostringstream v;
    v << "// " << module_name << ": fixed-point feedforward inference core\n";
    v << "// fingerprint: " << qm.fingerprint << "\n";
    v << "// format: Q" << (q.total_bits - q.frac_bits) << "." << q.frac_bits
      << " (" << q.total_bits << "-bit signed, " << q.frac_bits
      << " fractional bits)\n";
    v << "// dims:";
    for (std::size_t d : qm.dims) v << " " << d;
    v << "\n";
    v << "// input bus: " << qm.dims.front()
      << " normalized readings, one Q-format word each, element 0 at the LSBs\n";
    v << "// normalization: x = reading * " << qm.inv_scale_q << "/2^"
      << q.frac_bits << " - " << qm.offset_over_scale_q << "/2^" << q.frac_bits
      << " (applied upstream)\n";
    v << "module " << module_name << " (\n";
    v << "    input  wire clk,\n";
    v << "    input  wire rst,\n";
    v << "    input  wire start,\n";
    v << "    input  wire signed [" << qm.dims.front() * w - 1 << ":0] in_bus,\n";
    v << "    output reg  signed [" << w - 1 << ":0] out_value,\n";
    v << "    output reg  done\n";
    v << ");\n\n";

    // weights and biases are the only localparam constants in the module
    for (std::size_t l = 0; l < n_layers; ++l) {
        std::size_t in = qm.dims[l];
        std::size_t out = qm.dims[l + 1];
        for (std::size_t j = 0; j < out; ++j) {
            for (std::size_t i = 0; i < in; ++i) {
                v << "    localparam signed [" << w - 1 << ":0] W" << l << "_" << j
                  << "_" << i << " = "
                  << signed_literal(qm.weights[l][j * in + i], w) << ";\n";
            }
        }
        for (std::size_t j = 0; j < out; ++j) {
            v << "    localparam signed [" << w - 1 << ":0] B" << l << "_" << j
              << " = " << signed_literal(qm.biases[l][j], w) << ";\n";
        }
    }
    v << "\n";

    for (std::size_t l = 0; l < n_layers; ++l) {
        std::size_t in = qm.dims[l];
        std::size_t out = qm.dims[l + 1];
        v << "    function signed [" << w - 1 << ":0] weight" << l << ";\n";
        v << "        input [15:0] j;\n";
        v << "        input [15:0] i;\n";
        v << "        begin\n";
        v << "            case ({j[7:0], i[7:0]})\n";
        for (std::size_t j = 0; j < out; ++j) {
            for (std::size_t i = 0; i < in; ++i) {
                v << "                {8'd" << j << ", 8'd" << i << "}: weight" << l
                  << " = W" << l << "_" << j << "_" << i << ";\n";
            }
        }
        v << "                default: weight" << l << " = " << w << "'sd0;\n";
        v << "            endcase\n";
        v << "        end\n";
        v << "    endfunction\n\n";
        v << "    function signed [" << w - 1 << ":0] bias" << l << ";\n";
        v << "        input [15:0] j;\n";
        v << "        begin\n";
        v << "            case (j[7:0])\n";
        for (std::size_t j = 0; j < out; ++j) {
            v << "                8'd" << j << ": bias" << l << " = B" << l << "_"
              << j << ";\n";
        }
        v << "                default: bias" << l << " = " << w << "'sd0;\n";
        v << "            endcase\n";
        v << "        end\n";
        v << "    endfunction\n\n";
    }

    // tansig lookup over the clamped pre-activation range
    v << "    function signed [" << w - 1 << ":0] tansig_lut;\n";
    v << "        input [7:0] idx;\n";
    v << "        begin\n";
    v << "            case (idx)\n";
    for (std::size_t k = 0; k < qm.tansig_lut.size(); ++k) {
        v << "                8'd" << k << ": tansig_lut = "
          << signed_literal(qm.tansig_lut[k], w) << ";\n";
    }
    v << "                default: tansig_lut = " << w << "'sd0;\n";
    v << "            endcase\n";
    v << "        end\n";
    v << "    endfunction\n\n";

    v << "    function [7:0] lut_index;\n";
    v << "        input signed [" << w - 1 << ":0] val;\n";
    v << "        reg signed [" << w - 1 << ":0] c;\n";
    v << "        begin\n";
    v << "            c = val;\n";
    v << "            if (c < " << signed_literal(lr.lo, w) << ") c = "
      << signed_literal(lr.lo, w) << ";\n";
    v << "            if (c > " << signed_literal(lr.hi, w) << ") c = "
      << signed_literal(lr.hi, w) << ";\n";
    v << "            lut_index = (c >>> " << lr.shift << ") + 8'd128;\n";
    v << "        end\n";
    v << "    endfunction\n\n";

    // round-to-nearest-even rescale from product scale back to the format
    v << "    function signed [" << w - 1 << ":0] requantize;\n";
    v << "        input signed [" << acc_w - 1 << ":0] a;\n";
    v << "        reg signed [" << acc_w - 1 << ":0] s;\n";
    v << "        begin\n";
    v << "            s = a >>> " << q.frac_bits << ";\n";
    v << "            if (a[" << q.frac_bits - 1 << ":0] > " << q.frac_bits
      << "'d" << (std::uint64_t{1} << (q.frac_bits - 1)) << ") s = s + 1;\n";
    v << "            else if (a[" << q.frac_bits - 1 << ":0] == " << q.frac_bits
      << "'d" << (std::uint64_t{1} << (q.frac_bits - 1))
      << " && s[0]) s = s + 1;\n";
    v << "            if (s > " << acc_w << "'sd" << q.q_max() << ") requantize = "
      << signed_literal(q.q_max(), w) << ";\n";
    v << "            else if (s < -" << acc_w << "'sd" << -q.q_min()
      << ") requantize = " << signed_literal(q.q_min(), w) << ";\n";
    v << "            else requantize = s[" << w - 1 << ":0];\n";
    v << "        end\n";
    v << "    endfunction\n\n";

    // activation storage, one array per layer boundary
    for (std::size_t l = 0; l <= n_layers; ++l) {
        v << "    reg signed [" << w - 1 << ":0] act" << l << " [0:"
          << qm.dims[l] - 1 << "];\n";
    }
    v << "\n";
    v << "    reg [2:0] state;\n";
    v << "    reg [7:0] layer;\n";
    v << "    reg [15:0] neuron;\n";
    v << "    reg [15:0] term;\n";
    v << "    reg signed [" << acc_w - 1 << ":0] acc;\n";
    v << "    integer li;\n\n";
    v << "    localparam [2:0] S_IDLE = 3'd0, S_LOAD = 3'd1, S_INIT = 3'd2,\n";
    v << "                     S_MAC = 3'd3, S_STORE = 3'd4, S_DONE = 3'd5;\n\n";

    v << "    always @(posedge clk) begin\n";
    v << "        if (rst) begin\n";
    v << "            state <= S_IDLE;\n";
    v << "            done <= 1'b0;\n";
    v << "        end else begin\n";
    v << "            case (state)\n";
    v << "                S_IDLE: begin\n";
    v << "                    done <= 1'b0;\n";
    v << "                    if (start) state <= S_LOAD;\n";
    v << "                end\n";
    v << "                S_LOAD: begin\n";
    v << "                    for (li = 0; li < " << qm.dims.front()
      << "; li = li + 1)\n";
    v << "                        act0[li] <= in_bus[li*" << w << " +: " << w
      << "];\n";
    v << "                    layer <= 8'd0;\n";
    v << "                    neuron <= 16'd0;\n";
    v << "                    state <= S_INIT;\n";
    v << "                end\n";
    v << "                S_INIT: begin\n";
    v << "                    case (layer)\n";
    for (std::size_t l = 0; l < n_layers; ++l) {
        v << "                        8'd" << l << ": acc <= bias" << l
          << "(neuron) <<< " << q.frac_bits << ";\n";
    }
    v << "                        default: acc <= " << acc_w << "'sd0;\n";
    v << "                    endcase\n";
    v << "                    term <= 16'd0;\n";
    v << "                    state <= S_MAC;\n";
    v << "                end\n";
    v << "                S_MAC: begin\n";
    v << "                    case (layer)\n";
    for (std::size_t l = 0; l < n_layers; ++l) {
        v << "                        8'd" << l << ": acc <= acc + weight" << l
          << "(neuron, term) * act" << l << "[term];\n";
    }
    v << "                        default: acc <= acc;\n";
    v << "                    endcase\n";
    v << "                    case (layer)\n";
    for (std::size_t l = 0; l < n_layers; ++l) {
        v << "                        8'd" << l << ": if (term == 16'd"
          << qm.dims[l] - 1 << ") state <= S_STORE; else term <= term + 16'd1;\n";
    }
    v << "                        default: state <= S_IDLE;\n";
    v << "                    endcase\n";
    v << "                end\n";
    v << "                S_STORE: begin\n";
    v << "                    case (layer)\n";
    for (std::size_t l = 0; l < n_layers; ++l) {
        const char* expr = qm.activations[l] == Activation::Tansig
                               ? "tansig_lut(lut_index(requantize(acc)))"
                               : "requantize(acc)";
        v << "                        8'd" << l << ": act" << l + 1
          << "[neuron] <= " << expr << ";\n";
    }
    v << "                        default: ;\n";
    v << "                    endcase\n";
    v << "                    case (layer)\n";
    for (std::size_t l = 0; l < n_layers; ++l) {
        v << "                        8'd" << l << ": begin\n";
        v << "                            if (neuron == 16'd" << qm.dims[l + 1] - 1
          << ") begin\n";
        if (l + 1 == n_layers) {
            v << "                                state <= S_DONE;\n";
        } else {
            v << "                                layer <= 8'd" << l + 1 << ";\n";
            v << "                                neuron <= 16'd0;\n";
            v << "                                state <= S_INIT;\n";
        }
        v << "                            end else begin\n";
        v << "                                neuron <= neuron + 16'd1;\n";
        v << "                                state <= S_INIT;\n";
        v << "                            end\n";
        v << "                        end\n";
    }
    v << "                        default: state <= S_IDLE;\n";
    v << "                    endcase\n";
    v << "                end\n";
    v << "                S_DONE: begin\n";
    v << "                    out_value <= act" << n_layers << "[0];\n";
    v << "                    done <= 1'b1;\n";
    v << "                    state <= S_IDLE;\n";
    v << "                end\n";
    v << "                default: state <= S_IDLE;\n";
    v << "            endcase\n";
    v << "        end\n";
    v << "    end\n\n";
    v << "endmodule\n";
    return v.str();
}

std::string quantized_manifest_json(const QuantizedModel& qm) {
    nlohmann::ordered_json j;
    j["dims"] = qm.dims;
    j["format"] = {{"total_bits", qm.format.total_bits},
                   {"frac_bits", qm.format.frac_bits}};
    j["saturation_count"] = qm.saturation_count;
    j["fingerprint"] = qm.fingerprint;
    j["normalization"] = {{"inv_scale_q", qm.inv_scale_q},
                          {"offset_over_scale_q", qm.offset_over_scale_q}};
    return j.dump(2) + "\n";
}

}  // namespace feverscreen
