// Acceptance suite: runs every release criterion end to end and prints one
// PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli_helper.hpp"
#include "feverscreen/dataset.hpp"
#include "feverscreen/detector.hpp"
#include "feverscreen/hdlgen.hpp"
#include "feverscreen/metrics.hpp"
#include "feverscreen/network.hpp"
#include "feverscreen/rng.hpp"
#include "feverscreen/sensor.hpp"

using namespace feverscreen;
using testutil::run_cli;
using testutil::slurp;
using testutil::spit;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct PipelineArtifacts {
    std::filesystem::path dir;
    std::string csv;
    std::string split;
    std::string model;
    std::string curves;
    std::string eval_json;
    std::string train_stdout;
    double seconds = 0.0;
    bool ok = false;
};

// The seed-42 default pipeline, exercised through the CLI exactly as a user
// would run it.
PipelineArtifacts run_default_pipeline() {
    PipelineArtifacts a;
    a.dir = testutil::scratch_dir("acceptance");
    a.csv = (a.dir / "cohort.csv").string();
    a.split = (a.dir / "cohort.split.json").string();
    a.model = (a.dir / "model.json").string();
    a.curves = (a.dir / "curves.csv").string();
    a.eval_json = (a.dir / "eval.json").string();

    auto t0 = std::chrono::steady_clock::now();
    auto gen = run_cli("generate --out " + a.csv + " --seed 42");
    if (gen.exit_code != 0) return a;
    auto train = run_cli("train --data " + a.csv + " --out " + a.model +
                         " --curves-csv " + a.curves + " --seed 42");
    if (train.exit_code != 0) return a;
    a.train_stdout = train.out;
    auto eval = run_cli("evaluate --model " + a.model + " --data " + a.csv +
                        " --out " + a.eval_json + " --seed 42");
    if (eval.exit_code != 0) return a;
    auto t1 = std::chrono::steady_clock::now();
    a.seconds = std::chrono::duration<double>(t1 - t0).count();
    a.ok = true;
    return a;
}

void criterion_1_2_3(const PipelineArtifacts& art) {
    if (!art.ok) {
        report(1, false, "pipeline did not complete");
        report(2, false, "pipeline did not complete");
        report(3, false, "pipeline did not complete");
        return;
    }
    nlohmann::json eval = nlohmann::json::parse(slurp(art.eval_json));
    double overall_acc = eval["splits"]["overall"]["accuracy"].get<double>();
    double test_acc = eval["splits"]["testing"]["accuracy"].get<double>();
    bool c1 = overall_acc >= 0.95 && test_acc >= 0.95 && art.seconds <= 60.0;
    report(1, c1,
           "end-to-end accuracy: overall " + fmt(overall_acc) + " (>= 0.95), test " +
               fmt(test_acc) + " (>= 0.95), runtime " + fmt(art.seconds) + " s (<= 60)");

    double r = eval["regression_r"].get<double>();
    report(2, r >= 0.96, "regression: overall R " + fmt(r) + " (>= 0.96)");

    std::smatch m;
    double best_val = 1e9;
    long best_epoch = 999;
    std::regex epoch_re("best epoch: (\\d+)");
    std::regex mse_re("best validation mse: ([0-9.eE+-]+)");
    if (std::regex_search(art.train_stdout, m, epoch_re)) best_epoch = std::stol(m[1]);
    if (std::regex_search(art.train_stdout, m, mse_re)) best_val = std::stod(m[1]);
    bool c3 = best_val <= 0.005 && best_epoch <= 11;
    report(3, c3,
           "validation: best mse " + fmt(best_val) + " (<= 0.005) at epoch " +
               std::to_string(best_epoch) + " (<= 11)");
}

void criterion_4_gradients() {
    Rng rng(2024);
    const std::vector<std::vector<std::size_t>> shapes{
        {6, 5, 1}, {4, 3, 1}, {3, 2, 1}, {5, 4, 1}};
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto& dims = shapes[trial % shapes.size()];
        Network net = init_weights(dims, rng.next_u64());
        for (Layer& l : net.layers) {
            for (double& w : l.weights) w = rng.uniform(-1.0, 1.0);
            for (double& b : l.biases) b = rng.uniform(-0.5, 0.5);
        }
        std::vector<double> x(dims.front());
        for (double& v : x) v = rng.uniform(-1.5, 1.5);
        std::vector<double> target(dims.back());
        for (double& v : target) v = rng.uniform(-1.0, 1.0);

        Gradients g = backprop_gradients(net, x, target);
        const double h = 1e-5;
        auto probe = [&](double& slot, double grad) {
            double keep = slot;
            slot = keep + h;
            double up = mse_loss(forward(net, x), target);
            slot = keep - h;
            double down = mse_loss(forward(net, x), target);
            slot = keep;
            double fd = (up - down) / (2 * h);
            double rel = std::abs(grad - fd) /
                         std::max({std::abs(grad), std::abs(fd), 1e-6});
            worst = std::max(worst, rel);
        };
        for (std::size_t k = 0; k < net.layers.size(); ++k) {
            for (std::size_t i = 0; i < net.layers[k].weights.size(); ++i) {
                probe(net.layers[k].weights[i], g.weights[k][i]);
            }
            for (std::size_t i = 0; i < net.layers[k].biases.size(); ++i) {
                probe(net.layers[k].biases[i], g.biases[k][i]);
            }
        }
    }
    report(4, worst <= 1e-4,
           "gradient check: 100 networks, max relative error " + fmt(worst) +
               " (<= 1e-4)");
}

void criterion_5_metrics() {
    Rng rng(555);
    bool ok = true;
    for (int t = 0; t < 1000 && ok; ++t) {
        ConfusionMatrix cm{rng.below(500) + 1, rng.below(500) + 1,
                           rng.below(500), rng.below(500)};
        auto total = static_cast<double>(cm.total());
        ok = ok && accuracy(cm) == static_cast<double>(cm.tp + cm.tn) / total;
        ok = ok && tpr(cm) == static_cast<double>(cm.tp) /
                                  static_cast<double>(cm.tp + cm.fn);
        ok = ok && fpr(cm) == static_cast<double>(cm.fp) /
                                  static_cast<double>(cm.fp + cm.tn);
        ok = ok && specificity(cm) == static_cast<double>(cm.tn) /
                                          static_cast<double>(cm.tn + cm.fp);
    }
    // the four published rows from their implied counts
    struct Row {
        ConfusionMatrix cm;
        double want_tpr;
        double want_fpr;
    };
    const Row rows[] = {
        {{967, 967, 33, 33}, 0.967, 0.033},
        {{990, 990, 10, 10}, 0.990, 0.010},
        {{962, 962, 38, 38}, 0.962, 0.038},
        {{970, 970, 30, 30}, 0.970, 0.030},
    };
    for (const Row& row : rows) {
        ok = ok && tpr(row.cm) == row.want_tpr && fpr(row.cm) == row.want_fpr;
    }
    report(5, ok,
           "metric oracles: 1000 random matrices exact, four reference rows exact");
}

void criterion_6_cost() {
    Rng rng(666);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        CostSpec s;
        s.n1 = static_cast<int>(rng.below(4)) + 1;
        s.n2 = s.n1 + static_cast<int>(rng.below(5));
        s.nu = static_cast<int>(rng.below(6)) + 1;
        s.increment_weight = rng.uniform(0.0, 3.0);
        std::size_t horizon = static_cast<std::size_t>(s.n2 - s.n1 + 1);
        for (std::size_t i = 0; i < horizon; ++i) {
            s.desired.push_back(rng.uniform(-5, 5));
            s.reference.push_back(rng.uniform(-5, 5));
        }
        for (int i = 0; i <= s.nu; ++i) s.tentative.push_back(rng.uniform(-5, 5));
        double expected = 0.0;
        for (std::size_t i = 0; i < horizon; ++i) {
            expected += (s.desired[i] - s.reference[i]) * (s.desired[i] - s.reference[i]);
        }
        for (int j = 1; j <= s.nu; ++j) {
            double d = s.tentative[j] - s.tentative[j - 1];
            expected += s.increment_weight * d * d;
        }
        worst = std::max(worst, std::abs(evaluate_cost_j(s) - expected));
    }

    CostSpec tmpl;
    tmpl.n1 = 1;
    tmpl.n2 = 2;
    tmpl.nu = 2;
    tmpl.increment_weight = 0.4;
    tmpl.desired = {0.3, 0.9};
    tmpl.reference = {0.1, 0.4};
    tmpl.tentative = {0, 0, 0};
    std::vector<std::vector<double>> grid(10000);
    for (auto& u : grid) {
        u.resize(3);
        for (double& v : u) v = rng.uniform(-2, 2);
    }
    auto [best, cost] = minimize_cost_j(tmpl, grid);
    std::size_t arg = 0;
    double lowest = 1e300;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        CostSpec s = tmpl;
        s.tentative = grid[c];
        double j = evaluate_cost_j(s);
        if (j < lowest) {
            lowest = j;
            arg = c;
        }
    }
    bool min_ok = best == grid[arg] && cost == lowest;
    report(6, worst <= 1e-12 && min_ok,
           "predictive cost: oracle gap " + fmt(worst) +
               " (<= 1e-12), exhaustive argmin over 10^4 candidates agrees");
}

void criterion_7_fixed_point(const PipelineArtifacts& art) {
    if (!art.ok) {
        report(7, false, "pipeline did not complete");
        return;
    }
    Network net = load_model(art.model);
    QFormat q{16, 12};
    QuantizedModel qm = quantize_model(net, q);

    double half_ulp = std::ldexp(1.0, -13);
    double worst_w = 0.0;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const Layer& layer = net.layers[k];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            if (layer.weights[i] >= dequantize_value(q.q_min(), q) &&
                layer.weights[i] <= dequantize_value(q.q_max(), q)) {
                worst_w = std::max(worst_w,
                                   std::abs(dequantize_value(qm.weights[k][i], q) -
                                            layer.weights[i]));
            }
        }
    }

    Dataset ds = read_csv(art.csv);
    ds.split = read_split_manifest(art.split, ds.samples.size());
    std::size_t agree = 0;
    double worst_score_gap = 0.0;
    for (std::size_t idx : ds.split.test) {
        auto x = normalize_window(net, ds.samples[idx].features);
        double fl = forward(net, x)[0];
        double fx = fixed_point_forward(qm, x);
        worst_score_gap = std::max(worst_score_gap, std::abs(fl - fx));
        agree += (fl >= 0.5) == (fx >= 0.5);
    }
    double agreement =
        static_cast<double>(agree) / static_cast<double>(ds.split.test.size());

    std::string text = emit_verilog(qm, "fever_detector");
    bool emission_stable = text == emit_verilog(qm, "fever_detector");

    std::regex decl(
        "localparam signed \\[15:0\\] ([WB])(\\d+)_(\\d+)(?:_(\\d+))? = "
        "(-?)16'sd(\\d+);");
    std::size_t seen = 0;
    bool roundtrip = true;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), decl);
         it != std::sregex_iterator{}; ++it, ++seen) {
        const std::smatch& m = *it;
        std::size_t layer = std::stoul(m[2]);
        std::size_t j = std::stoul(m[3]);
        std::int64_t value = std::stoll(m[6]);
        if (m[5].str() == "-") value = -value;
        if (m[1].str() == "W") {
            std::size_t i = std::stoul(m[4]);
            roundtrip = roundtrip && qm.weights[layer][j * qm.dims[layer] + i] == value;
        } else {
            roundtrip = roundtrip && qm.biases[layer][j] == value;
        }
    }
    std::size_t expected = 0;
    for (const auto& w : qm.weights) expected += w.size();
    for (const auto& b : qm.biases) expected += b.size();
    roundtrip = roundtrip && seen == expected;

    // 0.05 is the frozen empirical regression bound for the seed-42 model;
    // the 256-bucket uninterpolated lookup caps activation error near 1/64,
    // so score gaps of a few hundredths are expected
    bool pass = worst_w <= half_ulp && agreement >= 0.99 && roundtrip &&
                emission_stable && worst_score_gap <= 0.05;
    report(7, pass,
           "fixed point: weight error " + fmt(worst_w) + " (<= 2^-13), verdict "
           "agreement " + fmt(agreement) + " (>= 0.99), max score gap " +
               fmt(worst_score_gap) + " (<= 0.05), constants round-trip, "
               "emission stable");
}

void criterion_8_sensor() {
    SensorModel model;
    const double analytic = 33.217567264771250;  // 38 - 13/e at t = 2 s
    auto endpoint = [&](double dt) {
        SensorState s{25.0, 0.0};
        auto steps = static_cast<std::size_t>(2.0 / dt + 0.5);
        for (std::size_t i = 0; i < steps; ++i) s = step_sensor(s, 38.0, dt, model);
        return s.reading;
    };
    double e1 = std::abs(endpoint(0.04) - analytic);
    double e2 = std::abs(endpoint(0.02) - analytic);
    double ratio = e1 / e2;
    bool euler_ok = ratio >= 1.8 && ratio <= 2.2;

    Rng rng(888);
    bool monotone = true;
    for (int t = 0; t < 500; ++t) {
        double body = rng.uniform(26.0, 42.0);
        double d1 = rng.uniform(0.0, 4.0);
        double d2 = d1 + rng.uniform(0.0, 4.0);
        monotone = monotone && attenuate_at_distance(body, d1, model) >=
                                   attenuate_at_distance(body, d2, model);
    }
    report(8, euler_ok && monotone,
           "sensor physics: dt-halving error ratio " + fmt(ratio) +
               " (in [1.8, 2.2]), distance attenuation monotone");
}

void criterion_9_determinism(const PipelineArtifacts& art) {
    if (!art.ok) {
        report(9, false, "pipeline did not complete");
        return;
    }
    auto dir = art.dir;
    bool ok = true;
    std::string detail;

    auto check = [&](const std::string& what, bool same) {
        ok = ok && same;
        if (!same) detail += " " + what + " differs;";
    };

    std::string csv2 = (dir / "c2.csv").string();
    run_cli("generate --out " + csv2 + " --seed 42");
    check("generate", slurp(csv2) == slurp(art.csv) &&
                          slurp(dir / "c2.split.json") == slurp(art.split));

    std::string model2 = (dir / "m2.json").string();
    std::string curves2 = (dir / "cur2.csv").string();
    run_cli("train --data " + art.csv + " --out " + model2 + " --curves-csv " +
            curves2 + " --seed 42");
    check("train", slurp(model2) == slurp(art.model) &&
                       slurp(curves2) == slurp(art.curves));

    std::string eval2 = (dir / "e2.json").string();
    std::string svg_a = (dir / "ra.svg").string();
    std::string svg_b = (dir / "rb.svg").string();
    auto ea = run_cli("evaluate --model " + art.model + " --data " + art.csv +
                      " --out " + eval2 + " --roc-svg " + svg_a + " --seed 42");
    check("evaluate", slurp(eval2) == slurp(art.eval_json));
    auto eb = run_cli("evaluate --model " + art.model + " --data " + art.csv +
                      " --out " + eval2 + " --roc-svg " + svg_b + " --seed 42");
    check("evaluate-svg", slurp(svg_a) == slurp(svg_b) && ea.out == eb.out);

    // noiseless subject series through the trained default model: a 39.0 degC
    // subject must read positive, a 36.5 degC subject negative, and a short
    // series yields the null-score record
    std::string probe = (dir / "probe.txt").string();
    SensorModel sensor;
    auto series_line = [&](double body) {
        std::string line;
        char num[32];
        for (double r : simulate_reading_series(body, 0.0, 60, 0.25, 0.0, 1, sensor)) {
            std::snprintf(num, sizeof(num), "%.9g ", r);
            line += num;
        }
        return line;
    };
    spit(probe, series_line(39.0) + "\n" + series_line(36.5) + "\n36.2 36.2 36.2\n");
    auto da = run_cli("detect --model " + art.model + " --input " + probe);
    auto db = run_cli("detect --model " + art.model + " --input " + probe);
    check("detect", da.out == db.out && da.exit_code == 0);
    std::size_t second_line = da.out.find('\n') + 1;
    check("detect-verdicts",
          da.out.find("\"verdict\":\"positive\"") < second_line &&
              da.out.find("\"verdict\":\"negative\"") != std::string::npos &&
              da.out.find("\"verdict\":\"negative\"") >= second_line &&
              da.out.find("\"score\":null,\"verdict\":\"insufficient-history\"") !=
                  std::string::npos);

    std::string va = (dir / "va.v").string();
    std::string vb = (dir / "vb.v").string();
    run_cli("emit-hdl --model " + art.model + " --out " + va);
    run_cli("emit-hdl --model " + art.model + " --out " + vb);
    check("emit-hdl", slurp(va) == slurp(vb) && !slurp(va).empty() &&
                          slurp(dir / "va.json") == slurp(dir / "vb.json"));

    auto r1 = run_cli("report --eval " + art.eval_json);
    auto r2 = run_cli("report --eval " + art.eval_json);
    check("report", r1.out == r2.out && r1.exit_code == 0);

    report(9, ok, ok ? "determinism: all six subcommands byte-identical across runs"
                     : "determinism:" + detail);
}

void criterion_10_split() {
    auto dummy = [](std::size_t n) {
        Dataset ds;
        for (std::size_t i = 0; i < n; ++i) {
            Sample s;
            s.features = {static_cast<double>(i)};
            s.label = i % 2 == 0 ? 1 : 0;
            ds.samples.push_back(std::move(s));
        }
        return ds;
    };
    Dataset a = split_dataset(dummy(693), 42);
    Dataset b = split_dataset(dummy(100), 42);
    bool ok = a.split.train.size() == 485 && a.split.val.size() == 103 &&
              a.split.test.size() == 105 && b.split.train.size() == 70 &&
              b.split.val.size() == 15 && b.split.test.size() == 15;
    report(10, ok,
           "split rule: n=693 -> (" + std::to_string(a.split.train.size()) + "," +
               std::to_string(a.split.val.size()) + "," +
               std::to_string(a.split.test.size()) + "), n=100 -> (" +
               std::to_string(b.split.train.size()) + "," +
               std::to_string(b.split.val.size()) + "," +
               std::to_string(b.split.test.size()) + ")");
}

}  // namespace

int main() {
    std::printf("acceptance suite (cli: %s)\n", FEVERSCREEN_CLI_PATH);
    PipelineArtifacts art = run_default_pipeline();
    criterion_1_2_3(art);
    criterion_4_gradients();
    criterion_5_metrics();
    criterion_6_cost();
    criterion_7_fixed_point(art);
    criterion_8_sensor();
    criterion_9_determinism(art);
    criterion_10_split();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
