#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "feverscreen/dataset.hpp"
#include "feverscreen/detector.hpp"
#include "feverscreen/error.hpp"
#include "feverscreen/hdlgen.hpp"
#include "feverscreen/metrics.hpp"
#include "feverscreen/network.hpp"
#include "feverscreen/sensor.hpp"

namespace fsn = feverscreen;

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fsn::Error("cannot write file: " + path);
    out << text;
    if (!out) throw fsn::Error("write failed: " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fsn::Error("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

bool file_exists(const std::string& path) {
    std::ifstream in(path);
    return in.good();
}

std::string derive_split_path(const std::string& data_path) {
    if (data_path.size() > 4 &&
        data_path.compare(data_path.size() - 4, 4, ".csv") == 0) {
        return data_path.substr(0, data_path.size() - 4) + ".split.json";
    }
    return data_path + ".split.json";
}

// Resolve the split for a loaded dataset: explicit manifest path, else the
// sibling manifest written by `generate`, else a fresh seeded split.
fsn::Dataset resolve_split(fsn::Dataset ds, const std::string& split_path,
                           const std::string& data_path, std::uint64_t seed) {
    if (!split_path.empty()) {
        ds.split = fsn::read_split_manifest(split_path, ds.samples.size());
        return ds;
    }
    std::string sibling = derive_split_path(data_path);
    if (file_exists(sibling)) {
        ds.split = fsn::read_split_manifest(sibling, ds.samples.size());
        return ds;
    }
    return fsn::split_dataset(std::move(ds), seed);
}

// --config JSON: top-level keys are subcommand names (plus "seed"), each
// holding an object of flag-name -> value overrides applied as new defaults.
class ConfigOverrides {
public:
    void load(const std::string& path) {
        try {
            cfg_ = nlohmann::json::parse(read_text(path));
        } catch (const nlohmann::json::exception& e) {
            throw fsn::Error(std::string("config file: ") + e.what());
        }
        if (!cfg_.is_object()) throw fsn::Error("config file: expected an object");
    }

    template <typename T>
    void apply(const std::string& command, const std::string& key, T& value) const {
        if (!cfg_.contains(command)) return;
        const auto& section = cfg_.at(command);
        if (!section.is_object()) {
            throw fsn::Error("config file: section '" + command +
                             "' must be an object");
        }
        if (!section.contains(key)) return;
        try {
            value = section.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw fsn::Error("config file: bad value for '" + command + "." + key +
                             "': " + e.what());
        }
    }

    void apply_seed(std::uint64_t& seed) const {
        if (cfg_.contains("seed")) {
            try {
                seed = cfg_.at("seed").get<std::uint64_t>();
            } catch (const nlohmann::json::exception& e) {
                throw fsn::Error(std::string("config file: bad seed: ") + e.what());
            }
        }
    }

private:
    nlohmann::json cfg_ = nlohmann::json::object();
};

std::vector<double> parse_reading_line(const std::string& line) {
    std::string cleaned = line;
    for (char& c : cleaned) {
        if (c == ',' || c == '\t') c = ' ';
    }
    std::istringstream in(cleaned);
    std::vector<double> readings;
    std::string tok;
    while (in >> tok) {
        try {
            std::size_t pos = 0;
            double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            readings.push_back(v);
        } catch (const std::exception&) {
            throw fsn::Error("bad reading '" + tok + "'");
        }
    }
    return readings;
}

fsn::EvalReport eval_report_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw fsn::Error(std::string("eval report: ") + e.what());
    }
    auto split_from = [&](const std::string& name) {
        const auto& s = j.at("splits").at(name);
        fsn::SplitMetrics m;
        m.cm.tp = s.at("tp").get<std::uint64_t>();
        m.cm.tn = s.at("tn").get<std::uint64_t>();
        m.cm.fp = s.at("fp").get<std::uint64_t>();
        m.cm.fn = s.at("fn").get<std::uint64_t>();
        m.accuracy = s.at("accuracy").get<double>();
        m.tpr = s.at("tpr").get<double>();
        m.fpr = s.at("fpr").get<double>();
        m.specificity = s.at("specificity").get<double>();
        return m;
    };
    try {
        fsn::EvalReport report;
        report.training = split_from("training");
        report.testing = split_from("testing");
        report.validation = split_from("validation");
        report.overall = split_from("overall");
        report.regression_r = j.at("regression_r").get<double>();
        report.mse = j.at("mse").get<double>();
        for (const auto& p : j.at("roc")) {
            report.roc.push_back({p.at("threshold").get<double>(),
                                  p.at("tpr").get<double>(),
                                  p.at("fpr").get<double>()});
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw fsn::Error(std::string("eval report: ") + e.what());
    }
}

struct GenerateArgs {
    std::string out;
    std::string split_out;
    fsn::CohortSpec spec;
    fsn::SensorModel sensor;
};

int run_generate(const GenerateArgs& a, std::uint64_t seed) {
    fsn::CohortSpec spec = a.spec;
    spec.seed = seed;
    fsn::Dataset ds = fsn::generate_cohort(spec, a.sensor);
    ds = fsn::split_dataset(std::move(ds), seed);
    fsn::write_csv(ds, a.out);
    std::string split_path =
        a.split_out.empty() ? derive_split_path(a.out) : a.split_out;
    fsn::write_split_manifest(ds.split, split_path);
    std::size_t positives = 0;
    for (const auto& s : ds.samples) positives += s.label == 1;
    std::cout << "wrote " << ds.samples.size() << " samples (" << positives
              << " positive) to " << a.out << "\n";
    std::cout << "split sizes: train=" << ds.split.train.size()
              << " val=" << ds.split.val.size()
              << " test=" << ds.split.test.size() << " -> " << split_path
              << "\n";
    return 0;
}

struct TrainArgs {
    std::string data;
    std::string split;
    std::string out = "model.json";
    std::string curves_csv_path;
    std::string curves_svg_path;
    fsn::TrainConfig config;
};

int run_train(const TrainArgs& a, std::uint64_t seed) {
    fsn::TrainConfig config = a.config;
    config.seed = seed;
    fsn::Dataset ds = resolve_split(fsn::read_csv(a.data), a.split, a.data, seed);
    std::size_t width = ds.samples.front().features.size();
    std::vector<std::size_t> dims;
    dims.push_back(width);
    dims.insert(dims.end(), config.hidden_sizes.begin(), config.hidden_sizes.end());
    dims.push_back(1);
    fsn::Network net = fsn::init_weights(dims, seed);
    fsn::TrainingReport report = fsn::train(net, ds, config);
    fsn::save_model(report.best_network, a.out);
    if (!a.curves_csv_path.empty()) {
        write_text(a.curves_csv_path, fsn::curves_csv(report));
    }
    if (!a.curves_svg_path.empty()) {
        write_text(a.curves_svg_path, fsn::curves_svg(report));
    }
    std::cout << "epochs run: " << report.val_mse.size() << "\n";
    std::cout << "best epoch: " << report.best_epoch << "\n";
    std::cout << "best validation mse: " << fmt9(report.best_val_mse) << "\n";
    std::cout << "model written to " << a.out << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string model;
    std::string data;
    std::string split;
    std::string out;
    std::string roc_csv_path;
    std::string roc_svg_path;
    std::size_t n_thresholds = 101;
    double threshold = 0.5;
};

int run_evaluate(const EvaluateArgs& a, std::uint64_t seed) {
    fsn::Network net = fsn::load_model(a.model);
    fsn::Dataset ds = resolve_split(fsn::read_csv(a.data), a.split, a.data, seed);
    std::size_t width = ds.samples.front().features.size();
    if (width != net.input_size()) {
        throw fsn::Error("model expects " + std::to_string(net.input_size()) +
                         " inputs but dataset rows have " + std::to_string(width));
    }
    fsn::NarxConfig cfg;
    cfg.input_delays = width > 2 ? width - 2 : width;
    cfg.output_delays = width > 2 ? 2 : 0;
    cfg.threshold = a.threshold;
    fsn::EvalReport report = fsn::evaluate_model(net, ds, cfg, a.n_thresholds);
    std::cout << fsn::format_report_table(report);
    if (!a.out.empty()) write_text(a.out, fsn::eval_report_json(report));
    if (!a.roc_csv_path.empty()) write_text(a.roc_csv_path, fsn::roc_csv(report.roc));
    if (!a.roc_svg_path.empty()) write_text(a.roc_svg_path, fsn::roc_svg(report.roc));
    return 0;
}

struct DetectArgs {
    std::string model;
    std::string input = "-";
    fsn::NarxConfig cfg;
};

int run_detect(const DetectArgs& a) {
    fsn::Network net = fsn::load_model(a.model);
    std::ifstream file;
    std::istream* in = &std::cin;
    if (a.input != "-") {
        file.open(a.input);
        if (!file) throw fsn::Error("cannot open file: " + a.input);
        in = &file;
    }
    std::string line;
    while (std::getline(*in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto readings = parse_reading_line(line);
        std::size_t window = a.cfg.input_delays + a.cfg.output_delays;
        if (readings.size() < window) {
            nlohmann::ordered_json j;
            j["score"] = nullptr;
            j["verdict"] = "insufficient-history";
            j["threshold"] = a.cfg.threshold;
            std::cout << j.dump() << "\n" << std::flush;
            continue;
        }
        fsn::Verdict v = fsn::classify(net, readings, a.cfg);
        std::cout << fsn::verdict_json_line(v) << "\n" << std::flush;
    }
    return 0;
}

struct EmitHdlArgs {
    std::string model;
    std::string module_name = "fever_detector";
    std::string out;
    std::string manifest;
    unsigned total_bits = 16;
    unsigned frac_bits = 12;
};

int run_emit_hdl(const EmitHdlArgs& a) {
    fsn::Network net = fsn::load_model(a.model);
    fsn::QFormat q{a.total_bits, a.frac_bits};
    fsn::validate(q);
    fsn::QuantizedModel qm = fsn::quantize_model(net, q);
    std::string out = a.out.empty() ? a.module_name + ".v" : a.out;
    write_text(out, fsn::emit_verilog(qm, a.module_name));
    std::string manifest = a.manifest;
    if (manifest.empty()) {
        manifest = out.size() > 2 && out.compare(out.size() - 2, 2, ".v") == 0
                       ? out.substr(0, out.size() - 2) + ".json"
                       : out + ".json";
    }
    write_text(manifest, fsn::quantized_manifest_json(qm));
    std::cout << "wrote " << out << " and " << manifest << "\n";
    std::cout << "saturated constants: " << qm.saturation_count << "\n";
    std::cout << "fingerprint: " << qm.fingerprint << "\n";
    return 0;
}

struct ReportArgs {
    std::string eval;
    std::string roc_svg_path;
    std::string curves;
    std::string curves_svg_path;
};

int run_report(const ReportArgs& a) {
    fsn::EvalReport report = eval_report_from_json_text(read_text(a.eval));
    std::cout << fsn::format_report_table(report);
    if (!a.roc_svg_path.empty()) {
        if (report.roc.empty()) throw fsn::Error("eval report has no roc points");
        write_text(a.roc_svg_path, fsn::roc_svg(report.roc));
    }
    if (!a.curves.empty()) {
        fsn::TrainingReport tr;
        std::istringstream in(read_text(a.curves));
        std::string line;
        if (!std::getline(in, line) ||
            line.find("epoch,train_mse,val_mse,test_mse") != 0) {
            throw fsn::Error("curves file: expected header "
                             "epoch,train_mse,val_mse,test_mse");
        }
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string cell;
            std::vector<double> row;
            while (std::getline(ls, cell, ',')) {
                try {
                    row.push_back(std::stod(cell));
                } catch (const std::exception&) {
                    throw fsn::Error("curves file line " + std::to_string(line_no) +
                                     ": bad value '" + cell + "'");
                }
            }
            if (row.size() != 4) {
                throw fsn::Error("curves file line " + std::to_string(line_no) +
                                 ": expected 4 columns");
            }
            tr.train_mse.push_back(row[1]);
            tr.val_mse.push_back(row[2]);
            tr.test_mse.push_back(row[3]);
        }
        if (tr.val_mse.empty()) throw fsn::Error("curves file: no rows");
        if (!a.curves_svg_path.empty()) {
            write_text(a.curves_svg_path, fsn::curves_svg(tr));
        }
        double best = tr.val_mse[0];
        std::size_t best_epoch = 1;
        for (std::size_t e = 1; e < tr.val_mse.size(); ++e) {
            if (tr.val_mse[e] < best) {
                best = tr.val_mse[e];
                best_epoch = e + 1;
            }
        }
        std::cout << "best epoch: " << best_epoch << "\n";
        std::cout << "best validation mse: " << fmt9(best) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    ConfigOverrides cfg;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                cfg.load(argv[i + 1]);
            } catch (const fsn::Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            }
            break;
        }
    }

    CLI::App app{"Fever screening pipeline: synthetic thermal-sensor cohorts, "
                 "lag-window detector training, evaluation, and fixed-point "
                 "HDL generation"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 42;
    std::string config_path;
    try {
        cfg.apply_seed(seed);
    } catch (const fsn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    app.add_option("--seed", seed, "global random seed");
    app.add_option("--config", config_path, "JSON file overriding defaults");

    GenerateArgs gen;
    TrainArgs trainer;
    EvaluateArgs evaluator;
    DetectArgs detect;
    EmitHdlArgs hdl;
    ReportArgs reporter;

    try {
        auto* g = app.add_subcommand("generate",
                                     "generate a synthetic cohort CSV and split manifest");
        cfg.apply("generate", "out", gen.out);
        cfg.apply("generate", "split-out", gen.split_out);
        cfg.apply("generate", "n-positive", gen.spec.n_positive);
        cfg.apply("generate", "n-negative", gen.spec.n_negative);
        cfg.apply("generate", "positive-mean", gen.spec.positive_temp_mean);
        cfg.apply("generate", "positive-std", gen.spec.positive_temp_std);
        cfg.apply("generate", "negative-mean", gen.spec.negative_temp_mean);
        cfg.apply("generate", "negative-std", gen.spec.negative_temp_std);
        cfg.apply("generate", "fever-threshold", gen.spec.fever_threshold);
        cfg.apply("generate", "negative-cap", gen.spec.negative_temp_cap);
        cfg.apply("generate", "distance-min", gen.spec.distance_min);
        cfg.apply("generate", "distance-max", gen.spec.distance_max);
        cfg.apply("generate", "input-delays", gen.spec.input_delays);
        cfg.apply("generate", "output-delays", gen.spec.output_delays);
        cfg.apply("generate", "n-steps", gen.spec.n_steps);
        cfg.apply("generate", "dt", gen.spec.dt);
        cfg.apply("generate", "noise-std", gen.spec.noise_std);
        cfg.apply("generate", "t-ambient", gen.sensor.t_ambient);
        cfg.apply("generate", "t-c", gen.sensor.t_c);
        cfg.apply("generate", "s0", gen.sensor.s0);
        cfg.apply("generate", "k-d", gen.sensor.k_d);
        g->add_option("--out", gen.out, "output CSV path")->required();
        g->add_option("--split-out", gen.split_out, "split manifest path");
        g->add_option("--n-positive", gen.spec.n_positive, "febrile subjects");
        g->add_option("--n-negative", gen.spec.n_negative, "afebrile subjects");
        g->add_option("--positive-mean", gen.spec.positive_temp_mean, "degC");
        g->add_option("--positive-std", gen.spec.positive_temp_std, "degC");
        g->add_option("--negative-mean", gen.spec.negative_temp_mean, "degC");
        g->add_option("--negative-std", gen.spec.negative_temp_std, "degC");
        g->add_option("--fever-threshold", gen.spec.fever_threshold,
                      "positive body temps are at or above this");
        g->add_option("--negative-cap", gen.spec.negative_temp_cap,
                      "negative body temps stay below this");
        g->add_option("--distance-min", gen.spec.distance_min, "meters");
        g->add_option("--distance-max", gen.spec.distance_max, "meters");
        g->add_option("--input-delays", gen.spec.input_delays);
        g->add_option("--output-delays", gen.spec.output_delays);
        g->add_option("--n-steps", gen.spec.n_steps, "readings per subject");
        g->add_option("--dt", gen.spec.dt, "seconds per step");
        g->add_option("--noise-std", gen.spec.noise_std, "degC");
        g->add_option("--t-ambient", gen.sensor.t_ambient, "degC");
        g->add_option("--t-c", gen.sensor.t_c, "sensor time constant, seconds");
        g->add_option("--s0", gen.sensor.s0, "attenuation length scale, meters");
        g->add_option("--k-d", gen.sensor.k_d, "dissipation factor");

        auto* t = app.add_subcommand("train", "train the detector on a cohort CSV");
        cfg.apply("train", "data", trainer.data);
        cfg.apply("train", "split", trainer.split);
        cfg.apply("train", "out", trainer.out);
        cfg.apply("train", "curves-csv", trainer.curves_csv_path);
        cfg.apply("train", "curves-svg", trainer.curves_svg_path);
        cfg.apply("train", "max-epochs", trainer.config.max_epochs);
        cfg.apply("train", "hidden", trainer.config.hidden_sizes);
        cfg.apply("train", "learning-rate", trainer.config.learning_rate);
        cfg.apply("train", "momentum", trainer.config.momentum);
        cfg.apply("train", "patience", trainer.config.patience);
        cfg.apply("train", "batch-size", trainer.config.batch_size);
        cfg.apply("train", "min-reference", trainer.config.min_reference);
        cfg.apply("train", "max-plant-output", trainer.config.max_plant_output);
        t->add_option("--data", trainer.data, "cohort CSV")->required();
        t->add_option("--split", trainer.split, "split manifest JSON");
        t->add_option("--out", trainer.out, "model output path");
        t->add_option("--curves-csv", trainer.curves_csv_path);
        t->add_option("--curves-svg", trainer.curves_svg_path);
        t->add_option("--max-epochs", trainer.config.max_epochs);
        t->add_option("--hidden", trainer.config.hidden_sizes, "hidden layer sizes")
            ->delimiter(',');
        t->add_option("--learning-rate", trainer.config.learning_rate);
        t->add_option("--momentum", trainer.config.momentum);
        t->add_option("--patience", trainer.config.patience);
        t->add_option("--batch-size", trainer.config.batch_size);
        t->add_option("--min-reference", trainer.config.min_reference,
                      "lower clamp on normalized inputs");
        t->add_option("--max-plant-output", trainer.config.max_plant_output,
                      "upper clamp on training targets");

        auto* e = app.add_subcommand("evaluate",
                                     "evaluate a trained model against a labeled CSV");
        cfg.apply("evaluate", "model", evaluator.model);
        cfg.apply("evaluate", "data", evaluator.data);
        cfg.apply("evaluate", "split", evaluator.split);
        cfg.apply("evaluate", "out", evaluator.out);
        cfg.apply("evaluate", "roc-csv", evaluator.roc_csv_path);
        cfg.apply("evaluate", "roc-svg", evaluator.roc_svg_path);
        cfg.apply("evaluate", "n-thresholds", evaluator.n_thresholds);
        cfg.apply("evaluate", "threshold", evaluator.threshold);
        e->add_option("--model", evaluator.model, "model JSON")->required();
        e->add_option("--data", evaluator.data, "cohort CSV")->required();
        e->add_option("--split", evaluator.split, "split manifest JSON");
        e->add_option("--out", evaluator.out, "evaluation report JSON path");
        e->add_option("--roc-csv", evaluator.roc_csv_path);
        e->add_option("--roc-svg", evaluator.roc_svg_path);
        e->add_option("--n-thresholds", evaluator.n_thresholds);
        e->add_option("--threshold", evaluator.threshold, "verdict threshold");

        auto* d = app.add_subcommand(
            "detect", "classify reading series (one subject per line)");
        cfg.apply("detect", "model", detect.model);
        cfg.apply("detect", "input", detect.input);
        cfg.apply("detect", "threshold", detect.cfg.threshold);
        cfg.apply("detect", "input-delays", detect.cfg.input_delays);
        cfg.apply("detect", "output-delays", detect.cfg.output_delays);
        d->add_option("--model", detect.model, "model JSON")->required();
        d->add_option("--input", detect.input, "readings file, or - for stdin");
        d->add_option("--threshold", detect.cfg.threshold);
        d->add_option("--input-delays", detect.cfg.input_delays);
        d->add_option("--output-delays", detect.cfg.output_delays);

        auto* h = app.add_subcommand("emit-hdl",
                                     "compile a trained model to a Verilog module");
        cfg.apply("emit-hdl", "model", hdl.model);
        cfg.apply("emit-hdl", "module-name", hdl.module_name);
        cfg.apply("emit-hdl", "out", hdl.out);
        cfg.apply("emit-hdl", "manifest", hdl.manifest);
        cfg.apply("emit-hdl", "total-bits", hdl.total_bits);
        cfg.apply("emit-hdl", "frac-bits", hdl.frac_bits);
        h->add_option("--model", hdl.model, "model JSON")->required();
        h->add_option("--module-name", hdl.module_name);
        h->add_option("--out", hdl.out, "Verilog output path (default <module>.v)");
        h->add_option("--manifest", hdl.manifest, "manifest JSON path");
        h->add_option("--total-bits", hdl.total_bits);
        h->add_option("--frac-bits", hdl.frac_bits);

        auto* r = app.add_subcommand("report",
                                     "render tables and charts from saved reports");
        cfg.apply("report", "eval", reporter.eval);
        cfg.apply("report", "roc-svg", reporter.roc_svg_path);
        cfg.apply("report", "curves", reporter.curves);
        cfg.apply("report", "curves-svg", reporter.curves_svg_path);
        r->add_option("--eval", reporter.eval, "evaluation report JSON")->required();
        r->add_option("--roc-svg", reporter.roc_svg_path);
        r->add_option("--curves", reporter.curves, "training curves CSV");
        r->add_option("--curves-svg", reporter.curves_svg_path);

        app.parse(argc, argv);

        if (g->parsed()) return run_generate(gen, seed);
        if (t->parsed()) return run_train(trainer, seed);
        if (e->parsed()) return run_evaluate(evaluator, seed);
        if (d->parsed()) return run_detect(detect);
        if (h->parsed()) return run_emit_hdl(hdl);
        if (r->parsed()) return run_report(reporter);
        return 2;
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fsn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
