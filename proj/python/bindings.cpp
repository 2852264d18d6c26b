#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "feverscreen/dataset.hpp"
#include "feverscreen/detector.hpp"
#include "feverscreen/error.hpp"
#include "feverscreen/hdlgen.hpp"
#include "feverscreen/metrics.hpp"
#include "feverscreen/network.hpp"
#include "feverscreen/sensor.hpp"

namespace py = pybind11;
using namespace feverscreen;

PYBIND11_MODULE(_feverscreen, m) {
    m.doc() = "Fever screening pipeline: thermal sensor simulation, lag-window "
              "detector training, metrics, and fixed-point HDL generation";

    py::register_exception<Error>(m, "FeverscreenError", PyExc_ValueError);

    py::class_<SensorModel>(m, "SensorModel")
        .def(py::init<>())
        .def_readwrite("k_d", &SensorModel::k_d)
        .def_readwrite("t_c", &SensorModel::t_c)
        .def_readwrite("s0", &SensorModel::s0)
        .def_readwrite("t_ambient", &SensorModel::t_ambient);

    py::class_<SensorState>(m, "SensorState")
        .def(py::init<>())
        .def_readwrite("reading", &SensorState::reading)
        .def_readwrite("time", &SensorState::time);

    m.def("attenuate_at_distance", &attenuate_at_distance, py::arg("body_temp"),
          py::arg("distance"), py::arg("model"));
    m.def("step_sensor", &step_sensor, py::arg("state"), py::arg("target_temp"),
          py::arg("dt"), py::arg("model"));
    m.def("simulate_reading_series", &simulate_reading_series,
          py::arg("body_temp"), py::arg("distance"), py::arg("n_steps"),
          py::arg("dt"), py::arg("noise_std"), py::arg("seed"), py::arg("model"));

    py::class_<Sample>(m, "Sample")
        .def(py::init<>())
        .def_readwrite("features", &Sample::features)
        .def_readwrite("label", &Sample::label);

    py::class_<SplitIndices>(m, "SplitIndices")
        .def(py::init<>())
        .def_readwrite("train", &SplitIndices::train)
        .def_readwrite("val", &SplitIndices::val)
        .def_readwrite("test", &SplitIndices::test);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init<>())
        .def_readwrite("samples", &Dataset::samples)
        .def_readwrite("split", &Dataset::split);

    py::class_<CohortSpec>(m, "CohortSpec")
        .def(py::init<>())
        .def_readwrite("n_positive", &CohortSpec::n_positive)
        .def_readwrite("n_negative", &CohortSpec::n_negative)
        .def_readwrite("positive_temp_mean", &CohortSpec::positive_temp_mean)
        .def_readwrite("positive_temp_std", &CohortSpec::positive_temp_std)
        .def_readwrite("negative_temp_mean", &CohortSpec::negative_temp_mean)
        .def_readwrite("negative_temp_std", &CohortSpec::negative_temp_std)
        .def_readwrite("fever_threshold", &CohortSpec::fever_threshold)
        .def_readwrite("negative_temp_cap", &CohortSpec::negative_temp_cap)
        .def_readwrite("distance_min", &CohortSpec::distance_min)
        .def_readwrite("distance_max", &CohortSpec::distance_max)
        .def_readwrite("input_delays", &CohortSpec::input_delays)
        .def_readwrite("output_delays", &CohortSpec::output_delays)
        .def_readwrite("n_steps", &CohortSpec::n_steps)
        .def_readwrite("dt", &CohortSpec::dt)
        .def_readwrite("noise_std", &CohortSpec::noise_std)
        .def_readwrite("seed", &CohortSpec::seed);

    m.def("generate_cohort", &generate_cohort, py::arg("spec"), py::arg("sensor"));
    m.def("extract_features",
          [](const std::vector<double>& readings, std::size_t input_delays,
             std::size_t output_delays) {
              return extract_features(readings, input_delays, output_delays);
          },
          py::arg("readings"), py::arg("input_delays"), py::arg("output_delays"));
    m.def("split_dataset", &split_dataset, py::arg("dataset"), py::arg("seed"));
    m.def("read_csv", &read_csv, py::arg("path"));
    m.def("write_csv", &write_csv, py::arg("dataset"), py::arg("path"));
    m.def("to_csv", &to_csv, py::arg("dataset"));
    m.def("parse_csv", &parse_csv, py::arg("text"));
    m.def("split_manifest_json", &split_manifest_json, py::arg("split"));

    py::enum_<Activation>(m, "Activation")
        .value("TANSIG", Activation::Tansig)
        .value("LINEAR", Activation::Linear);

    py::class_<Layer>(m, "Layer")
        .def(py::init<>())
        .def_readwrite("in_size", &Layer::in)
        .def_readwrite("out_size", &Layer::out)
        .def_readwrite("weights", &Layer::weights)
        .def_readwrite("biases", &Layer::biases)
        .def_readwrite("activation", &Layer::activation);

    py::class_<Normalization>(m, "Normalization")
        .def(py::init<>())
        .def_readwrite("offset", &Normalization::offset)
        .def_readwrite("scale", &Normalization::scale);

    py::class_<Network>(m, "Network")
        .def(py::init<>())
        .def_readwrite("layers", &Network::layers)
        .def_readwrite("normalization", &Network::normalization)
        .def("input_size", &Network::input_size)
        .def("output_size", &Network::output_size);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("max_epochs", &TrainConfig::max_epochs)
        .def_readwrite("hidden_sizes", &TrainConfig::hidden_sizes)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("momentum", &TrainConfig::momentum)
        .def_readwrite("patience", &TrainConfig::patience)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("min_reference", &TrainConfig::min_reference)
        .def_readwrite("max_plant_output", &TrainConfig::max_plant_output);

    py::class_<TrainingReport>(m, "TrainingReport")
        .def_readonly("train_mse", &TrainingReport::train_mse)
        .def_readonly("val_mse", &TrainingReport::val_mse)
        .def_readonly("test_mse", &TrainingReport::test_mse)
        .def_readonly("best_epoch", &TrainingReport::best_epoch)
        .def_readonly("best_val_mse", &TrainingReport::best_val_mse)
        .def_readonly("best_network", &TrainingReport::best_network);

    m.def("tansig", &tansig, py::arg("x"));
    m.def("init_weights", &init_weights, py::arg("dims"), py::arg("seed"));
    m.def("forward",
          [](const Network& net, const std::vector<double>& input) {
              return forward(net, input);
          },
          py::arg("net"), py::arg("input"));
    m.def("mse_loss",
          [](const std::vector<double>& outputs, const std::vector<double>& targets) {
              return mse_loss(outputs, targets);
          },
          py::arg("outputs"), py::arg("targets"));
    m.def("normalize_window",
          [](const Network& net, const std::vector<double>& raw) {
              return normalize_window(net, raw);
          },
          py::arg("net"), py::arg("raw"));
    m.def("train", &train, py::arg("initial"), py::arg("dataset"), py::arg("config"));
    m.def("model_to_json", &model_to_json, py::arg("net"));
    m.def("model_from_json", &model_from_json, py::arg("json_text"));
    m.def("save_model", &save_model, py::arg("net"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    py::class_<NarxConfig>(m, "NarxConfig")
        .def(py::init<>())
        .def_readwrite("input_delays", &NarxConfig::input_delays)
        .def_readwrite("output_delays", &NarxConfig::output_delays)
        .def_readwrite("threshold", &NarxConfig::threshold);

    py::class_<CostSpec>(m, "CostSpec")
        .def(py::init<>())
        .def_readwrite("n1", &CostSpec::n1)
        .def_readwrite("n2", &CostSpec::n2)
        .def_readwrite("nu", &CostSpec::nu)
        .def_readwrite("increment_weight", &CostSpec::increment_weight)
        .def_readwrite("desired", &CostSpec::desired)
        .def_readwrite("reference", &CostSpec::reference)
        .def_readwrite("tentative", &CostSpec::tentative);

    py::class_<Verdict>(m, "Verdict")
        .def_readonly("score", &Verdict::score)
        .def_readonly("positive", &Verdict::positive)
        .def_readonly("threshold", &Verdict::threshold);

    py::class_<RocPoint>(m, "RocPoint")
        .def_readonly("threshold", &RocPoint::threshold)
        .def_readonly("tpr", &RocPoint::tpr)
        .def_readonly("fpr", &RocPoint::fpr);

    py::class_<RocSweep>(m, "RocSweep")
        .def_readonly("single_class", &RocSweep::single_class)
        .def_readonly("points", &RocSweep::points);

    m.def("build_narx_input",
          [](const std::vector<double>& readings, const NarxConfig& cfg) {
              return build_narx_input(readings, cfg);
          },
          py::arg("readings"), py::arg("cfg"));
    m.def("evaluate_cost_j", &evaluate_cost_j, py::arg("spec"));
    m.def("minimize_cost_j", &minimize_cost_j, py::arg("spec_template"),
          py::arg("candidates"), py::arg("response") = nullptr);
    m.def("classify",
          [](const Network& net, const std::vector<double>& readings,
             const NarxConfig& cfg) { return classify(net, readings, cfg); },
          py::arg("net"), py::arg("readings"), py::arg("cfg"));
    m.def("verdict_json_line", &verdict_json_line, py::arg("verdict"));
    m.def("roc_sweep",
          [](const std::vector<double>& scores, const std::vector<int>& labels,
             std::size_t n) { return roc_sweep(scores, labels, n); },
          py::arg("scores"), py::arg("labels"), py::arg("n_thresholds"));

    py::class_<ConfusionMatrix>(m, "ConfusionMatrix")
        .def(py::init<>())
        .def(py::init([](std::uint64_t tp, std::uint64_t tn, std::uint64_t fp,
                         std::uint64_t fn) {
                 return ConfusionMatrix{tp, tn, fp, fn};
             }),
             py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"))
        .def_readwrite("tp", &ConfusionMatrix::tp)
        .def_readwrite("tn", &ConfusionMatrix::tn)
        .def_readwrite("fp", &ConfusionMatrix::fp)
        .def_readwrite("fn", &ConfusionMatrix::fn)
        .def("total", &ConfusionMatrix::total);

    m.def("confusion_matrix",
          [](const std::vector<int>& predictions, const std::vector<int>& labels) {
              return confusion_matrix(predictions, labels);
          },
          py::arg("predictions"), py::arg("labels"));
    m.def("accuracy", &accuracy, py::arg("cm"));
    m.def("tpr", &tpr, py::arg("cm"));
    m.def("fpr", &fpr, py::arg("cm"));
    m.def("specificity", &specificity, py::arg("cm"));
    m.def("regression_r",
          [](const std::vector<double>& outputs, const std::vector<double>& targets) {
              return regression_r(outputs, targets);
          },
          py::arg("outputs"), py::arg("targets"));

    py::class_<SplitMetrics>(m, "SplitMetrics")
        .def_readonly("cm", &SplitMetrics::cm)
        .def_readonly("accuracy", &SplitMetrics::accuracy)
        .def_readonly("tpr", &SplitMetrics::tpr)
        .def_readonly("fpr", &SplitMetrics::fpr)
        .def_readonly("specificity", &SplitMetrics::specificity);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("training", &EvalReport::training)
        .def_readonly("testing", &EvalReport::testing)
        .def_readonly("validation", &EvalReport::validation)
        .def_readonly("overall", &EvalReport::overall)
        .def_readonly("regression_r", &EvalReport::regression_r)
        .def_readonly("mse", &EvalReport::mse)
        .def_readonly("roc", &EvalReport::roc);

    m.def("evaluate_model", &evaluate_model, py::arg("net"), py::arg("dataset"),
          py::arg("cfg"), py::arg("n_thresholds") = 101);
    m.def("eval_report_json", &eval_report_json, py::arg("report"));
    m.def("format_report_table", &format_report_table, py::arg("report"));

    py::class_<QFormat>(m, "QFormat")
        .def(py::init<>())
        .def(py::init([](unsigned total, unsigned frac) {
                 return QFormat{total, frac};
             }),
             py::arg("total_bits"), py::arg("frac_bits"))
        .def_readwrite("total_bits", &QFormat::total_bits)
        .def_readwrite("frac_bits", &QFormat::frac_bits)
        .def("q_min", &QFormat::q_min)
        .def("q_max", &QFormat::q_max);

    py::class_<QuantizedModel>(m, "QuantizedModel")
        .def_readonly("format", &QuantizedModel::format)
        .def_readonly("dims", &QuantizedModel::dims)
        .def_readonly("weights", &QuantizedModel::weights)
        .def_readonly("biases", &QuantizedModel::biases)
        .def_readonly("saturation_count", &QuantizedModel::saturation_count)
        .def_readonly("fingerprint", &QuantizedModel::fingerprint)
        .def_property_readonly("tansig_lut", [](const QuantizedModel& qm) {
            return std::vector<std::int32_t>(qm.tansig_lut.begin(),
                                             qm.tansig_lut.end());
        });

    m.def("quantize_model", &quantize_model, py::arg("net"), py::arg("format"));
    m.def("fixed_point_forward",
          [](const QuantizedModel& qm, const std::vector<double>& input) {
              return fixed_point_forward(qm, input);
          },
          py::arg("qm"), py::arg("normalized_input"));
    m.def("emit_verilog", &emit_verilog, py::arg("qm"), py::arg("module_name"));
    m.def("quantized_manifest_json", &quantized_manifest_json, py::arg("qm"));
}
