#include "feverscreen/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "feverscreen/error.hpp"
#include "feverscreen/svg.hpp"

namespace feverscreen {

ConfusionMatrix confusion_matrix(std::span<const int> predictions,
                                 std::span<const int> labels) {
    if (predictions.empty() || predictions.size() != labels.size()) {
        throw Error("confusion_matrix: predictions and labels must be non-empty "
                    "and equal length");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        int p = predictions[i];
        int l = labels[i];
        if ((p != 0 && p != 1) || (l != 0 && l != 1)) {
            throw Error("confusion_matrix: entries must be 0 or 1");
        }
        if (p == 1 && l == 1) ++cm.tp;
        else if (p == 0 && l == 0) ++cm.tn;
        else if (p == 1 && l == 0) ++cm.fp;
        else ++cm.fn;
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw Error("accuracy: empty confusion matrix");
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double tpr(const ConfusionMatrix& cm) {
    if (cm.tp + cm.fn == 0) throw Error("tpr: no positive labels");
    return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
}

double fpr(const ConfusionMatrix& cm) {
    if (cm.fp + cm.tn == 0) throw Error("fpr: no negative labels");
    return static_cast<double>(cm.fp) / static_cast<double>(cm.fp + cm.tn);
}

double specificity(const ConfusionMatrix& cm) {
    if (cm.tn + cm.fp == 0) throw Error("specificity: no negative labels");
    return static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
}

double regression_r(std::span<const double> outputs,
                    std::span<const double> targets) {
    if (outputs.size() < 2 || outputs.size() != targets.size()) {
        throw Error("regression_r: need two equal-length sequences of length >= 2");
    }
    double mean_o = 0.0;
    double mean_t = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        mean_o += outputs[i];
        mean_t += targets[i];
    }
    mean_o /= static_cast<double>(outputs.size());
    mean_t /= static_cast<double>(outputs.size());
    double cov = 0.0;
    double var_o = 0.0;
    double var_t = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        double doi = outputs[i] - mean_o;
        double dti = targets[i] - mean_t;
        cov += doi * dti;
        var_o += doi * doi;
        var_t += dti * dti;
    }
    if (var_o == 0.0 || var_t == 0.0) {
        throw Error("regression_r: zero variance");
    }
    return cov / std::sqrt(var_o * var_t);
}

namespace {

SplitMetrics split_metrics(const ConfusionMatrix& cm) {
    SplitMetrics m;
    m.cm = cm;
    m.accuracy = accuracy(cm);
    m.tpr = tpr(cm);
    m.fpr = fpr(cm);
    m.specificity = specificity(cm);
    return m;
}

nlohmann::ordered_json split_json(const SplitMetrics& m) {
    nlohmann::ordered_json j;
    j["tp"] = m.cm.tp;
    j["tn"] = m.cm.tn;
    j["fp"] = m.cm.fp;
    j["fn"] = m.cm.fn;
    j["accuracy"] = m.accuracy;
    j["tpr"] = m.tpr;
    j["fpr"] = m.fpr;
    j["specificity"] = m.specificity;
    return j;
}

std::string fmt(double v, const char* spec = "%.9g") {
    char buf[40];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace

EvalReport evaluate_model(const Network& net, const Dataset& dataset,
                          const NarxConfig& cfg, std::size_t n_thresholds) {
    if (dataset.split.empty()) {
        throw Error("evaluate_model: dataset has no split indices");
    }
    std::vector<double> scores(dataset.samples.size());
    std::vector<int> labels(dataset.samples.size());
    std::vector<int> predictions(dataset.samples.size());
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        Verdict v = classify(net, dataset.samples[i].features, cfg);
        scores[i] = v.score;
        labels[i] = dataset.samples[i].label;
        predictions[i] = v.positive ? 1 : 0;
    }

    auto cm_for = [&](const std::vector<std::size_t>& indices) {
        std::vector<int> p;
        std::vector<int> l;
        p.reserve(indices.size());
        l.reserve(indices.size());
        for (std::size_t idx : indices) {
            p.push_back(predictions[idx]);
            l.push_back(labels[idx]);
        }
        return confusion_matrix(p, l);
    };

    EvalReport report;
    ConfusionMatrix train_cm = cm_for(dataset.split.train);
    ConfusionMatrix test_cm = cm_for(dataset.split.test);
    ConfusionMatrix val_cm = cm_for(dataset.split.val);
    ConfusionMatrix overall = train_cm;
    overall += test_cm;
    overall += val_cm;
    report.training = split_metrics(train_cm);
    report.testing = split_metrics(test_cm);
    report.validation = split_metrics(val_cm);
    report.overall = split_metrics(overall);

    std::vector<double> label_values(labels.begin(), labels.end());
    report.regression_r = regression_r(scores, label_values);
    report.mse = mse_loss(scores, label_values);

    RocSweep sweep = roc_sweep(scores, labels, n_thresholds);
    if (!sweep.single_class) report.roc = std::move(sweep.points);
    return report;
}

std::string eval_report_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["splits"]["training"] = split_json(report.training);
    j["splits"]["testing"] = split_json(report.testing);
    j["splits"]["validation"] = split_json(report.validation);
    j["splits"]["overall"] = split_json(report.overall);
    j["regression_r"] = report.regression_r;
    j["mse"] = report.mse;
    auto roc = nlohmann::ordered_json::array();
    for (const RocPoint& p : report.roc) {
        roc.push_back({{"threshold", p.threshold}, {"tpr", p.tpr}, {"fpr", p.fpr}});
    }
    j["roc"] = std::move(roc);
    j["notes"] = "fpr = FP/(FP+TN); specificity = TN/(TN+FP) = 1 - fpr. Both "
                 "are reported because naming conventions for the two differ "
                 "across sources.";
    return j.dump(2) + "\n";
}

std::string format_report_table(const EvalReport& report) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s %6s %6s %6s %6s %10s %8s %8s %13s\n",
                  "split", "tp", "tn", "fp", "fn", "accuracy", "tpr", "fpr",
                  "specificity");
    out << line;
    auto row = [&](const char* name, const SplitMetrics& m) {
        std::snprintf(line, sizeof(line),
                      "%-12s %6llu %6llu %6llu %6llu %10.4f %8.4f %8.4f %13.4f\n",
                      name, static_cast<unsigned long long>(m.cm.tp),
                      static_cast<unsigned long long>(m.cm.tn),
                      static_cast<unsigned long long>(m.cm.fp),
                      static_cast<unsigned long long>(m.cm.fn), m.accuracy, m.tpr,
                      m.fpr, m.specificity);
        out << line;
    };
    row("training", report.training);
    row("testing", report.testing);
    row("validation", report.validation);
    row("overall", report.overall);
    out << "regression R = " << fmt(report.regression_r, "%.4f")
        << "   mse = " << fmt(report.mse, "%.6f") << "\n";
    out << "note: fpr = FP/(FP+TN), specificity = TN/(TN+FP) = 1 - fpr; both "
           "columns are printed because the two names are often conflated.\n";
    return out.str();
}

std::string roc_csv(const std::vector<RocPoint>& points) {
    std::ostringstream out;
    out << "threshold,tpr,fpr\n";
    for (const RocPoint& p : points) {
        out << fmt(p.threshold) << ',' << fmt(p.tpr) << ',' << fmt(p.fpr) << '\n';
    }
    return out.str();
}

std::string curves_csv(const TrainingReport& report) {
    std::ostringstream out;
    out << "epoch,train_mse,val_mse,test_mse\n";
    for (std::size_t e = 0; e < report.val_mse.size(); ++e) {
        out << (e + 1) << ',' << fmt(report.train_mse[e]) << ','
            << fmt(report.val_mse[e]) << ',' << fmt(report.test_mse[e]) << '\n';
    }
    return out.str();
}

std::string roc_svg(const std::vector<RocPoint>& points) {
    SvgSeries curve;
    curve.label = "ROC";
    for (const RocPoint& p : points) curve.points.emplace_back(p.fpr, p.tpr);
    SvgSeries diagonal;
    diagonal.label = "chance";
    diagonal.points = {{0.0, 0.0}, {1.0, 1.0}};
    return svg_line_chart({curve, diagonal}, "Receiver operating characteristic",
                          "false positive rate", "true positive rate");
}

std::string curves_svg(const TrainingReport& report) {
    SvgSeries train_s{"train", {}};
    SvgSeries val_s{"validation", {}};
    SvgSeries test_s{"test", {}};
    for (std::size_t e = 0; e < report.val_mse.size(); ++e) {
        double epoch = static_cast<double>(e + 1);
        if (std::isfinite(report.train_mse[e]))
            train_s.points.emplace_back(epoch, report.train_mse[e]);
        if (std::isfinite(report.val_mse[e]))
            val_s.points.emplace_back(epoch, report.val_mse[e]);
        if (std::isfinite(report.test_mse[e]))
            test_s.points.emplace_back(epoch, report.test_mse[e]);
    }
    return svg_line_chart({train_s, val_s, test_s}, "Training performance",
                          "epoch", "mean squared error");
}

}  // namespace feverscreen
