#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "feverscreen/detector.hpp"
#include "feverscreen/network.hpp"

namespace feverscreen {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }

    ConfusionMatrix& operator+=(const ConfusionMatrix& other) {
        tp += other.tp;
        tn += other.tn;
        fp += other.fp;
        fn += other.fn;
        return *this;
    }
};

ConfusionMatrix confusion_matrix(std::span<const int> predictions,
                                 std::span<const int> labels);

double accuracy(const ConfusionMatrix& cm);     // (TP+TN)/total
double tpr(const ConfusionMatrix& cm);          // TP/(TP+FN)
double fpr(const ConfusionMatrix& cm);          // FP/(FP+TN)
double specificity(const ConfusionMatrix& cm);  // TN/(TN+FP)

// Pearson correlation coefficient; requires non-zero variance on both sides.
double regression_r(std::span<const double> outputs,
                    std::span<const double> targets);

struct SplitMetrics {
    ConfusionMatrix cm;
    double accuracy = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
    double specificity = 0.0;
};

struct EvalReport {
    SplitMetrics training;
    SplitMetrics testing;
    SplitMetrics validation;
    SplitMetrics overall;  // pooled counts over the three splits
    double regression_r = 0.0;  // scores vs labels, all samples
    double mse = 0.0;           // scores vs labels, all samples
    std::vector<RocPoint> roc;  // swept over all samples
};

// Runs the detector over every sample of a split dataset.
EvalReport evaluate_model(const Network& net, const Dataset& dataset,
                          const NarxConfig& cfg, std::size_t n_thresholds = 101);

std::string eval_report_json(const EvalReport& report);

// Four-row table (training / testing / validation / overall) with both FPR
// and specificity columns. The footnote states the conventions since
// published reports disagree on which quantity the name "FPR" denotes.
std::string format_report_table(const EvalReport& report);

// threshold,tpr,fpr rows.
std::string roc_csv(const std::vector<RocPoint>& points);

// epoch,train_mse,val_mse,test_mse rows.
std::string curves_csv(const TrainingReport& report);

std::string roc_svg(const std::vector<RocPoint>& points);
std::string curves_svg(const TrainingReport& report);

}  // namespace feverscreen
