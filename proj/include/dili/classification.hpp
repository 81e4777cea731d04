#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dili/model.hpp"

// Binary and ordinal classification metrics over prediction files: rank-based
// ROC-AUC, thresholded confusion counts with the derived metric panel, and the
// 5x5 severity-scale confusion matrix.

namespace dili::classify {

class MetricError : public std::runtime_error {
public:
    explicit MetricError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mann-Whitney ROC-AUC: the fraction of (positive, negative) pairs where the
/// positive outscores the negative, ties credited 0.5. Sort-based, O(n log n).
/// Throws MetricError when either class is empty (metric undefined).
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// 1 iff score >= threshold (inclusive boundary).
int binarize(double score, double threshold = 0.5);

struct BinaryConfusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }

    BinaryConfusion& operator+=(const BinaryConfusion& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }
    bool operator==(const BinaryConfusion&) const = default;
};

BinaryConfusion confusion_from_scores(std::span<const double> scores,
                                      std::span<const int> labels,
                                      double threshold = 0.5);

struct BinaryMetrics {
    std::optional<double> balanced_accuracy;
    double mcc = 0.0;               // 0 on a degenerate matrix (flagged)
    bool mcc_degenerate = false;
    std::optional<double> sensitivity;  // tp / (tp + fn)
    std::optional<double> specificity;  // tn / (tn + fp)
    std::optional<double> f1;           // positive class
};

BinaryMetrics binary_metrics(const BinaryConfusion& conf);

// ---------------------------------------------------------------------------
// 5x5 severity-scale confusion
// ---------------------------------------------------------------------------

struct ScaleConfusion {
    // Indexed [reference grade][predicted grade], grades in A..E order.
    std::array<std::array<std::size_t, 5>, 5> matrix{};

    std::size_t total() const;
    std::size_t& at(Grade reference, Grade predicted);
    std::size_t at(Grade reference, Grade predicted) const;
};

/// Joins predictions to references by normalized InChIKey. Keys without a
/// severity prediction and prediction keys absent from the reference are
/// reported, never silently dropped.
struct ScaleConfusionResult {
    ScaleConfusion confusion;
    std::vector<std::string> missing_predictions;  // reference keys not covered
    std::vector<std::string> extra_predictions;    // prediction keys not referenced
};

ScaleConfusionResult scale_confusion(
    const std::vector<PredictionRecord>& predictions,
    const std::vector<std::pair<std::string, SeverityLabel>>& references);

}  // namespace dili::classify
