#include "dili/classification.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace dili::classify {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw MetricError("scores and labels differ in length");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int label : labels) n_pos += static_cast<std::size_t>(label != 0);
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw MetricError("ROC-AUC undefined on a single-class input");

    // Average ranks over tied scores; the rank-sum of the positive class gives
    // the Mann-Whitney statistic with ties credited 0.5.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] != 0) pos_rank_sum += mean_rank;
        i = j;
    }
    const double n_pos_d = static_cast<double>(n_pos);
    const double n_neg_d = static_cast<double>(n_neg);
    return (pos_rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0) / (n_pos_d * n_neg_d);
}

int binarize(double score, double threshold) { return score >= threshold ? 1 : 0; }

BinaryConfusion confusion_from_scores(std::span<const double> scores,
                                      std::span<const int> labels, double threshold) {
    if (scores.size() != labels.size())
        throw MetricError("scores and labels differ in length");
    BinaryConfusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const int pred = binarize(scores[i], threshold);
        if (labels[i] != 0)
            pred ? ++c.tp : ++c.fn;
        else
            pred ? ++c.fp : ++c.tn;
    }
    return c;
}

BinaryMetrics binary_metrics(const BinaryConfusion& c) {
    BinaryMetrics m;
    const double tp = static_cast<double>(c.tp);
    const double fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn);
    const double fn = static_cast<double>(c.fn);

    if (c.tp + c.fn > 0) m.sensitivity = tp / (tp + fn);
    if (c.tn + c.fp > 0) m.specificity = tn / (tn + fp);
    if (m.sensitivity && m.specificity)
        m.balanced_accuracy = 0.5 * (*m.sensitivity + *m.specificity);

    const double denom_sq = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom_sq > 0.0) {
        m.mcc = (tp * tn - fp * fn) / std::sqrt(denom_sq);
    } else {
        m.mcc = 0.0;
        m.mcc_degenerate = true;
    }

    if (2 * c.tp + c.fp + c.fn > 0) m.f1 = 2.0 * tp / (2.0 * tp + fp + fn);
    return m;
}

std::size_t ScaleConfusion::total() const {
    std::size_t n = 0;
    for (const auto& row : matrix)
        for (std::size_t v : row) n += v;
    return n;
}

std::size_t& ScaleConfusion::at(Grade reference, Grade predicted) {
    return matrix[static_cast<std::size_t>(reference)][static_cast<std::size_t>(predicted)];
}

std::size_t ScaleConfusion::at(Grade reference, Grade predicted) const {
    return matrix[static_cast<std::size_t>(reference)][static_cast<std::size_t>(predicted)];
}

ScaleConfusionResult scale_confusion(
    const std::vector<PredictionRecord>& predictions,
    const std::vector<std::pair<std::string, SeverityLabel>>& references) {
    ScaleConfusionResult result;
    std::map<std::string, SeverityLabel> predicted;
    std::set<std::string> matched;
    for (const auto& p : predictions) {
        if (!p.severity) continue;
        predicted.emplace(p.inchikey, *p.severity);
    }
    for (const auto& [key, ref_label] : references) {
        auto it = predicted.find(key);
        if (it == predicted.end()) {
            result.missing_predictions.push_back(key);
            continue;
        }
        matched.insert(key);
        ++result.confusion.at(ref_label.grade, it->second.grade);
    }
    for (const auto& [key, unused] : predicted) {
        (void)unused;
        if (!matched.count(key)) result.extra_predictions.push_back(key);
    }
    return result;
}

}  // namespace dili::classify
