#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dili/classification.hpp"

using namespace dili;
using namespace dili::classify;

namespace {

// O(n^2) pair-count oracle for the Mann-Whitney statistic.
double roc_auc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] == 0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("roc_auc basics") {
    CHECK(roc_auc(std::vector<double>{1.0, 0.0}, std::vector<int>{1, 0}) == 1.0);
    CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.4, 0.3}, std::vector<int>{1, 0, 1, 0}) ==
          doctest::Approx(0.75).epsilon(1e-12));
    CHECK(roc_auc(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}) == 0.5);
    CHECK_THROWS_AS(roc_auc(std::vector<double>{0.5, 0.6}, std::vector<int>{1, 1}),
                    MetricError);
}

TEST_CASE("roc_auc equals the pair-count oracle on random inputs") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + rng() % 2000;
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            // coarse grid forces plenty of ties
            scores[i] = std::floor(uniform(rng) * 8.0) / 8.0;
            labels[i] = static_cast<int>(rng() % 2);
            (labels[i] ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) {
            labels[0] = 1;
            labels[1 % n] = 0;
        }
        CHECK(std::abs(roc_auc(scores, labels) - roc_auc_pairs(scores, labels)) <= 1e-12);
    }
}

TEST_CASE("roc_auc invariances") {
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> uniform(0.01, 0.99);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 10 + rng() % 200;
        std::vector<double> scores(n), cubed(n);
        std::vector<int> labels(n), flipped(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = uniform(rng);
            cubed[i] = scores[i] * scores[i] * scores[i];
            labels[i] = static_cast<int>(rng() % 2);
        }
        labels[0] = 1;
        labels[1] = 0;
        for (std::size_t i = 0; i < n; ++i) flipped[i] = 1 - labels[i];

        // invariance under a strictly increasing transform
        CHECK(std::abs(roc_auc(scores, labels) - roc_auc(cubed, labels)) <= 1e-12);
        // complement identity on (almost surely) tie-free continuous scores
        CHECK(std::abs(roc_auc(scores, labels) + roc_auc(scores, flipped) - 1.0) <= 1e-12);
    }
}

TEST_CASE("binarize boundary is inclusive") {
    CHECK(binarize(0.75, 0.5) == 1);
    CHECK(binarize(0.5, 0.5) == 1);
    CHECK(binarize(0.25, 0.5) == 0);
}

TEST_CASE("binary metrics") {
    SUBCASE("perfect classifier") {
        auto m = binary_metrics({10, 0, 10, 0});
        CHECK(*m.balanced_accuracy == 1.0);
        CHECK(m.mcc == 1.0);
        CHECK(*m.sensitivity == 1.0);
        CHECK(*m.specificity == 1.0);
        CHECK(*m.f1 == 1.0);
    }
    SUBCASE("worked example tp=8 fn=2 tn=3 fp=7") {
        auto m = binary_metrics({8, 7, 3, 2});
        CHECK(*m.sensitivity == doctest::Approx(0.8));
        CHECK(*m.specificity == doctest::Approx(0.3));
        CHECK(*m.balanced_accuracy == doctest::Approx(0.55));
        // direct-substitution oracle for MCC and F1
        const double mcc = (8.0 * 3 - 7.0 * 2) / std::sqrt(15.0 * 10.0 * 10.0 * 5.0);
        CHECK(m.mcc == doctest::Approx(mcc).epsilon(1e-12));
        CHECK(*m.f1 == doctest::Approx(16.0 / 25.0));
    }
    SUBCASE("all predicted positive -> specificity 0, MCC 0 by convention") {
        auto m = binary_metrics({5, 5, 0, 0});
        CHECK(*m.specificity == 0.0);
        CHECK(m.mcc == 0.0);
        CHECK(m.mcc_degenerate);
    }
    SUBCASE("no positives at all -> sensitivity and F1 absent") {
        auto m = binary_metrics({0, 0, 5, 0});
        CHECK_FALSE(m.sensitivity.has_value());
        CHECK_FALSE(m.balanced_accuracy.has_value());
        CHECK_FALSE(m.f1.has_value());
    }
}

TEST_CASE("scale confusion") {
    auto key = [](int i) {
        std::string body = "AAAAAAAAAAAAA";
        body += static_cast<char>('A' + i);
        return body + "-AAAAAAAAAA-N";
    };
    SUBCASE("identical labels give a diagonal matrix") {
        std::vector<PredictionRecord> preds;
        std::vector<std::pair<std::string, SeverityLabel>> refs;
        for (int i = 0; i < 5; ++i) {
            preds.push_back({key(i), std::nullopt, SeverityLabel{static_cast<Grade>(i)}});
            refs.emplace_back(key(i), SeverityLabel{static_cast<Grade>(i)});
        }
        auto result = scale_confusion(preds, refs);
        CHECK(result.confusion.total() == 5);
        for (int i = 0; i < 5; ++i)
            CHECK(result.confusion.matrix[std::size_t(i)][std::size_t(i)] == 1);
        CHECK(result.missing_predictions.empty());
        CHECK(result.extra_predictions.empty());
    }
    SUBCASE("constant mapping lands in one off-diagonal cell") {
        std::vector<PredictionRecord> preds;
        std::vector<std::pair<std::string, SeverityLabel>> refs;
        for (int i = 0; i < 4; ++i) {
            preds.push_back({key(i), std::nullopt, SeverityLabel{Grade::E}});
            refs.emplace_back(key(i), SeverityLabel{Grade::A});
        }
        auto result = scale_confusion(preds, refs);
        CHECK(result.confusion.at(Grade::A, Grade::E) == 4);
        CHECK(result.confusion.total() == 4);
    }
    SUBCASE("mixed 3-compound fixture matches the hand count") {
        std::vector<PredictionRecord> preds = {
            {key(0), std::nullopt, SeverityLabel{Grade::B}},
            {key(1), std::nullopt, SeverityLabel{Grade::C}},
            {key(2), std::nullopt, SeverityLabel{Grade::C}},
            {key(9), std::nullopt, SeverityLabel{Grade::A}},  // extra
        };
        std::vector<std::pair<std::string, SeverityLabel>> refs = {
            {key(0), SeverityLabel{Grade::A}},
            {key(1), SeverityLabel{Grade::C}},
            {key(2), SeverityLabel{Grade::E}},
            {key(3), SeverityLabel{Grade::D}},  // no prediction
        };
        auto result = scale_confusion(preds, refs);
        CHECK(result.confusion.at(Grade::A, Grade::B) == 1);
        CHECK(result.confusion.at(Grade::C, Grade::C) == 1);
        CHECK(result.confusion.at(Grade::E, Grade::C) == 1);
        CHECK(result.confusion.total() == 3);
        REQUIRE(result.missing_predictions.size() == 1);
        CHECK(result.missing_predictions[0] == key(3));
        REQUIRE(result.extra_predictions.size() == 1);
        CHECK(result.extra_predictions[0] == key(9));
    }
}

TEST_CASE("collapsing the severity scale at the threshold matches the binary confusion") {
    // References constructed so the binary label equals the thresholded
    // severity score; collapsing the 5x5 rows/columns at C (score 0.5) must
    // reproduce the 2x2 counts.
    std::mt19937 rng(2026);
    auto key = [](int i) {
        std::string body;
        for (int k = 0; k < 14; ++k) {
            body += static_cast<char>('A' + i % 26);
            i /= 26;
        }
        return body + "-AAAAAAAAAA-N";
    };
    std::vector<PredictionRecord> preds;
    std::vector<std::pair<std::string, SeverityLabel>> refs;
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) {
        const auto ref_grade = static_cast<Grade>(rng() % 5);
        const auto pred_grade = static_cast<Grade>(rng() % 5);
        refs.emplace_back(key(i), SeverityLabel{ref_grade});
        preds.push_back({key(i), std::nullopt, SeverityLabel{pred_grade}});
        scores.push_back(severity_score(SeverityLabel{pred_grade}));
        labels.push_back(binarize(severity_score(SeverityLabel{ref_grade}), 0.5));
    }
    const auto scale = scale_confusion(preds, refs).confusion;
    const auto binary = confusion_from_scores(scores, labels, 0.5);

    BinaryConfusion collapsed;
    for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t c = 0; c < 5; ++c) {
            const bool ref_pos = severity_score({static_cast<Grade>(r)}) >= 0.5;
            const bool pred_pos = severity_score({static_cast<Grade>(c)}) >= 0.5;
            const auto n = scale.matrix[r][c];
            if (ref_pos && pred_pos) collapsed.tp += n;
            if (ref_pos && !pred_pos) collapsed.fn += n;
            if (!ref_pos && pred_pos) collapsed.fp += n;
            if (!ref_pos && !pred_pos) collapsed.tn += n;
        }
    }
    CHECK(collapsed == binary);
    CHECK(scale.total() == 200);
}
