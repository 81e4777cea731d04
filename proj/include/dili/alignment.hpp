#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Hypothesis-alignment metric calculus: labeled pairwise alignments between a
// model hypothesis list and a reference list are tallied into per-compound
// counts, from which set-similarity indices, mechanism-level
// precision/recall/F1 and error-mode rates are computed and macro-averaged.

namespace dili::align {

enum class AlignmentLabel {
    ExactMatch,
    PartialMatch,
    HadesOnly,      // model hypothesis with no reference counterpart
    DilerOnly,      // reference hypothesis the model failed to recover
    Contradiction,
};

std::string to_string(AlignmentLabel label);

/// Tolerant label mapper: case-insensitive, separator-insensitive, and
/// accepting the edited-output tag vocabulary (ONLY_IN_HADES / ONLY_IN_DILER).
/// Returns nullopt for unrecognized labels.
std::optional<AlignmentLabel> parse_label(std::string_view text);

struct PairAlignment {
    std::optional<std::size_t> model_index;
    std::optional<std::size_t> reference_index;
    AlignmentLabel label = AlignmentLabel::ExactMatch;

    bool operator==(const PairAlignment&) const = default;
};

class TallyError : public std::runtime_error {
public:
    explicit TallyError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Per-compound alignment counts. The identities
///     U = E + P + HO + DO + C
///     H = E + P + C + HO,  D = E + P + C + DO,  M = min(H, D)
/// hold for every tally produced by tally() or from_counts().
struct AlignmentTally {
    std::size_t exact = 0;           // E
    std::size_t partial = 0;         // P
    std::size_t model_only = 0;      // HO
    std::size_t reference_only = 0;  // DO
    std::size_t contradiction = 0;   // C
    std::size_t model_count = 0;     // H
    std::size_t reference_count = 0; // D
    std::size_t total_pairs = 0;     // U
    std::size_t min_count = 0;       // M
    double partial_weight = 0.5;     // w_P

    /// Derives H, D, U, M from the five pair counts.
    static AlignmentTally from_counts(std::size_t exact, std::size_t partial,
                                      std::size_t model_only, std::size_t reference_only,
                                      std::size_t contradiction,
                                      double partial_weight = 0.5);
};

/// Builds the tally from labeled pairs. Hypotheses on either side that appear
/// in no pair are auto-added as model-only / reference-only pairs so the count
/// identities hold; the number of auto-added pairs is reported.
/// Throws TallyError on out-of-range or duplicate indices or on pairs whose
/// index presence contradicts their label.
struct TallyResult {
    AlignmentTally tally;
    std::size_t auto_added_model_only = 0;
    std::size_t auto_added_reference_only = 0;
};

TallyResult tally(const std::vector<PairAlignment>& pairs, std::size_t model_count,
                  std::size_t reference_count, double partial_weight = 0.5);

/// Enforces the one-to-one pairing discipline on raw (possibly many-to-one)
/// judge output: strongest label wins (Exact > Contradiction > Partial), the
/// losers demote to the appropriate Only pair, each demotion logged.
struct ResolveResult {
    std::vector<PairAlignment> pairs;
    std::vector<std::string> warnings;
};

ResolveResult resolve_one_to_one(const std::vector<PairAlignment>& pairs,
                                 std::size_t model_count, std::size_t reference_count);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

enum class MetricId : std::size_t {
    Jaccard = 0,
    Dice,
    Overlap,
    FuzzyJaccard,
    Precision,
    Recall,
    F1,
    ContradictionRate,
    HallucinationRate,
    MissRate,
};

inline constexpr std::size_t kMetricCount = 10;

std::string_view metric_name(MetricId id);

/// A metric is absent (nullopt) when its denominator is zero; a well-defined
/// zero numerator over a positive denominator stays 0.
struct AlignmentMetrics {
    std::array<std::optional<double>, kMetricCount> values{};

    std::optional<double>& operator[](MetricId id) {
        return values[static_cast<std::size_t>(id)];
    }
    const std::optional<double>& operator[](MetricId id) const {
        return values[static_cast<std::size_t>(id)];
    }

    std::optional<double> jaccard() const { return (*this)[MetricId::Jaccard]; }
    std::optional<double> dice() const { return (*this)[MetricId::Dice]; }
    std::optional<double> overlap() const { return (*this)[MetricId::Overlap]; }
    std::optional<double> fuzzy_jaccard() const { return (*this)[MetricId::FuzzyJaccard]; }
    std::optional<double> precision() const { return (*this)[MetricId::Precision]; }
    std::optional<double> recall() const { return (*this)[MetricId::Recall]; }
    std::optional<double> f1() const { return (*this)[MetricId::F1]; }
    std::optional<double> contradiction_rate() const {
        return (*this)[MetricId::ContradictionRate];
    }
    std::optional<double> hallucination_rate() const {
        return (*this)[MetricId::HallucinationRate];
    }
    std::optional<double> miss_rate() const { return (*this)[MetricId::MissRate]; }
};

struct SetSimilarity {
    std::optional<double> jaccard;        // E / U
    std::optional<double> dice;           // 2E / (H + D)
    std::optional<double> overlap;        // E / M
    std::optional<double> fuzzy_jaccard;  // (E + wP*P) / ((H+D) - (E + wP*P))
};

SetSimilarity set_similarity(const AlignmentTally& t);

struct PrecisionRecall {
    std::optional<double> precision;  // (E + wP*P) / (E + P + HO + C)
    std::optional<double> recall;     // (E + wP*P) / (E + P + DO + C)
    std::optional<double> f1;         // harmonic mean; absent when P+R = 0
};

PrecisionRecall precision_recall_f1(const AlignmentTally& t);

struct ErrorRates {
    std::optional<double> contradiction_rate;  // C / U
    std::optional<double> hallucination_rate;  // HO / H
    std::optional<double> miss_rate;           // DO / D
};

ErrorRates error_rates(const AlignmentTally& t);

/// All ten metrics of one tally.
AlignmentMetrics compute_metrics(const AlignmentTally& t);

/// Benchmark-level macro average: per-field mean over compounds where the
/// field is present, with the per-field support counts. Throws TallyError on
/// an empty input list.
struct AggregateMetrics {
    AlignmentMetrics mean;
    std::array<std::size_t, kMetricCount> support{};
};

AggregateMetrics aggregate(const std::vector<AlignmentMetrics>& per_compound);

// ---------------------------------------------------------------------------
// Alignment-record file ({inchikey, model_count, reference_count, pairs})
// ---------------------------------------------------------------------------

struct AlignmentRecord {
    std::string inchikey;
    std::size_t model_count = 0;
    std::size_t reference_count = 0;
    std::vector<PairAlignment> pairs;

    bool operator==(const AlignmentRecord&) const = default;
};

std::vector<AlignmentRecord> parse_alignment_records(const std::string& path);
std::vector<AlignmentRecord> parse_alignment_records_stream(std::istream& in,
                                                            const std::string& name);
void write_alignment_records(std::ostream& out, const std::vector<AlignmentRecord>& records);

}  // namespace dili::align
