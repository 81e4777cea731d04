#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Core data model for the DILI hypothesis benchmark: compounds, A-E severity
// grades, mechanistic hypotheses with their closed category inventory, and the
// line-delimited benchmark / prediction file formats.

namespace dili {

/// Raised for malformed input data; messages carry "<path>:<line>" context
/// where available.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Severity
// ---------------------------------------------------------------------------

/// LiverTox-style likelihood grade, A (well-known cause) .. E (unlikely).
enum class Grade { A, B, C, D, E };

struct SeverityLabel {
    Grade grade = Grade::E;

    bool operator==(const SeverityLabel&) const = default;
};

/// Ordinal continuous score: A->1.0, B->0.75, C->0.5, D->0.25, E->0.0.
double severity_score(SeverityLabel s);

std::string to_string(Grade g);
std::optional<Grade> parse_grade(std::string_view text);

inline constexpr std::array<Grade, 5> kAllGrades = {Grade::A, Grade::B, Grade::C,
                                                    Grade::D, Grade::E};

// ---------------------------------------------------------------------------
// Mechanism categories (closed inventory: 12 positive + 12 negative tags)
// ---------------------------------------------------------------------------

enum class Polarity { Positive, Negative };

struct Category {
    std::string name;
    Polarity polarity = Polarity::Positive;

    bool operator==(const Category&) const = default;
};

/// Reserved tag for category names outside the inventory (lax parsing keeps
/// the record alive under this tag instead of rejecting it).
inline constexpr std::string_view kUncategorized = "Uncategorized";

const std::array<std::string_view, 12>& positive_category_names();
const std::array<std::string_view, 12>& negative_category_names();

/// Inventory lookup by exact name; nullopt for unknown names (including the
/// reserved Uncategorized tag, which has no fixed polarity).
std::optional<Category> find_category(std::string_view name);

// ---------------------------------------------------------------------------
// Compounds and hypotheses
// ---------------------------------------------------------------------------

enum class Split { Train, Test, Post2021 };
enum class Direction { Hepatotoxic, Safe };
enum class Confidence { High, Medium, Low };
enum class Source { Reference, Model };

std::string to_string(Split s);
std::string to_string(Direction d);
std::string to_string(Confidence c);
std::optional<Split> parse_split(std::string_view text);
std::optional<Direction> parse_direction(std::string_view text);
std::optional<Confidence> parse_confidence(std::string_view text);

struct Compound {
    std::string inchikey;   // normalized 27-char key
    std::string smiles;
    int binary_label = 0;   // 0 = no-DILI, 1 = DILI
    std::optional<SeverityLabel> severity;
    Split split = Split::Test;

    bool operator==(const Compound&) const = default;
};

struct Hypothesis {
    std::string title;
    std::vector<std::string> steps;      // 5-7 for benchmark-conformant entries
    Direction direction = Direction::Hepatotoxic;
    Confidence confidence = Confidence::Medium;
    std::vector<Category> categories;    // non-empty, polarity matches direction
    std::optional<std::string> suggested_assay;

    bool operator==(const Hypothesis&) const = default;
};

struct HypothesisSet {
    std::string inchikey;   // owning compound key
    Source source = Source::Reference;
    std::vector<Hypothesis> hypotheses;  // ordered most-supported first

    bool operator==(const HypothesisSet&) const = default;
};

struct BenchmarkRecord {
    Compound compound;
    HypothesisSet hypotheses;

    bool operator==(const BenchmarkRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class ViolationKind {
    StepCount,          // outside 5-7 (error in strict mode, warning in lax)
    EmptyCategories,
    PolarityMismatch,   // category polarity disagrees with direction
    UnknownCategory,    // name outside the inventory (error strict, mapped lax)
    SetSize,            // model sets 1-4, reference sets >= 1
};

struct Violation {
    ViolationKind kind;
    bool is_error = true;   // false: downgraded to a warning
    std::string message;
};

/// Checks a single hypothesis against its invariants. Violations are data:
/// an empty vector means all invariants hold. In lax mode every violation is
/// downgraded to a warning so external model outputs still evaluate.
std::vector<Violation> validate_hypothesis(const Hypothesis& h, bool strict);

/// Set-level check (model sets carry 1-4 hypotheses, reference sets >= 1).
std::vector<Violation> validate_set(const HypothesisSet& s, bool strict);

/// Uppercases, strips surrounding whitespace and enforces the
/// 14-letters '-' 10-letters '-' 1-letter pattern. Throws ParseError on
/// pattern mismatch.
std::string normalize_inchikey(std::string_view raw);

/// Pattern check only (no exception).
bool is_valid_inchikey(std::string_view key);

// ---------------------------------------------------------------------------
// Benchmark file IO (JSON Lines, one compound record per line)
// ---------------------------------------------------------------------------

inline constexpr int kSchemaVersion = 1;

struct ParseOptions {
    Source source = Source::Reference;
    bool strict = true;   // lax: step-count warns, unknown categories map to Uncategorized
};

struct BenchmarkParseResult {
    std::vector<BenchmarkRecord> records;   // input order preserved
    std::vector<std::string> warnings;
};

BenchmarkParseResult parse_benchmark(const std::string& path, ParseOptions opts = {});
BenchmarkParseResult parse_benchmark_stream(std::istream& in, const std::string& name,
                                            ParseOptions opts = {});

void write_benchmark(std::ostream& out, const std::vector<BenchmarkRecord>& records);
void write_benchmark(const std::string& path, const std::vector<BenchmarkRecord>& records);

// ---------------------------------------------------------------------------
// Prediction file IO ({inchikey, score?, severity?} records)
// ---------------------------------------------------------------------------

struct PredictionRecord {
    std::string inchikey;
    std::optional<double> score;            // in [0,1]
    std::optional<SeverityLabel> severity;
};

struct PredictionParseResult {
    std::vector<PredictionRecord> records;
    std::vector<std::string> warnings;      // e.g. score/severity mismatch
};

PredictionParseResult parse_predictions(const std::string& path);
PredictionParseResult parse_predictions_stream(std::istream& in, const std::string& name);

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records);

}  // namespace dili
