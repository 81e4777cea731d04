#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dili/classification.hpp"

// Recognition-leakage audit: claimed molecule names extracted from model
// reasoning are verified against per-compound synonym tables, compounds are
// assigned to NotRecognized / RecognizedCorrectly / RecognizedIncorrectly
// buckets, and classification metrics are broken down per bucket.

namespace dili::audit {

class AuditError : public std::runtime_error {
public:
    explicit AuditError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RecognitionClaim {
    std::string inchikey;
    std::optional<std::string> claimed_name;  // absent: no name asserted
};

enum class RecognitionBucket { NotRecognized, RecognizedCorrectly, RecognizedIncorrectly };

inline constexpr std::size_t kBucketCount = 3;

std::string_view to_string(RecognitionBucket b);

/// ASCII case-fold, whitespace collapsed to single spaces, surrounding
/// punctuation stripped. Idempotent.
std::string normalize_name(std::string_view raw);

class SynonymTable {
public:
    /// JSON Lines cache: {"inchikey", "synonyms": [...], "fetched_at"?}.
    /// Synonyms are normalized at load; empty synonym sets are rejected.
    static SynonymTable load(const std::string& path);

    void add(const std::string& inchikey, const std::vector<std::string>& synonyms);
    const std::set<std::string>* find(const std::string& inchikey) const;
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, std::set<std::string>> entries_;
};

struct AuditOptions {
    /// Suffixes stripped from claimed names before matching (e.g. a salt
    /// qualifier like "hydrochloride"). Empty by default: matching is literal
    /// after normalization.
    std::vector<std::string> strip_suffixes;
};

/// NotRecognized without a claim; RecognizedCorrectly when the normalized
/// claim is in the synonym set; RecognizedIncorrectly otherwise. Throws
/// AuditError when a claim exists but the compound is missing from the table.
RecognitionBucket bucket(const RecognitionClaim& claim, const SynonymTable& table,
                         const AuditOptions& opts = {});

struct BucketDistribution {
    std::array<std::size_t, kBucketCount> counts{};
    std::array<double, kBucketCount> percentages{};  // rounded to one decimal
    std::size_t total = 0;
    std::vector<std::string> missing_synonyms;  // claimed compounds absent from table
};

BucketDistribution bucket_distribution(const std::vector<RecognitionClaim>& claims,
                                       const SynonymTable& table,
                                       const AuditOptions& opts = {});

// ---------------------------------------------------------------------------
// Per-bucket classification metrics
// ---------------------------------------------------------------------------

struct LabeledScore {
    std::string inchikey;
    double score = 0.0;
    int label = 0;
};

struct BucketMetricsRow {
    RecognitionBucket bucket;
    std::size_t n = 0;
    std::optional<double> roc_auc;  // absent on single-class buckets
    classify::BinaryConfusion confusion;
    classify::BinaryMetrics metrics;
};

struct PerBucketResult {
    std::vector<BucketMetricsRow> rows;        // non-empty buckets, enum order
    BucketMetricsRow aggregate;                // over the union of bucketed compounds
    std::vector<std::string> skipped;          // unjoinable or missing-synonym keys
};

PerBucketResult per_bucket_metrics(const std::vector<RecognitionClaim>& claims,
                                   const SynonymTable& table,
                                   const std::vector<LabeledScore>& scored,
                                   double threshold = 0.5,
                                   const AuditOptions& opts = {});

// ---------------------------------------------------------------------------
// Claims IO and synonym acquisition
// ---------------------------------------------------------------------------

/// JSON Lines: {"inchikey", "claimed_name"?}.
std::vector<RecognitionClaim> parse_claims(const std::string& path);

class SynonymFetcher {
public:
    virtual ~SynonymFetcher() = default;
    virtual std::vector<std::string> fetch(const std::string& inchikey) = 0;
};

/// GET {base_url}/{inchikey} expecting {"synonyms": [...]}. Audits never
/// depend on it directly: results land in the local cache file first.
class HttpSynonymFetcher : public SynonymFetcher {
public:
    explicit HttpSynonymFetcher(std::string base_url);
    std::vector<std::string> fetch(const std::string& inchikey) override;

private:
    std::string base_url_;
};

/// Fetches synonyms for every key and writes the cache file (sorted by key;
/// `fetched_at` recorded verbatim).
void refresh_synonym_cache(const std::string& path, const std::vector<std::string>& keys,
                           SynonymFetcher& fetcher, const std::string& fetched_at);

}  // namespace dili::audit
