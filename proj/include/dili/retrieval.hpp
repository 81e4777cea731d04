#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Embedding-set similarity retrieval: a molecule is a variable-length set of
// fixed-dimension per-atom vectors, and set similarity is the squared energy
// distance with a fractional exponent (default p = 0.5), clipped at zero
// before the square root. Retrieval over a labeled corpus is an exact flat
// scan. Mean-pooled cosine and Tanimoto-over-fingerprints comparators are
// provided as baselines.

namespace dili::retrieval {

class RetrievalError : public std::runtime_error {
public:
    explicit RetrievalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct AtomEmbeddingSet {
    std::string id;
    std::size_t dim = 0;      // d (uniform within a corpus)
    std::size_t atoms = 0;    // M >= 1
    std::vector<float> data;  // atoms * dim, row-major
    std::optional<int> label; // 0/1 hepatotoxicity when known

    const float* row(std::size_t i) const { return data.data() + i * dim; }
};

struct DistanceParams {
    double p = 0.5;                 // exponent in (0, 2]
    bool include_self_pairs = true; // V-statistic (self-distance exactly 0);
                                    // false selects the U-statistic variant
};

struct RetrievalHit {
    std::string id;
    std::optional<int> label;
    double distance = 0.0;
};

/// Squared energy distance
///     2 * mean ||x - y||^p  -  mean ||x - x'||^p  -  mean ||y - y'||^p
/// with means over all ordered pairs (self-pairs included under the default
/// V-statistic convention). May be slightly negative from floating point.
double energy_sq(const AtomEmbeddingSet& x, const AtomEmbeddingSet& y,
                 DistanceParams params = {});

/// sqrt(max(0, energy_sq)).
double distance(const AtomEmbeddingSet& x, const AtomEmbeddingSet& y,
                DistanceParams params = {});

/// Immutable retrieval corpus; per-entry within-set terms are precomputed at
/// construction so a query scan only pays the cross terms.
class Corpus {
public:
    explicit Corpus(std::vector<AtomEmbeddingSet> entries, DistanceParams params = {});

    const std::vector<AtomEmbeddingSet>& entries() const { return entries_; }
    const DistanceParams& params() const { return params_; }
    std::size_t dim() const { return dim_; }

    /// The k smallest distances (all entries when k exceeds the corpus size),
    /// ascending, ties broken by id. Queries are read-only and may run
    /// concurrently; jobs > 1 parallelizes the scan over corpus entries.
    std::vector<RetrievalHit> top_k(const AtomEmbeddingSet& query, std::size_t k,
                                    std::size_t jobs = 1) const;

private:
    std::vector<AtomEmbeddingSet> entries_;
    std::vector<double> within_;  // mean within-set pow term per entry
    DistanceParams params_;
    std::size_t dim_ = 0;
};

/// One-shot convenience over a plain entry list.
std::vector<RetrievalHit> top_k(const AtomEmbeddingSet& query,
                                const std::vector<AtomEmbeddingSet>& corpus,
                                std::size_t k, DistanceParams params = {});

/// Baseline: rank by cosine distance between mean-pooled set vectors.
std::vector<RetrievalHit> baseline_cosine(const AtomEmbeddingSet& query,
                                          const std::vector<AtomEmbeddingSet>& corpus,
                                          std::size_t k);

// ---------------------------------------------------------------------------
// Fingerprint baseline
// ---------------------------------------------------------------------------

struct Fingerprint {
    std::string id;
    std::optional<int> label;
    std::size_t bits = 0;
    std::vector<std::uint64_t> words;

    std::size_t popcount() const;
};

/// Hex string -> fingerprint (4 bits per hex digit, most significant first).
Fingerprint fingerprint_from_hex(std::string id, std::optional<int> label,
                                 std::string_view hex);

/// 1 - |A n B| / |A u B|; pairs with an empty union score distance 0.
double tanimoto_distance(const Fingerprint& a, const Fingerprint& b);

std::vector<RetrievalHit> baseline_tanimoto(const Fingerprint& query,
                                            const std::vector<Fingerprint>& corpus,
                                            std::size_t k);

// ---------------------------------------------------------------------------
// Embedding file IO
// ---------------------------------------------------------------------------
// Binary layout (little-endian): magic "AEMB", u32 version, u32 d,
// u32 entry_count, then per entry u16 id_len + id bytes, u8 label
// (0 / 1 / 255 = absent), u32 M, M*d float32.
// The text twin is JSON Lines: {"id", "label" (0/1/null), "vectors": [[...]]}.

inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

std::vector<AtomEmbeddingSet> read_embeddings(const std::string& path);

std::vector<AtomEmbeddingSet> read_embeddings_binary(std::istream& in,
                                                     const std::string& name);
void write_embeddings_binary(std::ostream& out,
                             const std::vector<AtomEmbeddingSet>& entries);
void write_embeddings_binary(const std::string& path,
                             const std::vector<AtomEmbeddingSet>& entries);

std::vector<AtomEmbeddingSet> read_embeddings_text(std::istream& in,
                                                   const std::string& name);
void write_embeddings_text(std::ostream& out,
                           const std::vector<AtomEmbeddingSet>& entries);

/// Fingerprint file: JSON Lines {"id", "label", "bits": "<hex>"}.
std::vector<Fingerprint> read_fingerprints(const std::string& path);
std::vector<Fingerprint> read_fingerprints_stream(std::istream& in,
                                                  const std::string& name);

}  // namespace dili::retrieval
