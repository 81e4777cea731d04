#include "dili/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "dili/kernels.hpp"
#include "dili/model.hpp"
#include "dili/parallel.hpp"

namespace dili::retrieval {

namespace {

void check_params(const DistanceParams& params) {
    if (!(params.p > 0.0 && params.p <= 2.0))
        throw RetrievalError("exponent p must lie in (0, 2], got " +
                             std::to_string(params.p));
}

void check_set(const AtomEmbeddingSet& s) {
    if (s.atoms == 0) throw RetrievalError("embedding set '" + s.id + "' is empty");
    if (s.data.size() != s.atoms * s.dim)
        throw RetrievalError("embedding set '" + s.id + "' has inconsistent shape");
}

void check_dims(const AtomEmbeddingSet& x, const AtomEmbeddingSet& y) {
    if (x.dim != y.dim)
        throw RetrievalError("dimension mismatch: '" + x.id + "' has d=" +
                             std::to_string(x.dim) + ", '" + y.id + "' has d=" +
                             std::to_string(y.dim));
}

double mean_within(const AtomEmbeddingSet& s, const DistanceParams& params) {
    const std::size_t m = s.atoms;
    if (!params.include_self_pairs && m < 2) return 0.0;
    // Self-pairs contribute exactly 0 to the sum, so both conventions share one
    // kernel call and differ only in the divisor.
    const double sum =
        kernels::pair_pow_sum(s.data.data(), m, s.data.data(), m, s.dim, params.p);
    const double denom = params.include_self_pairs
                             ? static_cast<double>(m) * static_cast<double>(m)
                             : static_cast<double>(m) * static_cast<double>(m - 1);
    return sum / denom;
}

double mean_cross(const AtomEmbeddingSet& x, const AtomEmbeddingSet& y,
                  const DistanceParams& params) {
    const double sum = kernels::pair_pow_sum(x.data.data(), x.atoms, y.data.data(),
                                             y.atoms, x.dim, params.p);
    return sum / (static_cast<double>(x.atoms) * static_cast<double>(y.atoms));
}

void sort_hits(std::vector<RetrievalHit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.id < b.id;
    });
}

}  // namespace

double energy_sq(const AtomEmbeddingSet& x, const AtomEmbeddingSet& y,
                 DistanceParams params) {
    check_params(params);
    check_set(x);
    check_set(y);
    check_dims(x, y);
    return 2.0 * mean_cross(x, y, params) - mean_within(x, params) -
           mean_within(y, params);
}

double distance(const AtomEmbeddingSet& x, const AtomEmbeddingSet& y,
                DistanceParams params) {
    return std::sqrt(std::max(0.0, energy_sq(x, y, params)));
}

Corpus::Corpus(std::vector<AtomEmbeddingSet> entries, DistanceParams params)
    : entries_(std::move(entries)), params_(params) {
    check_params(params_);
    within_.reserve(entries_.size());
    for (const auto& e : entries_) {
        check_set(e);
        if (dim_ == 0)
            dim_ = e.dim;
        else if (e.dim != dim_)
            throw RetrievalError("corpus entry '" + e.id + "' has d=" +
                                 std::to_string(e.dim) + ", corpus uses d=" +
                                 std::to_string(dim_));
        within_.push_back(mean_within(e, params_));
    }
}

std::vector<RetrievalHit> Corpus::top_k(const AtomEmbeddingSet& query, std::size_t k,
                                        std::size_t jobs) const {
    if (entries_.empty()) throw RetrievalError("retrieval corpus is empty");
    if (k == 0) throw RetrievalError("k must be at least 1");
    check_set(query);
    if (query.dim != dim_)
        throw RetrievalError("dimension mismatch: query '" + query.id + "' has d=" +
                             std::to_string(query.dim) + ", corpus uses d=" +
                             std::to_string(dim_));

    const double within_query = mean_within(query, params_);
    std::vector<double> dist(entries_.size());
    parallel_for(entries_.size(), jobs, [&](std::size_t i) {
        const double e2 =
            2.0 * mean_cross(query, entries_[i], params_) - within_query - within_[i];
        dist[i] = std::sqrt(std::max(0.0, e2));
    });

    std::vector<RetrievalHit> hits;
    hits.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i)
        hits.push_back({entries_[i].id, entries_[i].label, dist[i]});
    sort_hits(hits);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::vector<RetrievalHit> top_k(const AtomEmbeddingSet& query,
                                const std::vector<AtomEmbeddingSet>& corpus,
                                std::size_t k, DistanceParams params) {
    return Corpus(corpus, params).top_k(query, k);
}

std::vector<RetrievalHit> baseline_cosine(const AtomEmbeddingSet& query,
                                          const std::vector<AtomEmbeddingSet>& corpus,
                                          std::size_t k) {
    if (corpus.empty()) throw RetrievalError("retrieval corpus is empty");
    if (k == 0) throw RetrievalError("k must be at least 1");
    check_set(query);

    auto pooled = [](const AtomEmbeddingSet& s) {
        std::vector<double> mean(s.dim, 0.0);
        for (std::size_t i = 0; i < s.atoms; ++i) {
            const float* r = s.row(i);
            for (std::size_t kk = 0; kk < s.dim; ++kk) mean[kk] += r[kk];
        }
        for (auto& v : mean) v /= static_cast<double>(s.atoms);
        return mean;
    };
    auto norm = [](const std::vector<double>& v) {
        return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    };

    const auto q = pooled(query);
    const double qn = norm(q);
    if (qn == 0.0)
        throw RetrievalError("zero-norm pooled vector for '" + query.id + "'");

    std::vector<RetrievalHit> hits;
    hits.reserve(corpus.size());
    for (const auto& e : corpus) {
        check_set(e);
        check_dims(query, e);
        const auto v = pooled(e);
        const double vn = norm(v);
        if (vn == 0.0)
            throw RetrievalError("zero-norm pooled vector for '" + e.id + "'");
        const double sim =
            std::inner_product(q.begin(), q.end(), v.begin(), 0.0) / (qn * vn);
        hits.push_back({e.id, e.label, std::max(0.0, 1.0 - sim)});
    }
    sort_hits(hits);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

// ---------------------------------------------------------------------------
// Fingerprints
// ---------------------------------------------------------------------------

std::size_t Fingerprint::popcount() const {
    std::size_t n = 0;
    for (auto w : words) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

Fingerprint fingerprint_from_hex(std::string id, std::optional<int> label,
                                 std::string_view hex) {
    Fingerprint fp;
    fp.id = std::move(id);
    fp.label = label;
    fp.bits = hex.size() * 4;
    fp.words.assign((fp.bits + 63) / 64, 0);
    for (std::size_t i = 0; i < hex.size(); ++i) {
        const char c = hex[i];
        unsigned v;
        if (c >= '0' && c <= '9')
            v = static_cast<unsigned>(c - '0');
        else if (c >= 'a' && c <= 'f')
            v = static_cast<unsigned>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F')
            v = static_cast<unsigned>(c - 'A' + 10);
        else
            throw ParseError("fingerprint '" + fp.id + "': invalid hex digit '" +
                             std::string(1, c) + "'");
        for (unsigned b = 0; b < 4; ++b) {
            if (v & (8u >> b)) {
                const std::size_t bit = i * 4 + b;
                fp.words[bit / 64] |= std::uint64_t{1} << (bit % 64);
            }
        }
    }
    return fp;
}

double tanimoto_distance(const Fingerprint& a, const Fingerprint& b) {
    if (a.bits != b.bits)
        throw RetrievalError("fingerprint length mismatch: '" + a.id + "' has " +
                             std::to_string(a.bits) + " bits, '" + b.id + "' has " +
                             std::to_string(b.bits));
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < a.words.size(); ++i) {
        inter += static_cast<std::size_t>(std::popcount(a.words[i] & b.words[i]));
        uni += static_cast<std::size_t>(std::popcount(a.words[i] | b.words[i]));
    }
    if (uni == 0) return 0.0;  // empty-union convention
    return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<RetrievalHit> baseline_tanimoto(const Fingerprint& query,
                                            const std::vector<Fingerprint>& corpus,
                                            std::size_t k) {
    if (corpus.empty()) throw RetrievalError("retrieval corpus is empty");
    if (k == 0) throw RetrievalError("k must be at least 1");
    std::vector<RetrievalHit> hits;
    hits.reserve(corpus.size());
    for (const auto& e : corpus)
        hits.push_back({e.id, e.label, tanimoto_distance(query, e)});
    sort_hits(hits);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

// ---------------------------------------------------------------------------
// IO
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'A', 'E', 'M', 'B'};

void put_u16(std::ostream& out, std::uint16_t v) {
    const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    out.write(bytes, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes, 4);
}

std::uint16_t get_u16(std::istream& in, const std::string& name) {
    unsigned char bytes[2];
    if (!in.read(reinterpret_cast<char*>(bytes), 2))
        throw ParseError(name + ": truncated embedding file");
    return static_cast<std::uint16_t>(bytes[0] | (bytes[1] << 8));
}

std::uint32_t get_u32(std::istream& in, const std::string& name) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4))
        throw ParseError(name + ": truncated embedding file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    return v;
}

void check_finite(const AtomEmbeddingSet& s, const std::string& name) {
    for (float v : s.data)
        if (!std::isfinite(v))
            throw ParseError(name + ": non-finite value in embedding set '" + s.id + "'");
}

}  // namespace

void write_embeddings_binary(std::ostream& out,
                             const std::vector<AtomEmbeddingSet>& entries) {
    out.write(kMagic, 4);
    put_u32(out, kEmbeddingFormatVersion);
    const std::uint32_t d = entries.empty() ? 0 : static_cast<std::uint32_t>(entries[0].dim);
    put_u32(out, d);
    put_u32(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        if (e.dim != d)
            throw RetrievalError("embedding set '" + e.id + "' has d=" +
                                 std::to_string(e.dim) + ", file uses d=" +
                                 std::to_string(d));
        put_u16(out, static_cast<std::uint16_t>(e.id.size()));
        out.write(e.id.data(), static_cast<std::streamsize>(e.id.size()));
        const unsigned char label =
            e.label ? static_cast<unsigned char>(*e.label) : static_cast<unsigned char>(255);
        out.put(static_cast<char>(label));
        put_u32(out, static_cast<std::uint32_t>(e.atoms));
        for (float v : e.data) {
            std::uint32_t raw;
            std::memcpy(&raw, &v, 4);
            put_u32(out, raw);
        }
    }
}

void write_embeddings_binary(const std::string& path,
                             const std::vector<AtomEmbeddingSet>& entries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    write_embeddings_binary(out, entries);
}

std::vector<AtomEmbeddingSet> read_embeddings_binary(std::istream& in,
                                                     const std::string& name) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw ParseError(name + ": not an embedding file (bad magic)");
    const std::uint32_t version = get_u32(in, name);
    if (version != kEmbeddingFormatVersion)
        throw ParseError(name + ": unsupported embedding format version " +
                         std::to_string(version));
    const std::uint32_t d = get_u32(in, name);
    const std::uint32_t count = get_u32(in, name);
    std::vector<AtomEmbeddingSet> entries;
    entries.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        AtomEmbeddingSet e;
        const std::uint16_t id_len = get_u16(in, name);
        e.id.resize(id_len);
        if (!in.read(e.id.data(), id_len)) throw ParseError(name + ": truncated id");
        const int label = in.get();
        if (label == EOF) throw ParseError(name + ": truncated embedding file");
        if (label == 0 || label == 1) e.label = label;
        else if (label != 255)
            throw ParseError(name + ": invalid label byte for '" + e.id + "'");
        e.atoms = get_u32(in, name);
        if (e.atoms == 0) throw ParseError(name + ": empty embedding set '" + e.id + "'");
        e.dim = d;
        e.data.resize(e.atoms * d);
        for (auto& v : e.data) {
            const std::uint32_t raw = get_u32(in, name);
            std::memcpy(&v, &raw, 4);
        }
        check_finite(e, name);
        entries.push_back(std::move(e));
    }
    return entries;
}

void write_embeddings_text(std::ostream& out,
                           const std::vector<AtomEmbeddingSet>& entries) {
    for (const auto& e : entries) {
        nlohmann::ordered_json j;
        j["id"] = e.id;
        if (e.label)
            j["label"] = *e.label;
        else
            j["label"] = nullptr;
        auto rows = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < e.atoms; ++i) {
            auto row = nlohmann::ordered_json::array();
            for (std::size_t k = 0; k < e.dim; ++k) row.push_back(e.row(i)[k]);
            rows.push_back(std::move(row));
        }
        j["vectors"] = std::move(rows);
        out << j.dump() << '\n';
    }
}

std::vector<AtomEmbeddingSet> read_embeddings_text(std::istream& in,
                                                   const std::string& name) {
    std::vector<AtomEmbeddingSet> entries;
    std::string line;
    std::size_t line_no = 0;
    std::size_t d = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = name + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where + ": malformed JSON record: " + e.what());
        }
        AtomEmbeddingSet e;
        if (!j.contains("id") || !j["id"].is_string())
            throw ParseError(where + ": missing field 'id'");
        e.id = j["id"].get<std::string>();
        if (j.contains("label") && !j["label"].is_null()) {
            const int label = j["label"].get<int>();
            if (label != 0 && label != 1)
                throw ParseError(where + ": label must be 0 or 1");
            e.label = label;
        }
        if (!j.contains("vectors") || !j["vectors"].is_array() || j["vectors"].empty())
            throw ParseError(where + ": missing non-empty 'vectors'");
        for (const auto& row : j["vectors"]) {
            if (!row.is_array() || row.empty())
                throw ParseError(where + ": vectors must be non-empty arrays");
            if (e.dim == 0) e.dim = row.size();
            if (row.size() != e.dim)
                throw ParseError(where + ": ragged vector rows in '" + e.id + "'");
            for (const auto& v : row) {
                if (!v.is_number()) throw ParseError(where + ": vector entries must be numbers");
                e.data.push_back(v.get<float>());
            }
        }
        e.atoms = e.data.size() / e.dim;
        check_finite(e, where);
        if (d == 0) d = e.dim;
        if (e.dim != d)
            throw ParseError(where + ": entry '" + e.id + "' has d=" +
                             std::to_string(e.dim) + ", file uses d=" + std::to_string(d));
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<AtomEmbeddingSet> read_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    in.clear();
    in.seekg(0);
    if (std::memcmp(magic, kMagic, 4) == 0) return read_embeddings_binary(in, path);
    return read_embeddings_text(in, path);
}

std::vector<Fingerprint> read_fingerprints_stream(std::istream& in,
                                                  const std::string& name) {
    std::vector<Fingerprint> out;
    std::string line;
    std::size_t line_no = 0;
    std::size_t bits = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = name + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where + ": malformed JSON record: " + e.what());
        }
        if (!j.contains("id") || !j["id"].is_string())
            throw ParseError(where + ": missing field 'id'");
        std::optional<int> label;
        if (j.contains("label") && !j["label"].is_null()) label = j["label"].get<int>();
        if (!j.contains("bits") || !j["bits"].is_string())
            throw ParseError(where + ": missing field 'bits'");
        auto fp = fingerprint_from_hex(j["id"].get<std::string>(), label,
                                       j["bits"].get<std::string>());
        if (bits == 0) bits = fp.bits;
        if (fp.bits != bits)
            throw ParseError(where + ": fingerprint '" + fp.id + "' has " +
                             std::to_string(fp.bits) + " bits, file uses " +
                             std::to_string(bits));
        out.push_back(std::move(fp));
    }
    return out;
}

std::vector<Fingerprint> read_fingerprints(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return read_fingerprints_stream(in, path);
}

}  // namespace dili::retrieval
