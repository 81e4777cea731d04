#include "dili/alignment.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "dili/model.hpp"

namespace dili::align {

std::string to_string(AlignmentLabel label) {
    switch (label) {
        case AlignmentLabel::ExactMatch: return "Exact Match";
        case AlignmentLabel::PartialMatch: return "Partial Match";
        case AlignmentLabel::HadesOnly: return "HADES Only";
        case AlignmentLabel::DilerOnly: return "DILER Only";
        case AlignmentLabel::Contradiction: return "Contradiction";
    }
    return "?";
}

std::optional<AlignmentLabel> parse_label(std::string_view text) {
    // Collapse to uppercase alphanumerics so "EXACT-MATCH", "exact_match" and
    // "[EXACT MATCH]" all map to the same key.
    std::string key;
    key.reserve(text.size());
    for (char c : text)
        if (std::isalnum(static_cast<unsigned char>(c)))
            key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (key == "EXACTMATCH") return AlignmentLabel::ExactMatch;
    if (key == "PARTIALMATCH") return AlignmentLabel::PartialMatch;
    if (key == "HADESONLY" || key == "ONLYINHADES") return AlignmentLabel::HadesOnly;
    if (key == "DILERONLY" || key == "ONLYINDILER") return AlignmentLabel::DilerOnly;
    if (key == "CONTRADICTION") return AlignmentLabel::Contradiction;
    return std::nullopt;
}

std::string_view metric_name(MetricId id) {
    switch (id) {
        case MetricId::Jaccard: return "jaccard";
        case MetricId::Dice: return "dice";
        case MetricId::Overlap: return "overlap";
        case MetricId::FuzzyJaccard: return "fuzzy_jaccard";
        case MetricId::Precision: return "precision";
        case MetricId::Recall: return "recall";
        case MetricId::F1: return "f1";
        case MetricId::ContradictionRate: return "contradiction_rate";
        case MetricId::HallucinationRate: return "hallucination_rate";
        case MetricId::MissRate: return "miss_rate";
    }
    return "?";
}

AlignmentTally AlignmentTally::from_counts(std::size_t exact, std::size_t partial,
                                           std::size_t model_only,
                                           std::size_t reference_only,
                                           std::size_t contradiction,
                                           double partial_weight) {
    AlignmentTally t;
    t.exact = exact;
    t.partial = partial;
    t.model_only = model_only;
    t.reference_only = reference_only;
    t.contradiction = contradiction;
    t.model_count = exact + partial + contradiction + model_only;
    t.reference_count = exact + partial + contradiction + reference_only;
    t.total_pairs = exact + partial + model_only + reference_only + contradiction;
    t.min_count = std::min(t.model_count, t.reference_count);
    t.partial_weight = partial_weight;
    return t;
}

namespace {

bool needs_model_index(AlignmentLabel label) { return label != AlignmentLabel::DilerOnly; }
bool needs_reference_index(AlignmentLabel label) { return label != AlignmentLabel::HadesOnly; }

void check_pair_shape(const PairAlignment& p) {
    const bool wants_model = needs_model_index(p.label);
    const bool wants_ref = needs_reference_index(p.label);
    if (p.model_index.has_value() != wants_model ||
        p.reference_index.has_value() != wants_ref)
        throw TallyError("pair labeled " + to_string(p.label) +
                         " has the wrong index combination");
}

}  // namespace

TallyResult tally(const std::vector<PairAlignment>& pairs, std::size_t model_count,
                  std::size_t reference_count, double partial_weight) {
    std::vector<bool> model_used(model_count, false);
    std::vector<bool> reference_used(reference_count, false);
    AlignmentTally t;
    t.partial_weight = partial_weight;

    for (const auto& p : pairs) {
        check_pair_shape(p);
        if (p.model_index) {
            if (*p.model_index >= model_count)
                throw TallyError("model index " + std::to_string(*p.model_index) +
                                 " out of range (count " + std::to_string(model_count) + ")");
            if (model_used[*p.model_index])
                throw TallyError("model index " + std::to_string(*p.model_index) +
                                 " used by more than one pair");
            model_used[*p.model_index] = true;
        }
        if (p.reference_index) {
            if (*p.reference_index >= reference_count)
                throw TallyError("reference index " + std::to_string(*p.reference_index) +
                                 " out of range (count " + std::to_string(reference_count) +
                                 ")");
            if (reference_used[*p.reference_index])
                throw TallyError("reference index " + std::to_string(*p.reference_index) +
                                 " used by more than one pair");
            reference_used[*p.reference_index] = true;
        }
        switch (p.label) {
            case AlignmentLabel::ExactMatch: ++t.exact; break;
            case AlignmentLabel::PartialMatch: ++t.partial; break;
            case AlignmentLabel::HadesOnly: ++t.model_only; break;
            case AlignmentLabel::DilerOnly: ++t.reference_only; break;
            case AlignmentLabel::Contradiction: ++t.contradiction; break;
        }
    }

    TallyResult result;
    for (std::size_t i = 0; i < model_count; ++i)
        if (!model_used[i]) {
            ++t.model_only;
            ++result.auto_added_model_only;
        }
    for (std::size_t i = 0; i < reference_count; ++i)
        if (!reference_used[i]) {
            ++t.reference_only;
            ++result.auto_added_reference_only;
        }

    t.model_count = model_count;
    t.reference_count = reference_count;
    t.total_pairs = t.exact + t.partial + t.model_only + t.reference_only + t.contradiction;
    t.min_count = std::min(model_count, reference_count);
    result.tally = t;
    return result;
}

ResolveResult resolve_one_to_one(const std::vector<PairAlignment>& pairs,
                                 std::size_t model_count, std::size_t reference_count) {
    // Strongest label first; stable within equal strength.
    auto strength = [](AlignmentLabel label) {
        switch (label) {
            case AlignmentLabel::ExactMatch: return 0;
            case AlignmentLabel::Contradiction: return 1;
            case AlignmentLabel::PartialMatch: return 2;
            default: return 3;  // Only pairs last
        }
    };
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return strength(pairs[a].label) < strength(pairs[b].label);
    });

    std::vector<bool> model_used(model_count, false);
    std::vector<bool> reference_used(reference_count, false);
    std::vector<PairAlignment> kept(pairs.size());
    std::vector<bool> have(pairs.size(), false);
    ResolveResult result;

    for (std::size_t idx : order) {
        const auto& p = pairs[idx];
        check_pair_shape(p);
        if (p.model_index && *p.model_index >= model_count)
            throw TallyError("model index " + std::to_string(*p.model_index) +
                             " out of range (count " + std::to_string(model_count) + ")");
        if (p.reference_index && *p.reference_index >= reference_count)
            throw TallyError("reference index " + std::to_string(*p.reference_index) +
                             " out of range (count " + std::to_string(reference_count) + ")");

        const bool model_free = !p.model_index || !model_used[*p.model_index];
        const bool ref_free = !p.reference_index || !reference_used[*p.reference_index];
        if (model_free && ref_free) {
            if (p.model_index) model_used[*p.model_index] = true;
            if (p.reference_index) reference_used[*p.reference_index] = true;
            kept[idx] = p;
            have[idx] = true;
            continue;
        }
        // Demote: whichever side is still free becomes an Only pair.
        if (p.model_index && model_free) {
            model_used[*p.model_index] = true;
            kept[idx] = PairAlignment{p.model_index, std::nullopt, AlignmentLabel::HadesOnly};
            have[idx] = true;
            result.warnings.push_back("pair (" + to_string(p.label) + ") demoted to " +
                                      to_string(AlignmentLabel::HadesOnly) +
                                      " for model index " + std::to_string(*p.model_index));
        } else if (p.reference_index && ref_free) {
            reference_used[*p.reference_index] = true;
            kept[idx] =
                PairAlignment{std::nullopt, p.reference_index, AlignmentLabel::DilerOnly};
            have[idx] = true;
            result.warnings.push_back("pair (" + to_string(p.label) + ") demoted to " +
                                      to_string(AlignmentLabel::DilerOnly) +
                                      " for reference index " +
                                      std::to_string(*p.reference_index));
        } else {
            result.warnings.push_back("pair (" + to_string(p.label) +
                                      ") dropped: both hypotheses already paired");
        }
    }

    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (have[i]) result.pairs.push_back(kept[i]);
    return result;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

namespace {

std::optional<double> ratio(double num, double den) {
    if (den == 0.0) return std::nullopt;
    return num / den;
}

}  // namespace

SetSimilarity set_similarity(const AlignmentTally& t) {
    SetSimilarity s;
    const double e = static_cast<double>(t.exact);
    const double hd = static_cast<double>(t.model_count + t.reference_count);
    const double soft = e + t.partial_weight * static_cast<double>(t.partial);
    s.jaccard = ratio(e, static_cast<double>(t.total_pairs));
    s.dice = ratio(2.0 * e, hd);
    s.overlap = ratio(e, static_cast<double>(t.min_count));
    s.fuzzy_jaccard = ratio(soft, hd - soft);
    return s;
}

PrecisionRecall precision_recall_f1(const AlignmentTally& t) {
    PrecisionRecall r;
    const double soft = static_cast<double>(t.exact) +
                        t.partial_weight * static_cast<double>(t.partial);
    const double prec_den =
        static_cast<double>(t.exact + t.partial + t.model_only + t.contradiction);
    const double rec_den =
        static_cast<double>(t.exact + t.partial + t.reference_only + t.contradiction);
    r.precision = ratio(soft, prec_den);
    r.recall = ratio(soft, rec_den);
    if (r.precision && r.recall) {
        const double sum = *r.precision + *r.recall;
        if (sum > 0.0) r.f1 = 2.0 * (*r.precision) * (*r.recall) / sum;
    }
    return r;
}

ErrorRates error_rates(const AlignmentTally& t) {
    ErrorRates r;
    r.contradiction_rate = ratio(static_cast<double>(t.contradiction),
                                 static_cast<double>(t.total_pairs));
    r.hallucination_rate =
        ratio(static_cast<double>(t.model_only), static_cast<double>(t.model_count));
    r.miss_rate = ratio(static_cast<double>(t.reference_only),
                        static_cast<double>(t.reference_count));
    return r;
}

AlignmentMetrics compute_metrics(const AlignmentTally& t) {
    AlignmentMetrics m;
    const auto sim = set_similarity(t);
    const auto pr = precision_recall_f1(t);
    const auto er = error_rates(t);
    m[MetricId::Jaccard] = sim.jaccard;
    m[MetricId::Dice] = sim.dice;
    m[MetricId::Overlap] = sim.overlap;
    m[MetricId::FuzzyJaccard] = sim.fuzzy_jaccard;
    m[MetricId::Precision] = pr.precision;
    m[MetricId::Recall] = pr.recall;
    m[MetricId::F1] = pr.f1;
    m[MetricId::ContradictionRate] = er.contradiction_rate;
    m[MetricId::HallucinationRate] = er.hallucination_rate;
    m[MetricId::MissRate] = er.miss_rate;
    return m;
}

AggregateMetrics aggregate(const std::vector<AlignmentMetrics>& per_compound) {
    if (per_compound.empty()) throw TallyError("aggregate over an empty compound list");
    AggregateMetrics agg;
    std::array<double, kMetricCount> sums{};
    for (const auto& m : per_compound) {
        for (std::size_t i = 0; i < kMetricCount; ++i) {
            if (m.values[i]) {
                sums[i] += *m.values[i];
                ++agg.support[i];
            }
        }
    }
    for (std::size_t i = 0; i < kMetricCount; ++i)
        if (agg.support[i] > 0)
            agg.mean.values[i] = sums[i] / static_cast<double>(agg.support[i]);
    return agg;
}

// ---------------------------------------------------------------------------
// Alignment-record file
// ---------------------------------------------------------------------------

std::vector<AlignmentRecord> parse_alignment_records_stream(std::istream& in,
                                                            const std::string& name) {
    std::vector<AlignmentRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fail = [&](const std::string& msg) -> void {
            throw ParseError(name + ":" + std::to_string(line_no) + ": " + msg);
        };
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(std::string("malformed JSON record: ") + e.what());
        }
        AlignmentRecord rec;
        if (!j.contains("inchikey") || !j["inchikey"].is_string())
            fail("missing field 'inchikey'");
        rec.inchikey = normalize_inchikey(j["inchikey"].get<std::string>());
        auto read_count = [&](const char* key) -> std::size_t {
            if (!j.contains(key) || !j[key].is_number_integer() ||
                j[key].get<long long>() < 0)
                fail(std::string("missing or invalid field '") + key + "'");
            return j[key].get<std::size_t>();
        };
        rec.model_count = read_count("model_count");
        rec.reference_count = read_count("reference_count");
        if (!j.contains("pairs") || !j["pairs"].is_array()) fail("missing field 'pairs'");
        for (const auto& pj : j["pairs"]) {
            PairAlignment p;
            if (pj.contains("model_index") && !pj["model_index"].is_null())
                p.model_index = pj["model_index"].get<std::size_t>();
            if (pj.contains("reference_index") && !pj["reference_index"].is_null())
                p.reference_index = pj["reference_index"].get<std::size_t>();
            if (!pj.contains("label") || !pj["label"].is_string())
                fail("pair missing 'label'");
            auto label = parse_label(pj["label"].get<std::string>());
            if (!label) fail("unknown alignment label '" + pj["label"].get<std::string>() + "'");
            p.label = *label;
            rec.pairs.push_back(p);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<AlignmentRecord> parse_alignment_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return parse_alignment_records_stream(in, path);
}

void write_alignment_records(std::ostream& out,
                             const std::vector<AlignmentRecord>& records) {
    for (const auto& rec : records) {
        nlohmann::ordered_json j;
        j["inchikey"] = rec.inchikey;
        j["model_count"] = rec.model_count;
        j["reference_count"] = rec.reference_count;
        auto pairs = nlohmann::ordered_json::array();
        for (const auto& p : rec.pairs) {
            nlohmann::ordered_json pj;
            if (p.model_index) pj["model_index"] = *p.model_index;
            if (p.reference_index) pj["reference_index"] = *p.reference_index;
            pj["label"] = to_string(p.label);
            pairs.push_back(std::move(pj));
        }
        j["pairs"] = std::move(pairs);
        out << j.dump() << '\n';
    }
}

}  // namespace dili::align
