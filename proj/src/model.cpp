#include "dili/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace dili {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Severity
// ---------------------------------------------------------------------------

double severity_score(SeverityLabel s) {
    switch (s.grade) {
        case Grade::A: return 1.0;
        case Grade::B: return 0.75;
        case Grade::C: return 0.5;
        case Grade::D: return 0.25;
        case Grade::E: return 0.0;
    }
    return 0.0;
}

std::string to_string(Grade g) {
    switch (g) {
        case Grade::A: return "A";
        case Grade::B: return "B";
        case Grade::C: return "C";
        case Grade::D: return "D";
        case Grade::E: return "E";
    }
    return "?";
}

std::optional<Grade> parse_grade(std::string_view text) {
    if (text.size() != 1) return std::nullopt;
    switch (text[0]) {
        case 'A': return Grade::A;
        case 'B': return Grade::B;
        case 'C': return Grade::C;
        case 'D': return Grade::D;
        case 'E': return Grade::E;
        default: return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// Categories
// ---------------------------------------------------------------------------

const std::array<std::string_view, 12>& positive_category_names() {
    static const std::array<std::string_view, 12> names = {
        "Reactive Bioactivation",
        "Liver Cell Death",
        "Altered Proliferation or Regeneration",
        "Transport Function Disruption",
        "Oxidative Stress",
        "Immune-Mediated Liver Response",
        "Mitochondrial Dysfunction",
        "Stress Signaling Pathway Activation",
        "Cholestasis",
        "Cellular Cytoskeleton Disruption",
        "Fibrosis",
        "Liver Metabolism Disruption",
    };
    return names;
}

const std::array<std::string_view, 12>& negative_category_names() {
    static const std::array<std::string_view, 12> names = {
        "Metabolic Stability",
        "No Reactive Bioactivation",
        "Efficient Detoxification",
        "Rapid Clearance",
        "Efficient Hepatobiliary Efflux",
        "Low Intracellular Accumulation",
        "Preserved Redox Homeostasis",
        "Mitochondrial Sparing",
        "No Hapten Formation",
        "Preserved Bile Acid Homeostasis",
        "Adaptive Stress Tolerance",
        "Effective Repair",
    };
    return names;
}

std::optional<Category> find_category(std::string_view name) {
    for (auto n : positive_category_names())
        if (n == name) return Category{std::string(name), Polarity::Positive};
    for (auto n : negative_category_names())
        if (n == name) return Category{std::string(name), Polarity::Negative};
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Enum <-> text
// ---------------------------------------------------------------------------

std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::Post2021: return "post2021";
    }
    return "?";
}

std::string to_string(Direction d) {
    return d == Direction::Hepatotoxic ? "Hepatotoxic" : "Safe";
}

std::string to_string(Confidence c) {
    switch (c) {
        case Confidence::High: return "High";
        case Confidence::Medium: return "Medium";
        case Confidence::Low: return "Low";
    }
    return "?";
}

std::optional<Split> parse_split(std::string_view text) {
    if (text == "train") return Split::Train;
    if (text == "test") return Split::Test;
    if (text == "post2021") return Split::Post2021;
    return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view text) {
    if (text == "Hepatotoxic") return Direction::Hepatotoxic;
    if (text == "Safe") return Direction::Safe;
    return std::nullopt;
}

std::optional<Confidence> parse_confidence(std::string_view text) {
    if (text == "High") return Confidence::High;
    if (text == "Medium") return Confidence::Medium;
    if (text == "Low") return Confidence::Low;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool is_valid_inchikey(std::string_view key) {
    if (key.size() != 27 || key[14] != '-' || key[25] != '-') return false;
    auto upper = [](char c) { return c >= 'A' && c <= 'Z'; };
    for (std::size_t i = 0; i < 14; ++i)
        if (!upper(key[i])) return false;
    for (std::size_t i = 15; i < 25; ++i)
        if (!upper(key[i])) return false;
    return upper(key[26]);
}

std::string normalize_inchikey(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    if (!is_valid_inchikey(out))
        throw ParseError("invalid InChIKey '" + out +
                         "': expected 14 letters '-' 10 letters '-' 1 letter");
    return out;
}

std::vector<Violation> validate_hypothesis(const Hypothesis& h, bool strict) {
    std::vector<Violation> out;
    const std::size_t n = h.steps.size();
    if (n < 5 || n > 7) {
        out.push_back({ViolationKind::StepCount, strict,
                       "hypothesis '" + h.title + "': " + std::to_string(n) +
                           " steps, expected 5-7"});
    }
    if (h.categories.empty()) {
        out.push_back({ViolationKind::EmptyCategories, strict,
                       "hypothesis '" + h.title + "': categories must be non-empty"});
    }
    const Polarity expected =
        h.direction == Direction::Hepatotoxic ? Polarity::Positive : Polarity::Negative;
    for (const auto& c : h.categories) {
        if (c.name == kUncategorized) continue;  // reserved tag carries no polarity
        if (c.polarity != expected) {
            out.push_back({ViolationKind::PolarityMismatch, strict,
                           "hypothesis '" + h.title + "': category '" + c.name +
                               "' has the wrong polarity for direction " +
                               to_string(h.direction)});
        }
    }
    return out;
}

std::vector<Violation> validate_set(const HypothesisSet& s, bool strict) {
    std::vector<Violation> out;
    const std::size_t n = s.hypotheses.size();
    if (s.source == Source::Model) {
        // Model sets outside 1-4 still evaluate in lax mode; an empty model
        // set is legal input for the metrics (everything becomes a miss).
        if (n > 4 || n < 1)
            out.push_back({ViolationKind::SetSize, strict,
                           "model set for " + s.inchikey + " has " + std::to_string(n) +
                               " hypotheses, expected 1-4"});
    } else if (n < 1) {
        out.push_back({ViolationKind::SetSize, strict,
                       "reference set for " + s.inchikey + " is empty"});
    }
    for (const auto& h : s.hypotheses) {
        auto v = validate_hypothesis(h, strict);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON conversion
// ---------------------------------------------------------------------------

namespace {

struct RecordContext {
    const std::string& name;   // file name for messages
    std::size_t line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(name + ":" + std::to_string(line) + ": " + msg);
    }
};

const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                    const RecordContext& ctx) {
    auto it = j.find(key);
    if (it == j.end()) ctx.fail(std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const nlohmann::json& j, const char* key,
                           const RecordContext& ctx) {
    const auto& v = require_field(j, key, ctx);
    if (!v.is_string()) ctx.fail(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

Category parse_category_name(const std::string& name, const ParseOptions& opts,
                             const RecordContext& ctx, const std::string& title,
                             std::vector<std::string>& warnings) {
    if (auto c = find_category(name)) return *c;
    if (opts.strict)
        ctx.fail("hypothesis '" + title + "': unknown category '" + name + "'");
    warnings.push_back(ctx.name + ":" + std::to_string(ctx.line) + ": hypothesis '" +
                       title + "': unknown category '" + name +
                       "' mapped to Uncategorized");
    return Category{std::string(kUncategorized), Polarity::Positive};
}

Hypothesis hypothesis_from_json(const nlohmann::json& j, const ParseOptions& opts,
                                const RecordContext& ctx,
                                std::vector<std::string>& warnings) {
    Hypothesis h;
    h.title = require_string(j, "title", ctx);
    const auto& steps = require_field(j, "steps", ctx);
    if (!steps.is_array()) ctx.fail("field 'steps' must be an array");
    for (const auto& s : steps) {
        if (!s.is_string()) ctx.fail("hypothesis '" + h.title + "': steps must be strings");
        h.steps.push_back(s.get<std::string>());
    }
    auto dir = parse_direction(require_string(j, "direction", ctx));
    if (!dir) ctx.fail("hypothesis '" + h.title + "': invalid direction");
    h.direction = *dir;
    auto conf = parse_confidence(require_string(j, "confidence", ctx));
    if (!conf) ctx.fail("hypothesis '" + h.title + "': invalid confidence");
    h.confidence = *conf;
    const auto& cats = require_field(j, "categories", ctx);
    if (!cats.is_array()) ctx.fail("field 'categories' must be an array");
    for (const auto& c : cats) {
        if (!c.is_string()) ctx.fail("hypothesis '" + h.title + "': categories must be strings");
        h.categories.push_back(
            parse_category_name(c.get<std::string>(), opts, ctx, h.title, warnings));
    }
    if (auto it = j.find("suggested_assay"); it != j.end() && !it->is_null())
        h.suggested_assay = it->get<std::string>();
    return h;
}

ordered_json hypothesis_to_json(const Hypothesis& h) {
    ordered_json j;
    j["title"] = h.title;
    j["steps"] = h.steps;
    j["direction"] = to_string(h.direction);
    j["confidence"] = to_string(h.confidence);
    auto cats = ordered_json::array();
    for (const auto& c : h.categories) cats.push_back(c.name);
    j["categories"] = std::move(cats);
    if (h.suggested_assay) j["suggested_assay"] = *h.suggested_assay;
    return j;
}

void enforce_violations(const std::vector<Violation>& violations, const RecordContext& ctx,
                        std::vector<std::string>& warnings) {
    for (const auto& v : violations) {
        if (v.is_error) ctx.fail(v.message);
        warnings.push_back(ctx.name + ":" + std::to_string(ctx.line) + ": " + v.message);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Benchmark parsing
// ---------------------------------------------------------------------------

BenchmarkParseResult parse_benchmark_stream(std::istream& in, const std::string& name,
                                            ParseOptions opts) {
    BenchmarkParseResult result;
    std::unordered_set<std::string> seen;
    std::string line;
    RecordContext ctx{name, 0};
    while (std::getline(in, line)) {
        ++ctx.line;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            ctx.fail(std::string("malformed JSON record: ") + e.what());
        }
        if (!j.is_object()) ctx.fail("record must be a JSON object");

        const auto& ver = require_field(j, "schema_version", ctx);
        if (!ver.is_number_integer() || ver.get<int>() != kSchemaVersion)
            ctx.fail("unsupported schema_version (expected " +
                     std::to_string(kSchemaVersion) + ")");

        BenchmarkRecord rec;
        try {
            rec.compound.inchikey = normalize_inchikey(require_string(j, "inchikey", ctx));
        } catch (const ParseError& e) {
            ctx.fail(std::string("field 'inchikey': ") + e.what());
        }
        rec.compound.smiles = require_string(j, "smiles", ctx);
        const auto& label = require_field(j, "binary_label", ctx);
        if (!label.is_number_integer() ||
            (label.get<int>() != 0 && label.get<int>() != 1))
            ctx.fail("field 'binary_label' must be 0 or 1");
        rec.compound.binary_label = label.get<int>();
        if (auto it = j.find("severity"); it != j.end() && !it->is_null()) {
            if (!it->is_string()) ctx.fail("field 'severity' must be a string A-E");
            auto g = parse_grade(it->get<std::string>());
            if (!g) ctx.fail("field 'severity': invalid grade '" +
                             it->get<std::string>() + "'");
            rec.compound.severity = SeverityLabel{*g};
        }
        auto split = parse_split(require_string(j, "split", ctx));
        if (!split) ctx.fail("field 'split' must be train|test|post2021");
        rec.compound.split = *split;

        rec.hypotheses.inchikey = rec.compound.inchikey;
        rec.hypotheses.source = opts.source;
        const auto& hyps = require_field(j, "hypotheses", ctx);
        if (!hyps.is_array()) ctx.fail("field 'hypotheses' must be an array");
        for (const auto& hj : hyps)
            rec.hypotheses.hypotheses.push_back(
                hypothesis_from_json(hj, opts, ctx, result.warnings));

        enforce_violations(validate_set(rec.hypotheses, opts.strict), ctx, result.warnings);

        if (!seen.insert(rec.compound.inchikey).second)
            ctx.fail("duplicate compound " + rec.compound.inchikey);
        result.records.push_back(std::move(rec));
    }
    return result;
}

BenchmarkParseResult parse_benchmark(const std::string& path, ParseOptions opts) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return parse_benchmark_stream(in, path, opts);
}

void write_benchmark(std::ostream& out, const std::vector<BenchmarkRecord>& records) {
    for (const auto& rec : records) {
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["inchikey"] = rec.compound.inchikey;
        j["smiles"] = rec.compound.smiles;
        j["binary_label"] = rec.compound.binary_label;
        if (rec.compound.severity)
            j["severity"] = to_string(rec.compound.severity->grade);
        j["split"] = to_string(rec.compound.split);
        auto hyps = ordered_json::array();
        for (const auto& h : rec.hypotheses.hypotheses) hyps.push_back(hypothesis_to_json(h));
        j["hypotheses"] = std::move(hyps);
        out << j.dump() << '\n';
    }
}

void write_benchmark(const std::string& path, const std::vector<BenchmarkRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    write_benchmark(out, records);
}

// ---------------------------------------------------------------------------
// Prediction files
// ---------------------------------------------------------------------------

PredictionParseResult parse_predictions_stream(std::istream& in, const std::string& name) {
    PredictionParseResult result;
    std::string line;
    RecordContext ctx{name, 0};
    while (std::getline(in, line)) {
        ++ctx.line;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            ctx.fail(std::string("malformed JSON record: ") + e.what());
        }
        PredictionRecord rec;
        try {
            rec.inchikey = normalize_inchikey(require_string(j, "inchikey", ctx));
        } catch (const ParseError& e) {
            ctx.fail(std::string("field 'inchikey': ") + e.what());
        }
        if (auto it = j.find("score"); it != j.end() && !it->is_null()) {
            if (!it->is_number()) ctx.fail("field 'score' must be a number");
            double s = it->get<double>();
            if (s < 0.0 || s > 1.0) ctx.fail("field 'score' must lie in [0,1]");
            rec.score = s;
        }
        if (auto it = j.find("severity"); it != j.end() && !it->is_null()) {
            if (!it->is_string()) ctx.fail("field 'severity' must be a string A-E");
            auto g = parse_grade(it->get<std::string>());
            if (!g) ctx.fail("field 'severity': invalid grade");
            rec.severity = SeverityLabel{*g};
        }
        if (!rec.score && !rec.severity)
            ctx.fail("prediction must carry a score or a severity");
        if (rec.score && rec.severity &&
            std::abs(*rec.score - severity_score(*rec.severity)) > 1e-9) {
            result.warnings.push_back(
                name + ":" + std::to_string(ctx.line) + ": score/severity mismatch for " +
                rec.inchikey);
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

PredictionParseResult parse_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return parse_predictions_stream(in, path);
}

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records) {
    for (const auto& rec : records) {
        ordered_json j;
        j["inchikey"] = rec.inchikey;
        if (rec.score) j["score"] = *rec.score;
        if (rec.severity) j["severity"] = to_string(rec.severity->grade);
        out << j.dump() << '\n';
    }
}

}  // namespace dili
