#include "dili/judge.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "dili/prompt_templates.hpp"

namespace dili::judge {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(JudgeErrorCode code) {
    switch (code) {
        case JudgeErrorCode::Transport: return "transport";
        case JudgeErrorCode::Timeout: return "timeout";
        case JudgeErrorCode::HttpStatus: return "http-status";
        case JudgeErrorCode::RetriesExhausted: return "retries-exhausted";
        case JudgeErrorCode::MalformedResponse: return "malformed-response";
        case JudgeErrorCode::MissingField: return "missing-field";
        case JudgeErrorCode::UnknownLabel: return "unknown-label";
        case JudgeErrorCode::IndexOutOfRange: return "index-out-of-range";
        case JudgeErrorCode::OutOfRangeScore: return "out-of-range-score";
        case JudgeErrorCode::BadRequest: return "bad-request";
    }
    return "?";
}

JudgeConfig JudgeConfig::from_env() {
    JudgeConfig cfg;
    if (const char* e = std::getenv("DILI_JUDGE_ENDPOINT")) cfg.endpoint = e;
    if (const char* e = std::getenv("DILI_JUDGE_TOKEN")) cfg.auth_token = e;
    if (const char* e = std::getenv("DILI_JUDGE_AUTH_HEADER")) cfg.auth_header = e;
    return cfg;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        const char c = tmpl[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        const std::size_t close = tmpl.find('}', i + 1);
        if (close == std::string_view::npos)
            throw JudgeError(JudgeErrorCode::BadRequest,
                             "template has an unterminated placeholder");
        const std::string name(tmpl.substr(i + 1, close - i - 1));
        auto it = values.find(name);
        if (it == values.end())
            throw JudgeError(JudgeErrorCode::BadRequest,
                             "template placeholder '" + name + "' left unsubstituted");
        out.append(it->second);  // emitted verbatim, never rescanned
        i = close + 1;
    }
    return out;
}

std::string serialize_hypotheses(const HypothesisSet& set) {
    auto arr = ordered_json::array();
    for (const auto& h : set.hypotheses) {
        ordered_json j;
        j["title"] = h.title;
        j["steps"] = h.steps;
        j["direction"] = to_string(h.direction);
        j["confidence"] = to_string(h.confidence);
        auto cats = ordered_json::array();
        for (const auto& c : h.categories) cats.push_back(c.name);
        j["categories"] = std::move(cats);
        if (h.suggested_assay) j["suggested_assay"] = *h.suggested_assay;
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

namespace {

void check_ownership(const Compound& c, const HypothesisSet& model,
                     const HypothesisSet& reference) {
    if (model.inchikey != c.inchikey || reference.inchikey != c.inchikey)
        throw JudgeError(JudgeErrorCode::BadRequest,
                         "hypothesis sets do not reference compound " + c.inchikey);
}

}  // namespace

GEvalCase render_geval_case(const Compound& c, const HypothesisSet& model,
                            const HypothesisSet& reference) {
    check_ownership(c, model, reference);
    GEvalCase out;
    ordered_json input;
    input["inchikey"] = c.inchikey;
    input["smiles"] = c.smiles;
    input["binary_label"] = c.binary_label;
    out.input = input.dump();
    out.actual_output = serialize_hypotheses(model);
    out.expected_output = serialize_hypotheses(reference);
    return out;
}

std::string render_pairwise_prompt(const Compound& c, const HypothesisSet& model,
                                   const HypothesisSet& reference) {
    check_ownership(c, model, reference);
    return render_template(kPairwiseTemplate,
                           {{"inchikey", c.inchikey},
                            {"smiles", c.smiles},
                            {"label", std::to_string(c.binary_label)},
                            {"HADES_hypotheses", serialize_hypotheses(model)},
                            {"DILER_hypotheses", serialize_hypotheses(reference)}});
}

std::string render_baseline_user_prompt(const std::string& smiles) {
    return render_template(kBaselineUserTemplate, {{"smiles", smiles}});
}

std::string render_txgemma_prompt(const std::string& smiles) {
    return render_template(kTxGemmaTemplate, {{"smiles", smiles}});
}

// ---------------------------------------------------------------------------
// Pairwise response parsing
// ---------------------------------------------------------------------------

PairwiseParseResult parse_pairwise_response(const nlohmann::json& raw,
                                            std::size_t model_count,
                                            std::size_t reference_count) {
    if (!raw.is_object())
        throw JudgeError(JudgeErrorCode::MalformedResponse,
                         "pairwise response is not a JSON object");
    for (const char* field : {"pairwise_alignments", "summary", "edited_model_output",
                              "edited_reference_output"}) {
        if (!raw.contains(field) || raw[field].is_null())
            throw JudgeError(JudgeErrorCode::MissingField,
                             std::string("pairwise response missing required field '") +
                                 field + "'");
    }
    if (!raw["pairwise_alignments"].is_array())
        throw JudgeError(JudgeErrorCode::MalformedResponse,
                         "'pairwise_alignments' must be an array");
    for (const char* field : {"summary", "edited_model_output", "edited_reference_output"})
        if (!raw[field].is_string())
            throw JudgeError(JudgeErrorCode::MalformedResponse,
                             std::string("'") + field + "' must be a string");

    PairwiseParseResult result;
    result.response.summary = raw["summary"].get<std::string>();
    result.response.edited_model_output = raw["edited_model_output"].get<std::string>();
    result.response.edited_reference_output =
        raw["edited_reference_output"].get<std::string>();

    for (const auto& pj : raw["pairwise_alignments"]) {
        if (!pj.is_object() || !pj.contains("label") || !pj["label"].is_string())
            throw JudgeError(JudgeErrorCode::MalformedResponse,
                             "alignment pair missing a string 'label'");
        const auto raw_label = pj["label"].get<std::string>();
        const auto label = align::parse_label(raw_label);
        if (!label)
            throw JudgeError(JudgeErrorCode::UnknownLabel,
                             "unknown alignment label '" + raw_label + "'");
        if (raw_label != align::to_string(*label))
            result.warnings.push_back("label '" + raw_label + "' normalized to '" +
                                      align::to_string(*label) + "'");
        align::PairAlignment p;
        p.label = *label;
        auto read_index = [&](const char* key) -> std::optional<std::size_t> {
            auto it = pj.find(key);
            if (it == pj.end() || it->is_null()) return std::nullopt;
            if (!it->is_number_integer() || it->get<long long>() < 0)
                throw JudgeError(JudgeErrorCode::MalformedResponse,
                                 std::string("pair field '") + key +
                                     "' must be a non-negative integer");
            return it->get<std::size_t>();
        };
        p.model_index = read_index("model_index");
        p.reference_index = read_index("reference_index");
        if (p.model_index && *p.model_index >= model_count)
            throw JudgeError(JudgeErrorCode::IndexOutOfRange,
                             "model index " + std::to_string(*p.model_index) +
                                 " out of range (count " + std::to_string(model_count) +
                                 ")");
        if (p.reference_index && *p.reference_index >= reference_count)
            throw JudgeError(JudgeErrorCode::IndexOutOfRange,
                             "reference index " + std::to_string(*p.reference_index) +
                                 " out of range (count " +
                                 std::to_string(reference_count) + ")");
        const bool wants_model = p.label != align::AlignmentLabel::DilerOnly;
        const bool wants_ref = p.label != align::AlignmentLabel::HadesOnly;
        if (p.model_index.has_value() != wants_model ||
            p.reference_index.has_value() != wants_ref)
            throw JudgeError(JudgeErrorCode::MalformedResponse,
                             "pair labeled " + align::to_string(p.label) +
                                 " has the wrong index combination");
        result.response.pairwise_alignments.push_back(p);
    }

    auto resolved = align::resolve_one_to_one(result.response.pairwise_alignments,
                                              model_count, reference_count);
    result.resolved_pairs = std::move(resolved.pairs);
    result.warnings.insert(result.warnings.end(), resolved.warnings.begin(),
                           resolved.warnings.end());
    return result;
}

std::vector<align::AlignmentLabel> extract_tags(std::string_view edited_text) {
    std::vector<align::AlignmentLabel> tags;
    std::size_t i = 0;
    while ((i = edited_text.find('[', i)) != std::string_view::npos) {
        const std::size_t close = edited_text.find(']', i + 1);
        if (close == std::string_view::npos) break;
        if (close - i <= 32) {
            if (auto label = align::parse_label(edited_text.substr(i + 1, close - i - 1)))
                tags.push_back(*label);
        }
        i = close + 1;
    }
    return tags;
}

// ---------------------------------------------------------------------------
// Mock judge
// ---------------------------------------------------------------------------

namespace {

struct HypothesisView {
    std::string folded_title;
    Direction direction = Direction::Hepatotoxic;
    std::set<std::string> categories;
};

std::string fold_case(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text)
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

std::vector<HypothesisView> views_from_set(const HypothesisSet& set) {
    std::vector<HypothesisView> views;
    views.reserve(set.hypotheses.size());
    for (const auto& h : set.hypotheses) {
        HypothesisView v;
        v.folded_title = fold_case(h.title);
        v.direction = h.direction;
        for (const auto& c : h.categories) v.categories.insert(c.name);
        views.push_back(std::move(v));
    }
    return views;
}

std::vector<HypothesisView> views_from_serialized(const std::string& serialized) {
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(serialized);
    } catch (const nlohmann::json::exception& e) {
        throw JudgeError(JudgeErrorCode::BadRequest,
                         std::string("case payload is not canonical JSON: ") + e.what());
    }
    if (!arr.is_array())
        throw JudgeError(JudgeErrorCode::BadRequest,
                         "case payload must be a JSON array of hypotheses");
    std::vector<HypothesisView> views;
    for (const auto& j : arr) {
        HypothesisView v;
        v.folded_title = fold_case(j.value("title", ""));
        auto dir = parse_direction(j.value("direction", "Hepatotoxic"));
        v.direction = dir.value_or(Direction::Hepatotoxic);
        if (j.contains("categories"))
            for (const auto& c : j["categories"]) v.categories.insert(c.get<std::string>());
        views.push_back(std::move(v));
    }
    return views;
}

bool categories_intersect(const HypothesisView& a, const HypothesisView& b) {
    for (const auto& c : a.categories)
        if (b.categories.count(c)) return true;
    return false;
}

std::vector<align::PairAlignment> mock_align(const std::vector<HypothesisView>& model,
                                             const std::vector<HypothesisView>& reference) {
    std::vector<align::PairAlignment> pairs;
    std::vector<bool> model_used(model.size(), false);
    std::vector<bool> ref_used(reference.size(), false);

    for (std::size_t i = 0; i < model.size(); ++i) {
        for (std::size_t j = 0; j < reference.size(); ++j) {
            if (ref_used[j] || model[i].folded_title != reference[j].folded_title) continue;
            pairs.push_back({i, j, align::AlignmentLabel::ExactMatch});
            model_used[i] = true;
            ref_used[j] = true;
            break;
        }
    }
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (model_used[i]) continue;
        for (std::size_t j = 0; j < reference.size(); ++j) {
            if (ref_used[j] || !categories_intersect(model[i], reference[j])) continue;
            const auto label = model[i].direction != reference[j].direction
                                   ? align::AlignmentLabel::Contradiction
                                   : align::AlignmentLabel::PartialMatch;
            pairs.push_back({i, j, label});
            model_used[i] = true;
            ref_used[j] = true;
            break;
        }
    }
    for (std::size_t i = 0; i < model.size(); ++i)
        if (!model_used[i])
            pairs.push_back({i, std::nullopt, align::AlignmentLabel::HadesOnly});
    for (std::size_t j = 0; j < reference.size(); ++j)
        if (!ref_used[j])
            pairs.push_back({std::nullopt, j, align::AlignmentLabel::DilerOnly});
    return pairs;
}

double fuzzy_score(const std::vector<align::PairAlignment>& pairs, std::size_t model_count,
                   std::size_t reference_count) {
    if (model_count == 0 && reference_count == 0) return 1.0;
    const auto tally = align::tally(pairs, model_count, reference_count).tally;
    return align::set_similarity(tally).fuzzy_jaccard.value_or(0.0);
}

std::string_view tag_text(align::AlignmentLabel label, bool model_side) {
    switch (label) {
        case align::AlignmentLabel::ExactMatch: return "[EXACT MATCH]";
        case align::AlignmentLabel::PartialMatch: return "[PARTIAL MATCH]";
        case align::AlignmentLabel::Contradiction: return "[CONTRADICTION]";
        default: return model_side ? "[ONLY_IN_HADES]" : "[ONLY_IN_DILER]";
    }
}

}  // namespace

double MockJudge::geval(const GEvalCase& c) {
    const auto model = views_from_serialized(c.actual_output);
    const auto reference = views_from_serialized(c.expected_output);
    const auto pairs = mock_align(model, reference);
    return fuzzy_score(pairs, model.size(), reference.size());
}

nlohmann::json MockJudge::pairwise_wire(const HypothesisSet& model,
                                        const HypothesisSet& reference) const {
    const auto model_views = views_from_set(model);
    const auto ref_views = views_from_set(reference);
    const auto pairs = mock_align(model_views, ref_views);

    std::vector<align::AlignmentLabel> model_tags(model_views.size(),
                                                  align::AlignmentLabel::HadesOnly);
    std::vector<align::AlignmentLabel> ref_tags(ref_views.size(),
                                                align::AlignmentLabel::DilerOnly);
    std::size_t counts[5] = {0, 0, 0, 0, 0};
    auto wire_pairs = ordered_json::array();
    for (const auto& p : pairs) {
        ordered_json pj;
        if (p.model_index) {
            pj["model_index"] = *p.model_index;
            model_tags[*p.model_index] = p.label;
        }
        if (p.reference_index) {
            pj["reference_index"] = *p.reference_index;
            ref_tags[*p.reference_index] = p.label;
        }
        pj["label"] = align::to_string(p.label);
        wire_pairs.push_back(std::move(pj));
        ++counts[static_cast<std::size_t>(p.label)];
    }

    auto edited = [&](const HypothesisSet& set,
                      const std::vector<align::AlignmentLabel>& tags, bool model_side) {
        std::string text;
        for (std::size_t i = 0; i < set.hypotheses.size(); ++i) {
            text.append(tag_text(tags[i], model_side));
            text.push_back(' ');
            text.append(set.hypotheses[i].title);
            if (i + 1 < set.hypotheses.size()) text.push_back('\n');
        }
        return text;
    };

    std::ostringstream summary;
    summary << "Exact=" << counts[0] << ", Partial=" << counts[1]
            << ", HADES-only=" << counts[2] << ", DILER-only=" << counts[3]
            << ", Contradiction=" << counts[4] << ".";

    ordered_json wire;
    wire["pairwise_alignments"] = std::move(wire_pairs);
    wire["summary"] = summary.str();
    wire["edited_model_output"] = edited(model, model_tags, true);
    wire["edited_reference_output"] = edited(reference, ref_tags, false);
    return wire;
}

PairwiseParseResult MockJudge::pairwise(const Compound& c, const HypothesisSet& model,
                                        const HypothesisSet& reference) {
    check_ownership(c, model, reference);
    // Round-trips through the production parse path so end-to-end runs with
    // the mock exercise the same validation as a live endpoint.
    return parse_pairwise_response(pairwise_wire(model, reference),
                                   model.hypotheses.size(),
                                   reference.hypotheses.size());
}

// ---------------------------------------------------------------------------
// HTTP judge
// ---------------------------------------------------------------------------

namespace {

struct ParsedUrl {
    std::string host;
    int port = 80;
    std::string path = "/";
};

ParsedUrl parse_http_url(const std::string& url) {
    const std::string prefix = "http://";
    if (url.rfind(prefix, 0) != 0)
        throw JudgeError(JudgeErrorCode::BadRequest,
                         "judge endpoint must be an http:// URL, got '" + url + "'");
    ParsedUrl out;
    std::string rest = url.substr(prefix.size());
    const auto slash = rest.find('/');
    std::string hostport = rest.substr(0, slash);
    if (slash != std::string::npos) out.path = rest.substr(slash);
    const auto colon = hostport.find(':');
    if (colon == std::string::npos) {
        out.host = hostport;
    } else {
        out.host = hostport.substr(0, colon);
        out.port = std::atoi(hostport.c_str() + colon + 1);
    }
    if (out.host.empty() || out.port <= 0)
        throw JudgeError(JudgeErrorCode::BadRequest,
                         "cannot parse judge endpoint '" + url + "'");
    return out;
}

bool is_timeout(httplib::Error err) {
    return err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
           err == httplib::Error::Write;
}

}  // namespace

HttpJudge::HttpJudge(JudgeConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint.empty())
        throw JudgeError(JudgeErrorCode::BadRequest, "judge endpoint is not configured");
    parse_http_url(cfg_.endpoint);  // validate eagerly
}

nlohmann::json HttpJudge::post(const nlohmann::json& body) {
    const auto url = parse_http_url(cfg_.endpoint);
    const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
    const auto timeout_us =
        std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout) -
        std::chrono::duration_cast<std::chrono::microseconds>(timeout_s);

    std::string last_error = "no attempt made";
    const std::size_t attempts = std::max<std::size_t>(1, cfg_.max_retries);
    for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(cfg_.initial_backoff * (1u << (attempt - 1)));

        httplib::Client client(url.host, url.port);
        client.set_connection_timeout(static_cast<time_t>(timeout_s.count()),
                                      static_cast<time_t>(timeout_us.count()));
        client.set_read_timeout(static_cast<time_t>(timeout_s.count()),
                                static_cast<time_t>(timeout_us.count()));
        httplib::Headers headers;
        if (!cfg_.auth_token.empty()) headers.emplace(cfg_.auth_header, cfg_.auth_token);

        auto res = client.Post(url.path, headers, body.dump(), "application/json");
        if (!res) {
            const auto err = res.error();
            last_error = httplib::to_string(err);
            if (is_timeout(err) && attempt + 1 >= attempts)
                throw JudgeError(JudgeErrorCode::Timeout,
                                 "judge request timed out: " + last_error);
            continue;  // transient: retry with backoff
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;  // server-side transient
        }
        if (res->status != 200)
            throw JudgeError(JudgeErrorCode::HttpStatus,
                             "judge returned HTTP " + std::to_string(res->status));
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw JudgeError(JudgeErrorCode::MalformedResponse,
                             std::string("judge response is not JSON: ") + e.what());
        }
    }
    throw JudgeError(JudgeErrorCode::RetriesExhausted,
                     "judge unreachable after " + std::to_string(attempts) +
                         " attempts (last error: " + last_error + ")");
}

double HttpJudge::geval(const GEvalCase& c) {
    ordered_json body;
    body["kind"] = "geval";
    body["input"] = c.input;
    body["actual_output"] = c.actual_output;
    body["expected_output"] = c.expected_output;
    body["model_name"] = cfg_.model_name;
    body["temperature"] = cfg_.temperature;
    const auto res = post(body);
    if (!res.is_object() || !res.contains("score") || !res["score"].is_number())
        throw JudgeError(JudgeErrorCode::MalformedResponse,
                         "judge response missing numeric 'score'");
    return res["score"].get<double>();
}

PairwiseParseResult HttpJudge::pairwise(const Compound& c, const HypothesisSet& model,
                                        const HypothesisSet& reference) {
    ordered_json body;
    body["kind"] = "pairwise";
    body["prompt"] = render_pairwise_prompt(c, model, reference);
    body["model_name"] = cfg_.model_name;
    body["temperature"] = cfg_.temperature;
    const auto res = post(body);
    return parse_pairwise_response(res, model.hypotheses.size(),
                                   reference.hypotheses.size());
}

GEvalResult run_geval(const GEvalCase& c, const JudgeConfig& cfg, Judge& judge) {
    double score = judge.geval(c);
    constexpr double kEps = 1e-9;
    if (score < -kEps || score > 1.0 + kEps)
        throw JudgeError(JudgeErrorCode::OutOfRangeScore,
                         "judge score " + std::to_string(score) + " outside [0,1]");
    score = std::clamp(score, 0.0, 1.0);
    return {score, score >= cfg.geval_threshold};
}

// ---------------------------------------------------------------------------
// Anonymization sanitizer
// ---------------------------------------------------------------------------

std::string_view to_string(LeakKind kind) {
    switch (kind) {
        case LeakKind::Smiles: return "smiles";
        case LeakKind::InchiKey: return "inchikey";
        case LeakKind::InchiKeySkeleton: return "inchikey-skeleton";
        case LeakKind::Custom: return "custom";
    }
    return "?";
}

namespace {

std::string strip_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    return out;
}

void find_all(std::string_view haystack, std::string_view needle, LeakKind kind,
              std::vector<LeakViolation>& out) {
    if (needle.empty()) return;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
        out.push_back({kind, pos, std::string(needle)});
        pos += needle.size();
    }
}

}  // namespace

std::vector<LeakViolation> sanitize_handoff(std::string_view payload,
                                            const Compound& query,
                                            const std::vector<std::string>& extra_patterns) {
    std::vector<LeakViolation> violations;

    // SMILES: search the whitespace-compacted payload so occurrences broken by
    // spaces or line wraps are still caught; offsets map back to the original.
    const std::string needle = strip_whitespace(query.smiles);
    if (!needle.empty()) {
        std::string compact;
        std::vector<std::size_t> origin;
        compact.reserve(payload.size());
        origin.reserve(payload.size());
        for (std::size_t i = 0; i < payload.size(); ++i) {
            if (!std::isspace(static_cast<unsigned char>(payload[i]))) {
                compact.push_back(payload[i]);
                origin.push_back(i);
            }
        }
        std::size_t pos = 0;
        while ((pos = compact.find(needle, pos)) != std::string::npos) {
            violations.push_back({LeakKind::Smiles, origin[pos], query.smiles});
            pos += needle.size();
        }
    }

    if (!query.inchikey.empty()) {
        std::vector<LeakViolation> key_hits;
        find_all(payload, query.inchikey, LeakKind::InchiKey, key_hits);
        std::set<std::size_t> full_offsets;
        for (const auto& v : key_hits) full_offsets.insert(v.offset);
        violations.insert(violations.end(), key_hits.begin(), key_hits.end());

        // First-14-character skeleton block; a full-key hit already covers the
        // skeleton at the same offset.
        std::vector<LeakViolation> skeleton_hits;
        find_all(payload, std::string_view(query.inchikey).substr(0, 14),
                 LeakKind::InchiKeySkeleton, skeleton_hits);
        for (const auto& v : skeleton_hits)
            if (!full_offsets.count(v.offset)) violations.push_back(v);
    }

    for (const auto& pattern : extra_patterns)
        find_all(payload, pattern, LeakKind::Custom, violations);

    std::sort(violations.begin(), violations.end(),
              [](const LeakViolation& a, const LeakViolation& b) {
                  if (a.offset != b.offset) return a.offset < b.offset;
                  return static_cast<int>(a.kind) < static_cast<int>(b.kind);
              });
    return violations;
}

}  // namespace dili::judge
