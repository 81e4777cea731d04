#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dili/alignment.hpp"
#include "dili/model.hpp"

// LLM-judge integration: renders the evaluation prompts, speaks a minimal
// HTTP request/response contract to a pluggable judge endpoint, parses and
// validates structured pairwise responses, enforces the anonymization
// contract at tool hand-offs, and provides a deterministic offline mock.

namespace dili::judge {

enum class JudgeErrorCode {
    Transport,        // connection-level failure
    Timeout,
    HttpStatus,       // non-retryable HTTP status
    RetriesExhausted,
    MalformedResponse,
    MissingField,     // one of the four required pairwise fields absent
    UnknownLabel,
    IndexOutOfRange,
    OutOfRangeScore,
    BadRequest,       // caller-side contract violation
};

std::string_view to_string(JudgeErrorCode code);

class JudgeError : public std::runtime_error {
public:
    JudgeError(JudgeErrorCode code, const std::string& msg)
        : std::runtime_error(msg), code_(code) {}
    JudgeErrorCode code() const { return code_; }

private:
    JudgeErrorCode code_;
};

struct JudgeConfig {
    std::string endpoint;   // http://host[:port][/path]
    std::string model_name = "gemini-3-flash-preview";
    double temperature = 0.0;
    double geval_threshold = 0.5;
    std::size_t max_parallel = 4;
    std::chrono::milliseconds timeout{30000};
    std::size_t max_retries = 3;   // total attempts per request
    std::chrono::milliseconds initial_backoff{1000};
    std::string auth_header = "Authorization";
    std::string auth_token;        // empty: no credential header sent

    /// Reads DILI_JUDGE_ENDPOINT, DILI_JUDGE_TOKEN and DILI_JUDGE_AUTH_HEADER
    /// over the defaults.
    static JudgeConfig from_env();
};

// ---------------------------------------------------------------------------
// Prompt rendering (pure functions; equal inputs yield byte-equal outputs)
// ---------------------------------------------------------------------------

struct GEvalCase {
    std::string input;            // compound context: InChIKey, SMILES, binary label
    std::string actual_output;    // canonical serialization of the model list
    std::string expected_output;  // canonical serialization of the reference list
};

/// Canonical JSON serialization of a hypothesis list as shown to the judge.
std::string serialize_hypotheses(const HypothesisSet& set);

GEvalCase render_geval_case(const Compound& c, const HypothesisSet& model,
                            const HypothesisSet& reference);

std::string render_pairwise_prompt(const Compound& c, const HypothesisSet& model,
                                   const HypothesisSet& reference);

/// Baseline prompt templates with {smiles} substituted.
std::string render_baseline_user_prompt(const std::string& smiles);
std::string render_txgemma_prompt(const std::string& smiles);

/// Single-pass {placeholder} substitution: substituted values are emitted
/// verbatim (never rescanned), unknown placeholders in the template are an
/// internal error.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& values);

// ---------------------------------------------------------------------------
// Pairwise response parsing
// ---------------------------------------------------------------------------

struct PairwiseJudgeResponse {
    std::vector<align::PairAlignment> pairwise_alignments;
    std::string summary;
    std::string edited_model_output;      // tagged model-side text
    std::string edited_reference_output;  // tagged reference-side text
};

struct PairwiseParseResult {
    PairwiseJudgeResponse response;              // as validated from the wire
    std::vector<align::PairAlignment> resolved_pairs;  // one-to-one, tally-safe
    std::vector<std::string> warnings;
};

/// Validates the four required fields, maps labels (tolerantly: case and
/// separator variations plus the ONLY_IN_* tag vocabulary are accepted with a
/// warning), enforces index validity against the two set sizes, and resolves
/// many-to-one pairings so that the result always feeds align::tally cleanly.
PairwiseParseResult parse_pairwise_response(const nlohmann::json& raw,
                                            std::size_t model_count,
                                            std::size_t reference_count);

/// Alignment tags ([EXACT MATCH], [ONLY_IN_HADES], ...) recognized in an
/// edited-output text, in order of appearance.
std::vector<align::AlignmentLabel> extract_tags(std::string_view edited_text);

// ---------------------------------------------------------------------------
// Judge backends
// ---------------------------------------------------------------------------

class Judge {
public:
    virtual ~Judge() = default;

    /// Raw G-Eval score for a rendered case. Throws JudgeError.
    virtual double geval(const GEvalCase& c) = 0;

    virtual PairwiseParseResult pairwise(const Compound& c, const HypothesisSet& model,
                                         const HypothesisSet& reference) = 0;
};

/// HTTP judge speaking the wire contract
///   request  {kind: "geval", input, actual_output, expected_output,
///             model_name, temperature}            -> response {score}
///   request  {kind: "pairwise", prompt, model_name, temperature}
///             -> response with the four pairwise fields
/// with exponential-backoff retries on transient failures.
class HttpJudge : public Judge {
public:
    explicit HttpJudge(JudgeConfig cfg);
    double geval(const GEvalCase& c) override;
    PairwiseParseResult pairwise(const Compound& c, const HypothesisSet& model,
                                 const HypothesisSet& reference) override;

private:
    nlohmann::json post(const nlohmann::json& body);
    JudgeConfig cfg_;
};

/// Deterministic offline judge. Pairwise rule: equal case-folded titles pair
/// as Exact Match; otherwise intersecting category sets pair as Contradiction
/// when the directions differ and as Partial Match when they agree; leftovers
/// become Only pairs. The G-Eval score is the fuzzy Jaccard of that alignment
/// (1.0 when both lists are empty). The mock emits the wire JSON and runs it
/// through parse_pairwise_response, exercising the production parse path.
class MockJudge : public Judge {
public:
    double geval(const GEvalCase& c) override;
    PairwiseParseResult pairwise(const Compound& c, const HypothesisSet& model,
                                 const HypothesisSet& reference) override;

    /// The raw wire-format response the mock would send.
    nlohmann::json pairwise_wire(const HypothesisSet& model,
                                 const HypothesisSet& reference) const;
};

struct GEvalResult {
    double score = 0.0;
    bool pass = false;
};

/// Scores a case against the configured threshold. Scores within 1e-9 of
/// [0,1] are clamped; anything further out raises OutOfRangeScore (a judge
/// misconfiguration, not data).
GEvalResult run_geval(const GEvalCase& c, const JudgeConfig& cfg, Judge& judge);

// ---------------------------------------------------------------------------
// Anonymization sanitizer
// ---------------------------------------------------------------------------

enum class LeakKind {
    Smiles,            // exact or whitespace-normalized SMILES occurrence
    InchiKey,          // full 27-char key
    InchiKeySkeleton,  // first-14-character block
    Custom,            // user-supplied literal pattern
};

std::string_view to_string(LeakKind kind);

struct LeakViolation {
    LeakKind kind;
    std::size_t offset = 0;   // byte offset of the match start in the payload
    std::string pattern;      // the matched identifier
};

/// Scans a hand-off payload for identifiers of the query compound: its SMILES
/// (exact and whitespace-normalized), its full InChIKey, the 14-character
/// skeleton block, plus any extra literal patterns. Returns violations with
/// byte offsets; the payload is never mutated.
std::vector<LeakViolation> sanitize_handoff(
    std::string_view payload, const Compound& query,
    const std::vector<std::string>& extra_patterns = {});

}  // namespace dili::judge
