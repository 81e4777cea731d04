#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dili/cli.hpp"
#include "dili/report.hpp"

// dilibench: evaluation toolkit for mechanistic DILI hypothesis benchmarks.
// Subcommands: align-eval, binary-eval, retrieve, curate, audit. Options can
// also come from a config file (--config, TOML/INI); command-line flags win.

namespace {

void add_common(CLI::App* cmd, dili::cli::CommonOptions& common,
                std::string& out_path) {
    cmd->add_option("--out", out_path, "write the machine-readable JSON report here");
    cmd->add_option("--jobs", common.jobs, "parallel worker bound")
        ->check(CLI::Range(std::size_t{1}, std::size_t{256}));
    cmd->add_option("--seed", common.seed,
                    "seed echoed into reports (used only by synthetic fixture tools)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"benchmark evaluation toolkit for mechanistic DILI hypothesis "
                 "generators"};
    app.set_config("--config", "", "read options from a TOML/INI config file");
    app.set_version_flag("--version", std::string(dili::report::kToolVersion));
    app.require_subcommand(1);

    // align-eval ------------------------------------------------------------
    dili::cli::AlignEvalOptions align_opts;
    align_opts.judge = dili::judge::JudgeConfig::from_env();
    std::string align_out_path, alignments_out;
    long long judge_timeout_ms = align_opts.judge.timeout.count();
    long long judge_backoff_ms = align_opts.judge.initial_backoff.count();
    auto* align_cmd = app.add_subcommand(
        "align-eval", "hypothesis-alignment evaluation against a benchmark");
    align_cmd->add_option("--benchmark", align_opts.benchmark_path, "benchmark JSONL file")
        ->required();
    align_cmd->add_option("--model-output", align_opts.model_path,
                          "model hypothesis JSONL file")
        ->required();
    align_cmd->add_flag("--mock-judge", align_opts.mock_judge,
                        "use the deterministic offline judge");
    align_cmd->add_option("--judge-endpoint", align_opts.judge.endpoint,
                          "judge HTTP endpoint (or DILI_JUDGE_ENDPOINT)");
    align_cmd->add_option("--judge-model", align_opts.judge.model_name,
                          "judge model name sent on the wire");
    align_cmd->add_option("--geval-threshold", align_opts.judge.geval_threshold,
                          "G-Eval pass threshold")
        ->check(CLI::Range(0.0, 1.0));
    align_cmd->add_option("--judge-timeout-ms", judge_timeout_ms, "judge request timeout");
    align_cmd->add_option("--judge-retries", align_opts.judge.max_retries,
                          "attempts per judge request");
    align_cmd->add_option("--judge-backoff-ms", judge_backoff_ms,
                          "initial retry backoff");
    align_cmd->add_option("--wp", align_opts.partial_weight,
                          "partial-match weight in the fuzzy metrics")
        ->check(CLI::Range(0.0, 1.0));
    align_cmd->add_flag("--strict", align_opts.strict,
                        "strict validation of the model output file");
    align_cmd->add_option("--alignments-out", alignments_out,
                          "write resolved pairwise alignments (JSONL) here");
    add_common(align_cmd, align_opts.common, align_out_path);

    // binary-eval -----------------------------------------------------------
    dili::cli::BinaryEvalOptions binary_opts;
    std::string binary_out_path;
    auto* binary_cmd =
        app.add_subcommand("binary-eval", "binary and severity-scale classification "
                                          "metrics for a prediction file");
    binary_cmd->add_option("--benchmark", binary_opts.benchmark_path, "benchmark JSONL file")
        ->required();
    binary_cmd->add_option("--predictions", binary_opts.predictions_path,
                           "prediction JSONL file")
        ->required();
    binary_cmd->add_option("--threshold", binary_opts.threshold,
                           "binarization threshold (score >= threshold is positive)")
        ->check(CLI::Range(0.0, 1.0));
    binary_cmd->add_option("--model-name", binary_opts.model_name,
                           "model name for the report (defaults to the file stem)");
    add_common(binary_cmd, binary_opts.common, binary_out_path);

    // retrieve ----------------------------------------------------------------
    dili::cli::RetrieveOptions retrieve_opts;
    std::string retrieve_out_path;
    auto* retrieve_cmd = app.add_subcommand(
        "retrieve", "top-k similarity retrieval over an embedding-set corpus");
    retrieve_cmd->add_option("--corpus", retrieve_opts.corpus_path,
                             "corpus file (binary or JSONL embeddings; fingerprint "
                             "JSONL for --metric tanimoto)")
        ->required();
    retrieve_cmd->add_option("--query", retrieve_opts.query_path,
                             "query file (every entry is ranked)")
        ->required();
    retrieve_cmd->add_option("--k", retrieve_opts.k, "hits per query")
        ->check(CLI::PositiveNumber);
    retrieve_cmd->add_option("--p", retrieve_opts.p, "energy-distance exponent in (0,2]");
    retrieve_cmd->add_option("--metric", retrieve_opts.metric,
                             "energy (default), cosine, or tanimoto");
    retrieve_cmd->add_flag("--u-statistic", retrieve_opts.u_statistic,
                           "exclude self-pairs from the within-set means");
    add_common(retrieve_cmd, retrieve_opts.common, retrieve_out_path);

    // curate ------------------------------------------------------------------
    dili::cli::CurateOptions curate_opts;
    std::string curate_out_path, mapping_path;
    auto* curate_cmd = app.add_subcommand(
        "curate", "run the bioactivity curation pipeline on an activity table");
    curate_cmd->add_option("--activity", curate_opts.activity_path,
                           "tab-separated activity table")
        ->required();
    curate_cmd->add_option("--mapping", mapping_path,
                           "two-column chembl-to-common target id mapping (TSV)");
    curate_cmd->add_option("--dili-compounds", curate_opts.dili_compounds_path,
                           "compound keys of the DILI collection, one per line")
        ->required();
    curate_cmd->add_option("--out-dir", curate_opts.out_dir, "output directory")
        ->required();
    curate_cmd->add_option("--threshold-nm", curate_opts.threshold_nM,
                           "potency threshold in nM")
        ->check(CLI::PositiveNumber);
    add_common(curate_cmd, curate_opts.common, curate_out_path);

    // audit -------------------------------------------------------------------
    dili::cli::AuditCmdOptions audit_opts;
    std::string audit_out_path;
    auto* audit_cmd = app.add_subcommand(
        "audit", "recognition-leakage audit with per-bucket metrics");
    audit_cmd->add_option("--claims", audit_opts.claims_path, "claims JSONL file")
        ->required();
    audit_cmd->add_option("--synonyms", audit_opts.synonyms_path,
                          "synonym cache JSONL file")
        ->required();
    audit_cmd->add_option("--predictions", audit_opts.predictions_path,
                          "prediction JSONL file")
        ->required();
    audit_cmd->add_option("--benchmark", audit_opts.benchmark_path, "benchmark JSONL file")
        ->required();
    audit_cmd->add_option("--threshold", audit_opts.threshold,
                          "binarization threshold for the per-bucket metrics")
        ->check(CLI::Range(0.0, 1.0));
    add_common(audit_cmd, audit_opts.common, audit_out_path);

    CLI11_PARSE(app, argc, argv);

    auto assign_out = [](const std::string& path, dili::cli::CommonOptions& common) {
        if (!path.empty()) common.out_path = path;
    };

    try {
        if (align_cmd->parsed()) {
            assign_out(align_out_path, align_opts.common);
            if (!alignments_out.empty()) align_opts.alignments_out = alignments_out;
            align_opts.judge.timeout = std::chrono::milliseconds(judge_timeout_ms);
            align_opts.judge.initial_backoff = std::chrono::milliseconds(judge_backoff_ms);
            return dili::cli::cmd_align_eval(align_opts, std::cout);
        }
        if (binary_cmd->parsed()) {
            assign_out(binary_out_path, binary_opts.common);
            return dili::cli::cmd_binary_eval(binary_opts, std::cout);
        }
        if (retrieve_cmd->parsed()) {
            assign_out(retrieve_out_path, retrieve_opts.common);
            return dili::cli::cmd_retrieve(retrieve_opts, std::cout);
        }
        if (curate_cmd->parsed()) {
            assign_out(curate_out_path, curate_opts.common);
            if (!mapping_path.empty()) curate_opts.mapping_path = mapping_path;
            return dili::cli::cmd_curate(curate_opts, std::cout);
        }
        if (audit_cmd->parsed()) {
            assign_out(audit_out_path, audit_opts.common);
            return dili::cli::cmd_audit(audit_opts, std::cout);
        }
    } catch (...) {
        return dili::cli::exit_code_for_current_exception(std::cerr);
    }
    std::cerr << "no subcommand selected\n";
    return dili::cli::kExitInputError;
}
