#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

#include "dili/judge.hpp"

// Subcommand implementations behind the dilibench binary. Every command is a
// pure function of (inputs, config, mock mode): the human-readable report goes
// to the stream, the machine-readable twin to --out, and identical inputs
// produce byte-identical outputs. Exit codes: 0 success, 2 input error,
// 3 judge-endpoint error, 4 internal error.

namespace dili::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitJudgeError = 3;
inline constexpr int kExitInternalError = 4;

struct CommonOptions {
    std::optional<std::string> out_path;  // machine-readable report (JSON)
    std::size_t jobs = 1;
    long seed = 0;  // echoed; consumed by synthetic-fixture generation only
};

struct AlignEvalOptions {
    std::string benchmark_path;
    std::string model_path;
    bool mock_judge = false;
    judge::JudgeConfig judge;
    double partial_weight = 0.5;
    bool strict = false;  // strict validation of the model output file
    std::optional<std::string> alignments_out;  // alignment-record JSONL
    CommonOptions common;
};

struct BinaryEvalOptions {
    std::string benchmark_path;
    std::string predictions_path;
    double threshold = 0.5;
    std::string model_name;  // defaults to the prediction file stem
    CommonOptions common;
};

struct RetrieveOptions {
    std::string corpus_path;
    std::string query_path;
    std::size_t k = 10;
    double p = 0.5;
    bool u_statistic = false;          // pair means excluding self-pairs
    std::string metric = "energy";     // energy | cosine | tanimoto
    CommonOptions common;
};

struct CurateOptions {
    std::string activity_path;
    std::optional<std::string> mapping_path;
    std::string dili_compounds_path;
    std::string out_dir;
    double threshold_nM = 10000.0;
    CommonOptions common;
};

struct AuditCmdOptions {
    std::string claims_path;
    std::string synonyms_path;
    std::string predictions_path;
    std::string benchmark_path;
    double threshold = 0.5;
    CommonOptions common;
};

int cmd_align_eval(const AlignEvalOptions& opts, std::ostream& out);
int cmd_binary_eval(const BinaryEvalOptions& opts, std::ostream& out);
int cmd_retrieve(const RetrieveOptions& opts, std::ostream& out);
int cmd_curate(const CurateOptions& opts, std::ostream& out);
int cmd_audit(const AuditCmdOptions& opts, std::ostream& out);

/// Maps an in-flight exception to the documented exit codes and prints a
/// diagnostic to the stream.
int exit_code_for_current_exception(std::ostream& err);

}  // namespace dili::cli
