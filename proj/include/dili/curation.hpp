#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Bioactivity curation: raw potency measurements are binarized at a uniform
// 10,000 nM threshold into inhibition / activation / binding task labels, then
// pass through deduplication, functional-consistency control, logical label
// augmentation, conservative propagation of negative binding evidence,
// cross-source reconciliation, benchmark-leakage removal and class-balance
// filtering. Every record mutation is appended to a provenance log.

namespace dili::curation {

class CurationError : public std::runtime_error {
public:
    explicit CurationError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class DataSource { Chembl, Evebio };
enum class Endpoint { IC50, EC50, Kd };
enum class Task { Inhibition, Activation, Binding };

std::string_view to_string(DataSource s);
std::string_view to_string(Endpoint e);
std::string_view to_string(Task t);
std::optional<DataSource> parse_source(std::string_view text);
std::optional<Endpoint> parse_endpoint(std::string_view text);

/// IC50 reads as inhibition evidence, EC50 as activation, Kd as binding.
Task task_for_endpoint(Endpoint e);

inline constexpr double kDefaultThresholdNM = 10000.0;
inline constexpr double kMaxMajorityFraction = 0.90;  // strict <
inline constexpr std::size_t kMinMinorityCount = 20;  // strict >

struct ActivityRecord {
    DataSource source = DataSource::Chembl;
    std::string target_id;
    std::string compound_id;
    std::string smiles;
    Endpoint endpoint = Endpoint::IC50;
    double value_nM = 0.0;  // > 0
    std::map<std::string, std::string> assay_meta;
};

struct BinaryLabelRecord {
    std::string target_id;
    std::string compound_id;
    std::string smiles;
    Task task = Task::Inhibition;
    int label = 0;
    std::vector<DataSource> sources;       // one entry pre-reconcile
    std::vector<std::string> provenance;   // ordered stage annotations

    DataSource source() const { return sources.empty() ? DataSource::Chembl : sources[0]; }
};

// ---------------------------------------------------------------------------
// Provenance log
// ---------------------------------------------------------------------------

enum class Stage {
    Binarize,
    Dedup,
    ResolveConflicts,
    Augment,
    Propagate,
    Reconcile,
    RemoveLeakage,
    FilterDatasets,
};

std::string_view to_string(Stage s);

struct LogEvent {
    Stage stage;
    std::string action;   // drop | add | collapse | override | keep-explicit | reject | ...
    std::string target_id;
    std::string compound_id;
    std::string task;     // empty when not task-specific
    std::string detail;
};

using CurationLog = std::vector<LogEvent>;

// ---------------------------------------------------------------------------
// Stages (pure given their inputs; events appended to the log)
// ---------------------------------------------------------------------------

/// Threshold rule: label 1 iff value_nM < threshold (values at or above the
/// threshold are negative). Throws CurationError on non-positive values.
BinaryLabelRecord binarize(const ActivityRecord& r, double threshold_nM = kDefaultThresholdNM);

std::vector<BinaryLabelRecord> binarize_all(const std::vector<ActivityRecord>& records,
                                            double threshold_nM, CurationLog& log);

/// Exact duplicates collapse to one record; same-key records with conflicting
/// labels within one source are all dropped ("intra-source conflict").
std::vector<BinaryLabelRecord> deduplicate(std::vector<BinaryLabelRecord> records,
                                           CurationLog& log);

/// Removes every (compound, target) pair positive in both activation and
/// inhibition from both datasets.
struct ConflictResult {
    std::vector<BinaryLabelRecord> kept;
    std::vector<BinaryLabelRecord> removed;
};
ConflictResult resolve_functional_conflicts(std::vector<BinaryLabelRecord> records,
                                            CurationLog& log);

/// A positive activation label implies a negative inhibition label and vice
/// versa; implied negatives are added only where no record exists and never
/// overwrite an explicit label (idempotent).
std::vector<BinaryLabelRecord> augment_labels(std::vector<BinaryLabelRecord> records,
                                              CurationLog& log);

/// Binding-negative pairs propagate activation- and inhibition-negatives where
/// absent; positive binding labels propagate nothing. A propagated negative
/// meeting an explicit positive keeps the explicit record (conflict logged).
std::vector<BinaryLabelRecord> propagate_binding_negatives(
    std::vector<BinaryLabelRecord> records, CurationLog& log);

/// Per (compound, target, task): agreeing sources merge into one record with
/// both sources listed; on disagreement the ChEMBL record is dropped and the
/// EveBIO annotation retained.
std::vector<BinaryLabelRecord> reconcile_sources(std::vector<BinaryLabelRecord> chembl,
                                                 std::vector<BinaryLabelRecord> evebio,
                                                 CurationLog& log);

/// Drops every record whose compound appears in the DILI collection
/// (any split). Keys must be normalized identically on both sides.
std::vector<BinaryLabelRecord> remove_leakage(std::vector<BinaryLabelRecord> records,
                                              const std::set<std::string>& dili_compounds,
                                              CurationLog& log);

struct DatasetReport {
    std::string target_id;
    Task task = Task::Inhibition;
    std::size_t n_total = 0;
    std::size_t n_positive = 0;
    std::size_t n_negative = 0;
    double majority_fraction = 0.0;
    bool accepted = false;
    std::optional<std::string> rejection_reason;
};

/// Groups records by (target, task) and applies the balance criteria:
/// accepted iff majority_fraction < 0.90 and minority count > 20 (both
/// strict). Reports are sorted by (target, task).
std::vector<DatasetReport> filter_datasets(const std::vector<BinaryLabelRecord>& records,
                                           CurationLog* log = nullptr);

/// Trim + uppercase; applied to compound keys on both sides of the leakage
/// join.
std::string normalize_compound_key(std::string_view raw);

// ---------------------------------------------------------------------------
// Pipeline runner (fixed stage order; out-of-order composition refused)
// ---------------------------------------------------------------------------

struct PipelineOptions {
    double threshold_nM = kDefaultThresholdNM;
};

class PipelineRunner {
public:
    using Options = PipelineOptions;

    /// ChEMBL target ids are translated through `target_mapping` at intake
    /// (identity for unmapped ids); EveBIO records are assumed to already use
    /// the common vocabulary.
    PipelineRunner(std::vector<ActivityRecord> records,
                   const std::map<std::string, std::string>& target_mapping,
                   Options opts = {});

    // Stages must be invoked in declaration order; anything else throws.
    void run_binarize();
    void run_dedup();
    void run_resolve_conflicts();
    void run_augment();
    void run_propagate();
    void run_reconcile();
    void run_remove_leakage(const std::set<std::string>& dili_compounds);
    std::vector<DatasetReport> run_filter();

    /// All stages in order.
    std::vector<DatasetReport> run_all(const std::set<std::string>& dili_compounds);

    /// Final records (valid after reconcile), sorted by (target, compound, task).
    const std::vector<BinaryLabelRecord>& records() const { return merged_; }
    const CurationLog& log() const { return log_; }

private:
    void enter(Stage s);

    Options opts_;
    Stage next_stage_ = Stage::Binarize;
    std::vector<ActivityRecord> chembl_raw_;
    std::vector<ActivityRecord> evebio_raw_;
    std::vector<BinaryLabelRecord> chembl_;
    std::vector<BinaryLabelRecord> evebio_;
    std::vector<BinaryLabelRecord> merged_;
    CurationLog log_;
};

// ---------------------------------------------------------------------------
// IO
// ---------------------------------------------------------------------------

/// Tab-separated activity table with a declared header. Required columns:
/// source, target_id, compound_id, smiles, endpoint, value_nM; any additional
/// columns are carried as assay metadata. Values must be plain positive
/// numbers already normalized to nM (unit suffixes are rejected).
std::vector<ActivityRecord> parse_activity_table(const std::string& path);
std::vector<ActivityRecord> parse_activity_table_stream(std::istream& in,
                                                        const std::string& name);

/// Two-column TSV: chembl_target_id <TAB> common_target_id.
std::map<std::string, std::string> parse_target_mapping(const std::string& path);

/// One compound key per line, normalized via normalize_compound_key.
std::set<std::string> parse_compound_list(const std::string& path);

/// Writes one TSV per accepted (target, task) dataset into `dir` plus
/// report.tsv and provenance.log; rows are sorted by key. Returns the dataset
/// file names written (sorted).
std::vector<std::string> write_outputs(const std::string& dir,
                                       const std::vector<BinaryLabelRecord>& records,
                                       const std::vector<DatasetReport>& reports,
                                       const CurationLog& log);

void write_report(std::ostream& out, const std::vector<DatasetReport>& reports);
void write_provenance(std::ostream& out, const CurationLog& log);

}  // namespace dili::curation
