#include "dili/curation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <tuple>

namespace dili::curation {

namespace {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string format_fraction(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

using Key = std::tuple<std::string, std::string, Task>;  // target, compound, task

Key key_of(const BinaryLabelRecord& r) { return {r.target_id, r.compound_id, r.task}; }

LogEvent event(Stage stage, std::string action, const BinaryLabelRecord& r,
               std::string detail) {
    return {stage, std::move(action), r.target_id, r.compound_id,
            std::string(to_string(r.task)), std::move(detail)};
}

}  // namespace

std::string_view to_string(DataSource s) {
    return s == DataSource::Chembl ? "chembl" : "evebio";
}

std::string_view to_string(Endpoint e) {
    switch (e) {
        case Endpoint::IC50: return "IC50";
        case Endpoint::EC50: return "EC50";
        case Endpoint::Kd: return "Kd";
    }
    return "?";
}

std::string_view to_string(Task t) {
    switch (t) {
        case Task::Inhibition: return "inhibition";
        case Task::Activation: return "activation";
        case Task::Binding: return "binding";
    }
    return "?";
}

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::Binarize: return "binarize";
        case Stage::Dedup: return "dedup";
        case Stage::ResolveConflicts: return "resolve-conflicts";
        case Stage::Augment: return "augment";
        case Stage::Propagate: return "propagate";
        case Stage::Reconcile: return "reconcile";
        case Stage::RemoveLeakage: return "remove-leakage";
        case Stage::FilterDatasets: return "filter-datasets";
    }
    return "?";
}

std::optional<DataSource> parse_source(std::string_view text) {
    if (text == "chembl") return DataSource::Chembl;
    if (text == "evebio") return DataSource::Evebio;
    return std::nullopt;
}

std::optional<Endpoint> parse_endpoint(std::string_view text) {
    if (text == "IC50") return Endpoint::IC50;
    if (text == "EC50") return Endpoint::EC50;
    if (text == "Kd") return Endpoint::Kd;
    return std::nullopt;
}

Task task_for_endpoint(Endpoint e) {
    switch (e) {
        case Endpoint::IC50: return Task::Inhibition;
        case Endpoint::EC50: return Task::Activation;
        case Endpoint::Kd: return Task::Binding;
    }
    return Task::Inhibition;
}

std::string normalize_compound_key(std::string_view raw) {
    std::size_t begin = 0;
    std::size_t end = raw.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
    std::string out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i)
        out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(raw[i]))));
    return out;
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

BinaryLabelRecord binarize(const ActivityRecord& r, double threshold_nM) {
    if (!(r.value_nM > 0.0))
        throw CurationError("non-positive activity value for compound '" + r.compound_id +
                            "' at target '" + r.target_id + "'");
    BinaryLabelRecord out;
    out.target_id = r.target_id;
    out.compound_id = r.compound_id;
    out.smiles = r.smiles;
    out.task = task_for_endpoint(r.endpoint);
    out.label = r.value_nM < threshold_nM ? 1 : 0;
    out.sources = {r.source};
    out.provenance.push_back("binarize: " + std::string(to_string(r.source)) + " " +
                             std::string(to_string(r.endpoint)) + " " +
                             format_value(r.value_nM) + " nM vs threshold " +
                             format_value(threshold_nM) + " -> " +
                             std::string(to_string(out.task)) + " label " +
                             std::to_string(out.label));
    return out;
}

std::vector<BinaryLabelRecord> binarize_all(const std::vector<ActivityRecord>& records,
                                            double threshold_nM, CurationLog& log) {
    std::vector<BinaryLabelRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(binarize(r, threshold_nM));
        log.push_back(event(Stage::Binarize, "label", out.back(),
                            out.back().provenance.back()));
    }
    return out;
}

std::vector<BinaryLabelRecord> deduplicate(std::vector<BinaryLabelRecord> records,
                                           CurationLog& log) {
    // Group within one source; the per-source pipelines feed this stage.
    std::map<std::pair<std::string, Key>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i)
        groups[{std::string(to_string(records[i].source())), key_of(records[i])}].push_back(i);

    std::vector<bool> drop(records.size(), false);
    for (auto& [key, indices] : groups) {
        if (indices.size() < 2) continue;
        bool conflicting = false;
        for (std::size_t i : indices)
            if (records[i].label != records[indices[0]].label) conflicting = true;
        if (conflicting) {
            for (std::size_t i : indices) {
                drop[i] = true;
                log.push_back(event(Stage::Dedup, "drop", records[i],
                                    "intra-source conflict: same key with differing labels"));
            }
        } else {
            for (std::size_t n = 1; n < indices.size(); ++n) {
                drop[indices[n]] = true;
                log.push_back(event(Stage::Dedup, "collapse", records[indices[n]],
                                    "exact duplicate collapsed"));
            }
            records[indices[0]].provenance.push_back(
                "dedup: collapsed " + std::to_string(indices.size()) + " duplicates");
        }
    }

    std::vector<BinaryLabelRecord> kept;
    kept.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        if (!drop[i]) kept.push_back(std::move(records[i]));
    return kept;
}

ConflictResult resolve_functional_conflicts(std::vector<BinaryLabelRecord> records,
                                            CurationLog& log) {
    std::set<std::pair<std::string, std::string>> act_pos;
    std::set<std::pair<std::string, std::string>> inh_pos;
    for (const auto& r : records) {
        if (r.label != 1) continue;
        if (r.task == Task::Activation) act_pos.insert({r.target_id, r.compound_id});
        if (r.task == Task::Inhibition) inh_pos.insert({r.target_id, r.compound_id});
    }

    ConflictResult result;
    for (auto& r : records) {
        const std::pair<std::string, std::string> pair{r.target_id, r.compound_id};
        const bool conflicted = r.label == 1 &&
                                (r.task == Task::Activation || r.task == Task::Inhibition) &&
                                act_pos.count(pair) && inh_pos.count(pair);
        if (conflicted) {
            log.push_back(event(Stage::ResolveConflicts, "drop", r,
                                "positive in both activation and inhibition"));
            result.removed.push_back(std::move(r));
        } else {
            result.kept.push_back(std::move(r));
        }
    }
    return result;
}

std::vector<BinaryLabelRecord> augment_labels(std::vector<BinaryLabelRecord> records,
                                              CurationLog& log) {
    std::map<Key, std::size_t> index;
    for (std::size_t i = 0; i < records.size(); ++i) index.emplace(key_of(records[i]), i);

    const std::size_t original = records.size();
    for (std::size_t i = 0; i < original; ++i) {
        const BinaryLabelRecord r = records[i];  // copy: push_back below reallocates
        if (r.label != 1) continue;
        Task implied_task;
        if (r.task == Task::Activation)
            implied_task = Task::Inhibition;
        else if (r.task == Task::Inhibition)
            implied_task = Task::Activation;
        else
            continue;

        const Key implied_key{r.target_id, r.compound_id, implied_task};
        auto it = index.find(implied_key);
        if (it != index.end()) {
            if (records[it->second].label == 1) {
                // Cannot happen after conflict resolution; logged defensively
                // for direct stage invocations.
                log.push_back(event(Stage::Augment, "keep-explicit", records[it->second],
                                    "implied negative conflicts with explicit positive"));
            }
            continue;  // never overwrite an existing label
        }
        BinaryLabelRecord implied;
        implied.target_id = r.target_id;
        implied.compound_id = r.compound_id;
        implied.smiles = r.smiles;
        implied.task = implied_task;
        implied.label = 0;
        implied.sources = r.sources;
        implied.provenance.push_back("augmentation: implied by " +
                                     std::string(to_string(r.task)) + " positive");
        log.push_back(event(Stage::Augment, "add", implied, implied.provenance.back()));
        index.emplace(implied_key, records.size());
        records.push_back(std::move(implied));
    }
    return records;
}

std::vector<BinaryLabelRecord> propagate_binding_negatives(
    std::vector<BinaryLabelRecord> records, CurationLog& log) {
    std::map<Key, std::size_t> index;
    for (std::size_t i = 0; i < records.size(); ++i) index.emplace(key_of(records[i]), i);

    const std::size_t original = records.size();
    for (std::size_t i = 0; i < original; ++i) {
        const BinaryLabelRecord r = records[i];  // copy: push_back below reallocates
        if (r.task != Task::Binding || r.label != 0) continue;  // positives propagate nothing
        for (Task implied_task : {Task::Activation, Task::Inhibition}) {
            const Key implied_key{r.target_id, r.compound_id, implied_task};
            auto it = index.find(implied_key);
            if (it != index.end()) {
                if (records[it->second].label == 1)
                    log.push_back(event(Stage::Propagate, "keep-explicit",
                                        records[it->second],
                                        "binding negative conflicts with explicit "
                                        "positive; explicit record kept"));
                continue;
            }
            BinaryLabelRecord implied;
            implied.target_id = r.target_id;
            implied.compound_id = r.compound_id;
            implied.smiles = r.smiles;
            implied.task = implied_task;
            implied.label = 0;
            implied.sources = r.sources;
            implied.provenance.push_back("binding-propagation: implied by binding negative");
            log.push_back(event(Stage::Propagate, "add", implied, implied.provenance.back()));
            index.emplace(implied_key, records.size());
            records.push_back(std::move(implied));
        }
    }
    return records;
}

std::vector<BinaryLabelRecord> reconcile_sources(std::vector<BinaryLabelRecord> chembl,
                                                 std::vector<BinaryLabelRecord> evebio,
                                                 CurationLog& log) {
    auto index_source = [&](std::vector<BinaryLabelRecord>& records,
                            const char* source_name) {
        std::map<Key, BinaryLabelRecord> index;
        std::set<Key> conflicted;
        for (auto& r : records) {
            const Key k = key_of(r);
            auto [it, inserted] = index.emplace(k, std::move(r));
            if (!inserted) conflicted.insert(k);
        }
        for (const auto& k : conflicted) {
            auto it = index.find(k);
            log.push_back(event(Stage::Reconcile, "drop", it->second,
                                std::string("intra-source label conflict surviving dedup in ") +
                                    source_name));
            index.erase(it);
        }
        return index;
    };

    auto chembl_index = index_source(chembl, "chembl");
    auto evebio_index = index_source(evebio, "evebio");

    std::vector<BinaryLabelRecord> out;
    auto ci = chembl_index.begin();
    auto ei = evebio_index.begin();
    while (ci != chembl_index.end() || ei != evebio_index.end()) {
        if (ei == evebio_index.end() || (ci != chembl_index.end() && ci->first < ei->first)) {
            out.push_back(std::move(ci->second));
            ++ci;
            continue;
        }
        if (ci == chembl_index.end() || ei->first < ci->first) {
            out.push_back(std::move(ei->second));
            ++ei;
            continue;
        }
        // Present in both sources.
        BinaryLabelRecord merged;
        if (ci->second.label == ei->second.label) {
            merged = std::move(ci->second);
            merged.sources = {DataSource::Chembl, DataSource::Evebio};
            merged.provenance.insert(merged.provenance.end(),
                                     ei->second.provenance.begin(),
                                     ei->second.provenance.end());
            merged.provenance.push_back("reconcile: sources agree");
            log.push_back(event(Stage::Reconcile, "merge", merged, "sources agree"));
        } else {
            log.push_back(event(Stage::Reconcile, "override", ci->second,
                                "conflicting chembl record removed (label " +
                                    std::to_string(ci->second.label) +
                                    "), evebio annotation retained (label " +
                                    std::to_string(ei->second.label) + ")"));
            merged = std::move(ei->second);
            merged.provenance.push_back("evebio-override");
        }
        out.push_back(std::move(merged));
        ++ci;
        ++ei;
    }
    return out;
}

std::vector<BinaryLabelRecord> remove_leakage(std::vector<BinaryLabelRecord> records,
                                              const std::set<std::string>& dili_compounds,
                                              CurationLog& log) {
    std::vector<BinaryLabelRecord> kept;
    kept.reserve(records.size());
    for (auto& r : records) {
        if (dili_compounds.count(normalize_compound_key(r.compound_id))) {
            log.push_back(event(Stage::RemoveLeakage, "drop", r,
                                "compound appears in the DILI collection"));
            continue;
        }
        kept.push_back(std::move(r));
    }
    return kept;
}

std::vector<DatasetReport> filter_datasets(const std::vector<BinaryLabelRecord>& records,
                                           CurationLog* log) {
    std::map<std::pair<std::string, Task>, DatasetReport> groups;
    for (const auto& r : records) {
        auto& rep = groups[{r.target_id, r.task}];
        rep.target_id = r.target_id;
        rep.task = r.task;
        ++rep.n_total;
        if (r.label == 1)
            ++rep.n_positive;
        else
            ++rep.n_negative;
    }

    std::vector<DatasetReport> out;
    out.reserve(groups.size());
    for (auto& [key, rep] : groups) {
        const std::size_t majority = std::max(rep.n_positive, rep.n_negative);
        const std::size_t minority = std::min(rep.n_positive, rep.n_negative);
        rep.majority_fraction =
            static_cast<double>(majority) / static_cast<double>(rep.n_total);
        const bool balanced = rep.majority_fraction < kMaxMajorityFraction;
        const bool populated = minority > kMinMinorityCount;
        rep.accepted = balanced && populated;
        if (!rep.accepted) {
            if (!balanced)
                rep.rejection_reason = "majority fraction " +
                                       format_fraction(rep.majority_fraction) + " >= " +
                                       format_fraction(kMaxMajorityFraction);
            else
                rep.rejection_reason = "minority count " + std::to_string(minority) +
                                       " <= " + std::to_string(kMinMinorityCount);
        }
        if (log)
            log->push_back({Stage::FilterDatasets, rep.accepted ? "accept" : "reject",
                            rep.target_id, "", std::string(to_string(rep.task)),
                            rep.accepted ? "balance criteria met"
                                         : *rep.rejection_reason});
        out.push_back(rep);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline runner
// ---------------------------------------------------------------------------

PipelineRunner::PipelineRunner(std::vector<ActivityRecord> records,
                               const std::map<std::string, std::string>& target_mapping,
                               Options opts)
    : opts_(opts) {
    for (auto& r : records) {
        if (r.source == DataSource::Chembl) {
            auto it = target_mapping.find(r.target_id);
            if (it != target_mapping.end()) r.target_id = it->second;
            chembl_raw_.push_back(std::move(r));
        } else {
            evebio_raw_.push_back(std::move(r));
        }
    }
}

void PipelineRunner::enter(Stage s) {
    if (s != next_stage_)
        throw CurationError(std::string("stage '") + std::string(to_string(s)) +
                            "' invoked out of order; expected '" +
                            std::string(to_string(next_stage_)) + "'");
    next_stage_ = static_cast<Stage>(static_cast<int>(s) + 1);
}

void PipelineRunner::run_binarize() {
    enter(Stage::Binarize);
    chembl_ = binarize_all(chembl_raw_, opts_.threshold_nM, log_);
    evebio_ = binarize_all(evebio_raw_, opts_.threshold_nM, log_);
}

void PipelineRunner::run_dedup() {
    enter(Stage::Dedup);
    chembl_ = deduplicate(std::move(chembl_), log_);
    evebio_ = deduplicate(std::move(evebio_), log_);
}

void PipelineRunner::run_resolve_conflicts() {
    enter(Stage::ResolveConflicts);
    chembl_ = resolve_functional_conflicts(std::move(chembl_), log_).kept;
    evebio_ = resolve_functional_conflicts(std::move(evebio_), log_).kept;
}

void PipelineRunner::run_augment() {
    enter(Stage::Augment);
    chembl_ = augment_labels(std::move(chembl_), log_);
    evebio_ = augment_labels(std::move(evebio_), log_);
}

void PipelineRunner::run_propagate() {
    enter(Stage::Propagate);
    chembl_ = propagate_binding_negatives(std::move(chembl_), log_);
    evebio_ = propagate_binding_negatives(std::move(evebio_), log_);
}

void PipelineRunner::run_reconcile() {
    enter(Stage::Reconcile);
    merged_ = reconcile_sources(std::move(chembl_), std::move(evebio_), log_);
    chembl_.clear();
    evebio_.clear();
}

void PipelineRunner::run_remove_leakage(const std::set<std::string>& dili_compounds) {
    enter(Stage::RemoveLeakage);
    merged_ = remove_leakage(std::move(merged_), dili_compounds, log_);
}

std::vector<DatasetReport> PipelineRunner::run_filter() {
    enter(Stage::FilterDatasets);
    return filter_datasets(merged_, &log_);
}

std::vector<DatasetReport> PipelineRunner::run_all(
    const std::set<std::string>& dili_compounds) {
    run_binarize();
    run_dedup();
    run_resolve_conflicts();
    run_augment();
    run_propagate();
    run_reconcile();
    run_remove_leakage(dili_compounds);
    return run_filter();
}

// ---------------------------------------------------------------------------
// IO
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
        out.back().pop_back();
    return out;
}

}  // namespace

std::vector<ActivityRecord> parse_activity_table_stream(std::istream& in,
                                                        const std::string& name) {
    std::string line;
    if (!std::getline(in, line))
        throw CurationError(name + ": empty activity table (header required)");
    const auto header = split_tabs(line);
    std::map<std::string, std::size_t> columns;
    for (std::size_t i = 0; i < header.size(); ++i) columns[header[i]] = i;
    for (const char* required :
         {"source", "target_id", "compound_id", "smiles", "endpoint", "value_nM"})
        if (!columns.count(required))
            throw CurationError(name + ": activity table missing column '" +
                                std::string(required) + "'");

    std::vector<ActivityRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        const std::string where = name + ":" + std::to_string(line_no);
        if (fields.size() < header.size())
            throw CurationError(where + ": expected " + std::to_string(header.size()) +
                                " columns, got " + std::to_string(fields.size()));
        ActivityRecord r;
        const auto source = parse_source(fields[columns["source"]]);
        if (!source)
            throw CurationError(where + ": unknown source '" + fields[columns["source"]] +
                                "' (expected chembl or evebio)");
        r.source = *source;
        r.target_id = fields[columns["target_id"]];
        r.compound_id = fields[columns["compound_id"]];
        r.smiles = fields[columns["smiles"]];
        const auto endpoint = parse_endpoint(fields[columns["endpoint"]]);
        if (!endpoint)
            throw CurationError(where + ": endpoint '" + fields[columns["endpoint"]] +
                                "' not one of IC50, EC50, Kd");
        r.endpoint = *endpoint;
        const std::string& raw_value = fields[columns["value_nM"]];
        char* end = nullptr;
        r.value_nM = std::strtod(raw_value.c_str(), &end);
        if (raw_value.empty() || end != raw_value.c_str() + raw_value.size())
            throw CurationError(where + ": value_nM '" + raw_value +
                                "' is not a plain number (units must be pre-normalized "
                                "to nM)");
        if (!(r.value_nM > 0.0))
            throw CurationError(where + ": value_nM must be positive");
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == "source" || header[i] == "target_id" ||
                header[i] == "compound_id" || header[i] == "smiles" ||
                header[i] == "endpoint" || header[i] == "value_nM")
                continue;
            if (!fields[i].empty()) r.assay_meta[header[i]] = fields[i];
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ActivityRecord> parse_activity_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CurationError("cannot open " + path);
    return parse_activity_table_stream(in, path);
}

std::map<std::string, std::string> parse_target_mapping(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CurationError("cannot open " + path);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 2)
            throw CurationError(path + ":" + std::to_string(line_no) +
                                ": expected two tab-separated columns");
        out[fields[0]] = fields[1];
    }
    return out;
}

std::set<std::string> parse_compound_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CurationError("cannot open " + path);
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto key = normalize_compound_key(line);
        if (!key.empty()) out.insert(key);
    }
    return out;
}

namespace {

std::string sanitize_filename(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                              c == '_' || c == '.'
                          ? c
                          : '_');
    return out;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

void write_report(std::ostream& out, const std::vector<DatasetReport>& reports) {
    out << "target_id\ttask\tn_total\tn_positive\tn_negative\tmajority_fraction\t"
           "accepted\trejection_reason\n";
    for (const auto& r : reports) {
        out << r.target_id << '\t' << to_string(r.task) << '\t' << r.n_total << '\t'
            << r.n_positive << '\t' << r.n_negative << '\t'
            << format_fraction(r.majority_fraction) << '\t'
            << (r.accepted ? "yes" : "no") << '\t'
            << (r.rejection_reason ? *r.rejection_reason : std::string("-")) << '\n';
    }
}

void write_provenance(std::ostream& out, const CurationLog& log) {
    for (const auto& e : log)
        out << to_string(e.stage) << '\t' << e.action << '\t' << e.target_id << '\t'
            << e.compound_id << '\t' << (e.task.empty() ? "-" : e.task) << '\t'
            << e.detail << '\n';
}

std::vector<std::string> write_outputs(const std::string& dir,
                                       const std::vector<BinaryLabelRecord>& records,
                                       const std::vector<DatasetReport>& reports,
                                       const CurationLog& log) {
    namespace fs = std::filesystem;
    // The datasets subdirectory is owned by this writer; clear stale files so
    // a rerun's directory content reflects exactly this run.
    fs::remove_all(fs::path(dir) / "datasets");
    fs::create_directories(fs::path(dir) / "datasets");

    std::map<std::pair<std::string, Task>, std::vector<const BinaryLabelRecord*>> groups;
    for (const auto& r : records) groups[{r.target_id, r.task}].push_back(&r);

    std::vector<std::string> written;
    for (const auto& rep : reports) {
        if (!rep.accepted) continue;
        auto it = groups.find({rep.target_id, rep.task});
        if (it == groups.end()) continue;
        auto rows = it->second;
        std::sort(rows.begin(), rows.end(),
                  [](const BinaryLabelRecord* a, const BinaryLabelRecord* b) {
                      return a->compound_id < b->compound_id;
                  });
        const std::string file_name = sanitize_filename(rep.target_id) + "__" +
                                      std::string(to_string(rep.task)) + ".tsv";
        std::ofstream out(fs::path(dir) / "datasets" / file_name, std::ios::binary);
        if (!out) throw CurationError("cannot write dataset file " + file_name);
        out << "target_id\tcompound_id\tsmiles\ttask\tlabel\tsources\tprovenance\n";
        for (const auto* r : rows) {
            std::vector<std::string> source_names;
            for (auto s : r->sources) source_names.emplace_back(to_string(s));
            out << r->target_id << '\t' << r->compound_id << '\t' << r->smiles << '\t'
                << to_string(r->task) << '\t' << r->label << '\t'
                << join(source_names, "+") << '\t' << join(r->provenance, " | ") << '\n';
        }
        written.push_back(file_name);
    }

    std::ofstream report_out(fs::path(dir) / "report.tsv", std::ios::binary);
    if (!report_out) throw CurationError("cannot write report.tsv");
    write_report(report_out, reports);

    std::ofstream prov_out(fs::path(dir) / "provenance.log", std::ios::binary);
    if (!prov_out) throw CurationError("cannot write provenance.log");
    write_provenance(prov_out, log);

    std::sort(written.begin(), written.end());
    return written;
}

}  // namespace dili::curation
