#include "dili/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>

#include <json.hpp>

#include "dili/alignment.hpp"
#include "dili/audit.hpp"
#include "dili/classification.hpp"
#include "dili/curation.hpp"
#include "dili/model.hpp"
#include "dili/parallel.hpp"
#include "dili/report.hpp"
#include "dili/retrieval.hpp"

namespace dili::cli {

using nlohmann::ordered_json;

namespace {

ordered_json opt_json(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json input_entry(const std::string& path) {
    ordered_json j;
    j["path"] = path;
    j["fnv1a64"] = report::file_digest(path);
    return j;
}

ordered_json make_header(const std::string& command, ordered_json config,
                         const std::vector<std::string>& inputs) {
    ordered_json j;
    j["tool"] = report::kToolName;
    j["version"] = report::kToolVersion;
    j["command"] = command;
    j["config"] = std::move(config);
    auto arr = ordered_json::array();
    for (const auto& p : inputs) arr.push_back(input_entry(p));
    j["inputs"] = std::move(arr);
    return j;
}

void emit_header(std::ostream& out, const ordered_json& header) {
    out << header["tool"].get<std::string>() << " " << header["version"].get<std::string>()
        << " | " << header["command"].get<std::string>() << "\n";
    out << "config: " << header["config"].dump() << "\n";
    for (const auto& input : header["inputs"])
        out << "input: " << input["path"].get<std::string>() << " (fnv1a64 "
            << input["fnv1a64"].get<std::string>() << ")\n";
    out << "\n";
}

void emit_warnings(std::ostream& out, const std::vector<std::string>& warnings) {
    if (warnings.empty()) return;
    out << "warnings:\n";
    for (const auto& w : warnings) out << "  - " << w << "\n";
    out << "\n";
}

void write_machine_report(const CommonOptions& common, const ordered_json& report) {
    if (!common.out_path) return;
    std::ofstream out(*common.out_path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + *common.out_path);
    out << report.dump(2) << '\n';
}

ordered_json common_config(const CommonOptions& common) {
    ordered_json j;
    j["jobs"] = common.jobs;
    j["seed"] = common.seed;
    j["out"] = common.out_path ? ordered_json(*common.out_path) : ordered_json(nullptr);
    return j;
}

ordered_json judge_config_json(const judge::JudgeConfig& cfg, bool mock) {
    ordered_json j;
    j["mock"] = mock;
    j["endpoint"] = cfg.endpoint;
    j["model_name"] = cfg.model_name;
    j["temperature"] = cfg.temperature;
    j["geval_threshold"] = cfg.geval_threshold;
    j["max_parallel"] = cfg.max_parallel;
    j["timeout_ms"] = cfg.timeout.count();
    j["max_retries"] = cfg.max_retries;
    j["initial_backoff_ms"] = cfg.initial_backoff.count();
    j["auth_header"] = cfg.auth_header;  // credential value never echoed
    return j;
}

ordered_json metrics_json(const align::AlignmentMetrics& m) {
    ordered_json j;
    for (std::size_t i = 0; i < align::kMetricCount; ++i)
        j[std::string(align::metric_name(static_cast<align::MetricId>(i)))] =
            opt_json(m.values[i]);
    return j;
}

ordered_json tally_json(const align::TallyResult& t) {
    ordered_json j;
    j["exact"] = t.tally.exact;
    j["partial"] = t.tally.partial;
    j["model_only"] = t.tally.model_only;
    j["reference_only"] = t.tally.reference_only;
    j["contradiction"] = t.tally.contradiction;
    j["model_count"] = t.tally.model_count;
    j["reference_count"] = t.tally.reference_count;
    j["total_pairs"] = t.tally.total_pairs;
    j["min_count"] = t.tally.min_count;
    j["partial_weight"] = t.tally.partial_weight;
    j["auto_added_model_only"] = t.auto_added_model_only;
    j["auto_added_reference_only"] = t.auto_added_reference_only;
    return j;
}

const std::vector<std::string>& alignment_report_columns() {
    static const std::vector<std::string> columns = {
        "G-Eval",    "Jaccard", "Dice", "Overlap",     "Fuzzy Jaccard", "Precision",
        "Recall",    "F1",      "Contr. Rate", "Halluc. Rate", "Miss Rate"};
    return columns;
}

std::vector<std::string> metric_cells(const std::optional<double>& geval,
                                      const align::AlignmentMetrics& m) {
    std::vector<std::string> cells;
    cells.push_back(report::format_metric(geval));
    for (std::size_t i = 0; i < align::kMetricCount; ++i)
        cells.push_back(report::format_metric(m.values[i]));
    return cells;
}

std::string file_stem(const std::string& path) {
    const auto slash = path.find_last_of("/\\");
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    const auto dot = name.find_last_of('.');
    return dot == std::string::npos || dot == 0 ? name : name.substr(0, dot);
}

}  // namespace

// ---------------------------------------------------------------------------
// align-eval
// ---------------------------------------------------------------------------

namespace {

struct AlignRow {
    std::string inchikey;
    std::optional<double> geval;
    bool geval_pass = false;
    std::optional<align::AlignmentMetrics> metrics;
    std::optional<align::TallyResult> tally;
    std::vector<align::PairAlignment> pairs;
    std::vector<std::string> warnings;
    std::optional<std::string> pairwise_error;
    std::optional<std::string> geval_error;
};

}  // namespace

int cmd_align_eval(const AlignEvalOptions& opts, std::ostream& out) {
    auto benchmark = parse_benchmark(opts.benchmark_path, {Source::Reference, true});
    auto model = parse_benchmark(opts.model_path, {Source::Model, opts.strict});

    std::vector<std::string> warnings = benchmark.warnings;
    warnings.insert(warnings.end(), model.warnings.begin(), model.warnings.end());

    std::map<std::string, const BenchmarkRecord*> model_by_key;
    for (const auto& rec : model.records) model_by_key[rec.compound.inchikey] = &rec;

    struct Joined {
        const BenchmarkRecord* reference;
        const BenchmarkRecord* model;
    };
    std::vector<Joined> joined;
    std::vector<std::string> missing_from_model;
    for (const auto& rec : benchmark.records) {
        auto it = model_by_key.find(rec.compound.inchikey);
        if (it == model_by_key.end()) {
            missing_from_model.push_back(rec.compound.inchikey);
            continue;
        }
        joined.push_back({&rec, it->second});
    }
    std::sort(joined.begin(), joined.end(),
              [](const Joined& a, const Joined& b) {
                  return a.reference->compound.inchikey < b.reference->compound.inchikey;
              });

    std::set<std::string> benchmark_keys;
    for (const auto& rec : benchmark.records) benchmark_keys.insert(rec.compound.inchikey);
    std::vector<std::string> extra_in_model;
    for (const auto& rec : model.records)
        if (!benchmark_keys.count(rec.compound.inchikey))
            extra_in_model.push_back(rec.compound.inchikey);

    for (const auto& key : missing_from_model)
        warnings.push_back("coverage: benchmark compound " + key +
                           " missing from the model file; excluded");
    for (const auto& key : extra_in_model)
        warnings.push_back("coverage: model compound " + key +
                           " absent from the benchmark; ignored");

    std::unique_ptr<judge::Judge> judge_impl;
    if (opts.mock_judge)
        judge_impl = std::make_unique<judge::MockJudge>();
    else
        judge_impl = std::make_unique<judge::HttpJudge>(opts.judge);

    std::vector<AlignRow> rows(joined.size());
    const std::size_t jobs =
        std::max<std::size_t>(1, std::min(opts.common.jobs, opts.judge.max_parallel));
    parallel_for(joined.size(), jobs, [&](std::size_t i) {
        const auto& ref_rec = *joined[i].reference;
        const auto& model_rec = *joined[i].model;
        AlignRow& row = rows[i];
        row.inchikey = ref_rec.compound.inchikey;
        try {
            auto pw = judge_impl->pairwise(ref_rec.compound, model_rec.hypotheses,
                                           ref_rec.hypotheses);
            row.pairs = pw.resolved_pairs;
            row.warnings.insert(row.warnings.end(), pw.warnings.begin(),
                                pw.warnings.end());
            auto tally = align::tally(pw.resolved_pairs,
                                      model_rec.hypotheses.hypotheses.size(),
                                      ref_rec.hypotheses.hypotheses.size(),
                                      opts.partial_weight);
            row.metrics = align::compute_metrics(tally.tally);
            row.tally = tally;
        } catch (const judge::JudgeError& e) {
            row.pairwise_error = std::string(judge::to_string(e.code())) + ": " + e.what();
        }
        try {
            const auto geval_case = judge::render_geval_case(
                ref_rec.compound, model_rec.hypotheses, ref_rec.hypotheses);
            const auto result = judge::run_geval(geval_case, opts.judge, *judge_impl);
            row.geval = result.score;
            row.geval_pass = result.pass;
        } catch (const judge::JudgeError& e) {
            row.geval_error = std::string(judge::to_string(e.code())) + ": " + e.what();
        }
    });

    // Benchmark-level macro averages; per-field support counts are reported.
    std::vector<align::AlignmentMetrics> per_compound;
    per_compound.reserve(rows.size());
    for (const auto& row : rows)
        per_compound.push_back(row.metrics ? *row.metrics : align::AlignmentMetrics{});
    std::optional<align::AggregateMetrics> agg;
    if (!per_compound.empty()) agg = align::aggregate(per_compound);

    double geval_sum = 0.0;
    std::size_t geval_support = 0;
    for (const auto& row : rows)
        if (row.geval) {
            geval_sum += *row.geval;
            ++geval_support;
        }
    std::optional<double> geval_mean;
    if (geval_support > 0) geval_mean = geval_sum / static_cast<double>(geval_support);

    ordered_json config = common_config(opts.common);
    config["benchmark"] = opts.benchmark_path;
    config["model_output"] = opts.model_path;
    config["partial_weight"] = opts.partial_weight;
    config["strict"] = opts.strict;
    config["judge"] = judge_config_json(opts.judge, opts.mock_judge);
    config["alignments_out"] = opts.alignments_out ? ordered_json(*opts.alignments_out)
                                                   : ordered_json(nullptr);
    auto header =
        make_header("align-eval", std::move(config), {opts.benchmark_path, opts.model_path});

    emit_header(out, header);
    std::vector<std::string> columns = {"Compound"};
    for (const auto& c : alignment_report_columns()) columns.push_back(c);
    report::TextTable table(columns);
    for (const auto& row : rows) {
        std::vector<std::string> cells = {row.inchikey};
        const auto metric_strings =
            metric_cells(row.geval, row.metrics ? *row.metrics : align::AlignmentMetrics{});
        cells.insert(cells.end(), metric_strings.begin(), metric_strings.end());
        table.add_row(std::move(cells));
    }
    if (agg) {
        std::vector<std::string> cells = {"AGGREGATE"};
        const auto metric_strings = metric_cells(geval_mean, agg->mean);
        cells.insert(cells.end(), metric_strings.begin(), metric_strings.end());
        table.add_row(std::move(cells));
    }
    out << table.str() << "\n";

    for (const auto& row : rows) {
        if (row.pairwise_error)
            warnings.push_back(row.inchikey + ": pairwise judge failed (" +
                               *row.pairwise_error + ")");
        if (row.geval_error)
            warnings.push_back(row.inchikey + ": G-Eval failed (" + *row.geval_error + ")");
        for (const auto& w : row.warnings) warnings.push_back(row.inchikey + ": " + w);
    }
    emit_warnings(out, warnings);

    ordered_json machine = header;
    machine["warnings"] = warnings;
    auto results = ordered_json::object();
    auto row_array = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json rj;
        rj["inchikey"] = row.inchikey;
        rj["geval"] = opt_json(row.geval);
        rj["geval_pass"] = row.geval ? ordered_json(row.geval_pass) : ordered_json(nullptr);
        rj["metrics"] =
            row.metrics ? metrics_json(*row.metrics) : ordered_json(nullptr);
        rj["tally"] = row.tally ? tally_json(*row.tally) : ordered_json(nullptr);
        if (row.pairwise_error) rj["pairwise_error"] = *row.pairwise_error;
        if (row.geval_error) rj["geval_error"] = *row.geval_error;
        row_array.push_back(std::move(rj));
    }
    results["rows"] = std::move(row_array);
    if (agg) {
        ordered_json aj;
        aj["geval"] = opt_json(geval_mean);
        aj["geval_support"] = geval_support;
        aj["metrics"] = metrics_json(agg->mean);
        ordered_json support;
        for (std::size_t i = 0; i < align::kMetricCount; ++i)
            support[std::string(align::metric_name(static_cast<align::MetricId>(i)))] =
                agg->support[i];
        aj["support"] = std::move(support);
        results["aggregate"] = std::move(aj);
    } else {
        results["aggregate"] = nullptr;
    }
    ordered_json coverage;
    coverage["missing_from_model"] = missing_from_model;
    coverage["extra_in_model"] = extra_in_model;
    results["coverage"] = std::move(coverage);
    machine["results"] = std::move(results);
    write_machine_report(opts.common, machine);

    if (opts.alignments_out) {
        std::vector<align::AlignmentRecord> records;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            align::AlignmentRecord rec;
            rec.inchikey = rows[i].inchikey;
            rec.model_count = joined[i].model->hypotheses.hypotheses.size();
            rec.reference_count = joined[i].reference->hypotheses.hypotheses.size();
            rec.pairs = rows[i].pairs;
            records.push_back(std::move(rec));
        }
        std::ofstream align_out(*opts.alignments_out, std::ios::binary);
        if (!align_out) throw ParseError("cannot write " + *opts.alignments_out);
        align::write_alignment_records(align_out, records);
    }

    const bool all_failed =
        !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const AlignRow& r) {
            return r.pairwise_error && r.geval_error;
        });
    return all_failed ? kExitJudgeError : kExitOk;
}

// ---------------------------------------------------------------------------
// binary-eval
// ---------------------------------------------------------------------------

int cmd_binary_eval(const BinaryEvalOptions& opts, std::ostream& out) {
    auto benchmark = parse_benchmark(opts.benchmark_path, {Source::Reference, true});
    auto predictions = parse_predictions(opts.predictions_path);

    std::vector<std::string> warnings = benchmark.warnings;
    warnings.insert(warnings.end(), predictions.warnings.begin(),
                    predictions.warnings.end());

    std::map<std::string, const PredictionRecord*> pred_by_key;
    for (const auto& p : predictions.records) {
        if (!pred_by_key.emplace(p.inchikey, &p).second)
            warnings.push_back("duplicate prediction for " + p.inchikey +
                               "; keeping the first");
    }

    struct Joined {
        const Compound* compound;
        const PredictionRecord* prediction;
        double score;
    };
    std::vector<Joined> joined;
    std::vector<std::string> missing_predictions;
    for (const auto& rec : benchmark.records) {
        auto it = pred_by_key.find(rec.compound.inchikey);
        if (it == pred_by_key.end()) {
            missing_predictions.push_back(rec.compound.inchikey);
            continue;
        }
        const auto& pred = *it->second;
        const double score =
            pred.score ? *pred.score : severity_score(*pred.severity);
        joined.push_back({&rec.compound, &pred, score});
    }
    std::sort(joined.begin(), joined.end(), [](const Joined& a, const Joined& b) {
        return a.compound->inchikey < b.compound->inchikey;
    });

    std::set<std::string> benchmark_keys;
    for (const auto& rec : benchmark.records) benchmark_keys.insert(rec.compound.inchikey);
    std::vector<std::string> extra_predictions;
    for (const auto& p : predictions.records)
        if (!benchmark_keys.count(p.inchikey)) extra_predictions.push_back(p.inchikey);

    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& j : joined) {
        scores.push_back(j.score);
        labels.push_back(j.compound->binary_label);
    }

    std::optional<double> auc;
    std::optional<std::string> auc_note;
    try {
        auc = classify::roc_auc(scores, labels);
    } catch (const classify::MetricError& e) {
        auc_note = e.what();
        warnings.push_back(std::string("ROC-AUC unavailable: ") + e.what());
    }
    const auto confusion = classify::confusion_from_scores(scores, labels, opts.threshold);
    const auto metrics = classify::binary_metrics(confusion);
    if (metrics.mcc_degenerate)
        warnings.push_back("MCC degenerate (a confusion margin is zero); reported as 0");

    // 5x5 severity confusion over the joined compounds carrying severities on
    // both sides.
    std::vector<std::pair<std::string, SeverityLabel>> severity_refs;
    std::vector<PredictionRecord> severity_preds;
    for (const auto& j : joined) {
        if (!j.compound->severity || !j.prediction->severity) continue;
        severity_refs.emplace_back(j.compound->inchikey, *j.compound->severity);
        severity_preds.push_back(*j.prediction);
    }
    std::optional<classify::ScaleConfusionResult> scale;
    if (!severity_refs.empty())
        scale = classify::scale_confusion(severity_preds, severity_refs);

    const std::string model_name =
        opts.model_name.empty() ? file_stem(opts.predictions_path) : opts.model_name;

    ordered_json config = common_config(opts.common);
    config["benchmark"] = opts.benchmark_path;
    config["predictions"] = opts.predictions_path;
    config["threshold"] = opts.threshold;
    config["model_name"] = model_name;
    auto header = make_header("binary-eval", std::move(config),
                              {opts.benchmark_path, opts.predictions_path});

    emit_header(out, header);
    report::TextTable table({"Model", "ROC-AUC", "Bal Acc", "MCC", "Sensitivity",
                             "Specificity", "F1"});
    table.add_row({model_name, report::format_metric(auc),
                   report::format_metric(metrics.balanced_accuracy),
                   report::format_metric(metrics.mcc),
                   report::format_metric(metrics.sensitivity),
                   report::format_metric(metrics.specificity),
                   report::format_metric(metrics.f1)});
    out << table.str() << "\n";
    out << "evaluated " << joined.size() << " of " << benchmark.records.size()
        << " benchmark compounds (threshold " << report::format_metric(opts.threshold, 2)
        << ", score >= threshold counts positive)\n\n";

    out << "Binary confusion (rows: reference 1/0, columns: predicted 1/0):\n";
    out << "  " << confusion.tp << "  " << confusion.fn << "\n";
    out << "  " << confusion.fp << "  " << confusion.tn << "\n\n";

    if (scale) {
        out << "Severity-scale confusion (rows: reference A..E, columns: predicted A..E):\n";
        for (std::size_t r = 0; r < 5; ++r) {
            out << " ";
            for (std::size_t c = 0; c < 5; ++c)
                out << " " << scale->confusion.matrix[r][c];
            out << "\n";
        }
        out << "\n";
    }
    emit_warnings(out, warnings);

    ordered_json machine = header;
    machine["warnings"] = warnings;
    ordered_json results;
    results["model"] = model_name;
    results["evaluated"] = joined.size();
    results["roc_auc"] = opt_json(auc);
    if (auc_note) results["roc_auc_note"] = *auc_note;
    results["balanced_accuracy"] = opt_json(metrics.balanced_accuracy);
    results["mcc"] = metrics.mcc;
    results["mcc_degenerate"] = metrics.mcc_degenerate;
    results["sensitivity"] = opt_json(metrics.sensitivity);
    results["specificity"] = opt_json(metrics.specificity);
    results["f1"] = opt_json(metrics.f1);
    ordered_json cj;
    cj["tp"] = confusion.tp;
    cj["fp"] = confusion.fp;
    cj["tn"] = confusion.tn;
    cj["fn"] = confusion.fn;
    results["confusion"] = std::move(cj);
    if (scale) {
        auto mj = ordered_json::array();
        for (const auto& row : scale->confusion.matrix) {
            auto rj = ordered_json::array();
            for (auto v : row) rj.push_back(v);
            mj.push_back(std::move(rj));
        }
        results["scale_confusion"] = std::move(mj);
        results["scale_missing_predictions"] = scale->missing_predictions;
        results["scale_extra_predictions"] = scale->extra_predictions;
    } else {
        results["scale_confusion"] = nullptr;
    }
    ordered_json coverage;
    coverage["missing_predictions"] = missing_predictions;
    coverage["extra_predictions"] = extra_predictions;
    results["coverage"] = std::move(coverage);
    machine["results"] = std::move(results);
    write_machine_report(opts.common, machine);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// retrieve
// ---------------------------------------------------------------------------

int cmd_retrieve(const RetrieveOptions& opts, std::ostream& out) {
    if (opts.metric != "energy" && opts.metric != "cosine" && opts.metric != "tanimoto")
        throw retrieval::RetrievalError("unknown metric '" + opts.metric +
                                        "' (expected energy, cosine or tanimoto)");

    struct QueryResult {
        std::string query_id;
        std::vector<retrieval::RetrievalHit> hits;
    };
    std::vector<QueryResult> results;

    if (opts.metric == "tanimoto") {
        const auto corpus = retrieval::read_fingerprints(opts.corpus_path);
        const auto queries = retrieval::read_fingerprints(opts.query_path);
        for (const auto& q : queries)
            results.push_back({q.id, retrieval::baseline_tanimoto(q, corpus, opts.k)});
    } else {
        const auto corpus_entries = retrieval::read_embeddings(opts.corpus_path);
        const auto queries = retrieval::read_embeddings(opts.query_path);
        if (opts.metric == "cosine") {
            for (const auto& q : queries)
                results.push_back({q.id, retrieval::baseline_cosine(q, corpus_entries, opts.k)});
        } else {
            retrieval::DistanceParams params{opts.p, !opts.u_statistic};
            retrieval::Corpus corpus(corpus_entries, params);
            for (const auto& q : queries)
                results.push_back({q.id, corpus.top_k(q, opts.k, opts.common.jobs)});
        }
    }

    ordered_json config = common_config(opts.common);
    config["corpus"] = opts.corpus_path;
    config["query"] = opts.query_path;
    config["k"] = opts.k;
    config["p"] = opts.p;
    config["metric"] = opts.metric;
    config["u_statistic"] = opts.u_statistic;
    auto header =
        make_header("retrieve", std::move(config), {opts.corpus_path, opts.query_path});

    emit_header(out, header);
    for (const auto& result : results) {
        out << "query " << result.query_id << "\n";
        report::TextTable table({"rank", "id", "label", "distance"});
        std::size_t rank = 1;
        for (const auto& hit : result.hits) {
            table.add_row({std::to_string(rank++), hit.id,
                           hit.label ? std::to_string(*hit.label) : std::string("-"),
                           report::format_metric(hit.distance, 6)});
        }
        out << table.str() << "\n";
    }

    ordered_json machine = header;
    machine["warnings"] = ordered_json::array();
    auto result_array = ordered_json::array();
    for (const auto& result : results) {
        ordered_json rj;
        rj["query"] = result.query_id;
        auto hits = ordered_json::array();
        std::size_t rank = 1;
        for (const auto& hit : result.hits) {
            ordered_json hj;
            hj["rank"] = rank++;
            hj["id"] = hit.id;
            hj["label"] = hit.label ? ordered_json(*hit.label) : ordered_json(nullptr);
            hj["distance"] = hit.distance;
            hits.push_back(std::move(hj));
        }
        rj["hits"] = std::move(hits);
        result_array.push_back(std::move(rj));
    }
    ordered_json res;
    res["queries"] = std::move(result_array);
    machine["results"] = std::move(res);
    write_machine_report(opts.common, machine);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// curate
// ---------------------------------------------------------------------------

int cmd_curate(const CurateOptions& opts, std::ostream& out) {
    const auto activities = curation::parse_activity_table(opts.activity_path);
    std::map<std::string, std::string> mapping;
    if (opts.mapping_path) mapping = curation::parse_target_mapping(*opts.mapping_path);
    const auto dili = curation::parse_compound_list(opts.dili_compounds_path);

    curation::PipelineRunner runner(activities, mapping, {opts.threshold_nM});
    const auto reports = runner.run_all(dili);
    const auto files =
        curation::write_outputs(opts.out_dir, runner.records(), reports, runner.log());

    ordered_json config = common_config(opts.common);
    config["activity"] = opts.activity_path;
    config["mapping"] =
        opts.mapping_path ? ordered_json(*opts.mapping_path) : ordered_json(nullptr);
    config["dili_compounds"] = opts.dili_compounds_path;
    config["out_dir"] = opts.out_dir;
    config["threshold_nM"] = opts.threshold_nM;
    std::vector<std::string> inputs = {opts.activity_path};
    if (opts.mapping_path) inputs.push_back(*opts.mapping_path);
    inputs.push_back(opts.dili_compounds_path);
    auto header = make_header("curate", std::move(config), inputs);

    emit_header(out, header);
    report::TextTable table({"target", "task", "total", "pos", "neg", "majority",
                             "accepted", "reason"});
    for (const auto& r : reports) {
        table.add_row({r.target_id, std::string(curation::to_string(r.task)),
                       std::to_string(r.n_total), std::to_string(r.n_positive),
                       std::to_string(r.n_negative),
                       report::format_metric(r.majority_fraction, 4),
                       r.accepted ? "yes" : "no",
                       r.rejection_reason ? *r.rejection_reason : std::string("-")});
    }
    out << table.str() << "\n";
    out << activities.size() << " activity records in, " << runner.records().size()
        << " curated records out, " << runner.log().size() << " provenance events, "
        << files.size() << " accepted dataset files\n\n";

    ordered_json machine = header;
    machine["warnings"] = ordered_json::array();
    ordered_json results;
    auto report_array = ordered_json::array();
    for (const auto& r : reports) {
        ordered_json rj;
        rj["target_id"] = r.target_id;
        rj["task"] = std::string(curation::to_string(r.task));
        rj["n_total"] = r.n_total;
        rj["n_positive"] = r.n_positive;
        rj["n_negative"] = r.n_negative;
        rj["majority_fraction"] = r.majority_fraction;
        rj["accepted"] = r.accepted;
        rj["rejection_reason"] = r.rejection_reason ? ordered_json(*r.rejection_reason)
                                                    : ordered_json(nullptr);
        report_array.push_back(std::move(rj));
    }
    results["reports"] = std::move(report_array);
    results["dataset_files"] = files;
    results["records_in"] = activities.size();
    results["records_out"] = runner.records().size();
    results["log_events"] = runner.log().size();
    machine["results"] = std::move(results);
    write_machine_report(opts.common, machine);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

int cmd_audit(const AuditCmdOptions& opts, std::ostream& out) {
    const auto claims = audit::parse_claims(opts.claims_path);
    const auto table = audit::SynonymTable::load(opts.synonyms_path);
    const auto predictions = parse_predictions(opts.predictions_path);
    const auto benchmark = parse_benchmark(opts.benchmark_path, {Source::Reference, true});

    std::vector<std::string> warnings = predictions.warnings;
    warnings.insert(warnings.end(), benchmark.warnings.begin(), benchmark.warnings.end());

    std::map<std::string, double> score_by_key;
    for (const auto& p : predictions.records)
        score_by_key.emplace(p.inchikey,
                             p.score ? *p.score : severity_score(*p.severity));
    std::map<std::string, int> label_by_key;
    for (const auto& rec : benchmark.records)
        label_by_key.emplace(rec.compound.inchikey, rec.compound.binary_label);

    std::vector<audit::LabeledScore> scored;
    std::vector<std::string> unjoinable;
    for (const auto& claim : claims) {
        auto score = score_by_key.find(claim.inchikey);
        auto label = label_by_key.find(claim.inchikey);
        if (score == score_by_key.end() || label == label_by_key.end()) {
            unjoinable.push_back(claim.inchikey);
            continue;
        }
        scored.push_back({claim.inchikey, score->second, label->second});
    }
    for (const auto& key : unjoinable)
        warnings.push_back("claim " + key +
                           " lacks a prediction or benchmark entry; excluded from "
                           "per-bucket metrics");

    const auto dist = audit::bucket_distribution(claims, table);
    for (const auto& key : dist.missing_synonyms)
        warnings.push_back("claim " + key + " has no synonym-table entry; excluded");
    const auto pbm = audit::per_bucket_metrics(claims, table, scored, opts.threshold);

    ordered_json config = common_config(opts.common);
    config["claims"] = opts.claims_path;
    config["synonyms"] = opts.synonyms_path;
    config["predictions"] = opts.predictions_path;
    config["benchmark"] = opts.benchmark_path;
    config["threshold"] = opts.threshold;
    auto header = make_header("audit", std::move(config),
                              {opts.claims_path, opts.synonyms_path,
                               opts.predictions_path, opts.benchmark_path});

    emit_header(out, header);
    report::TextTable dist_table({"Bucket", "n", "%"});
    for (std::size_t i = 0; i < audit::kBucketCount; ++i) {
        dist_table.add_row(
            {std::string(audit::to_string(static_cast<audit::RecognitionBucket>(i))),
             std::to_string(dist.counts[i]), report::format_pct1(dist.percentages[i])});
    }
    dist_table.add_row({"Total", std::to_string(dist.total), dist.total ? "100.0" : "0.0"});
    out << dist_table.str() << "\n";

    report::TextTable metric_table({"Bucket", "n", "ROC-AUC", "Bal Acc", "MCC",
                                    "Sensitivity", "Specificity", "F1"});
    auto metric_row = [&](const std::string& name, const audit::BucketMetricsRow& row) {
        metric_table.add_row({name, std::to_string(row.n),
                              report::format_metric(row.roc_auc),
                              report::format_metric(row.metrics.balanced_accuracy),
                              report::format_metric(row.metrics.mcc),
                              report::format_metric(row.metrics.sensitivity),
                              report::format_metric(row.metrics.specificity),
                              report::format_metric(row.metrics.f1)});
    };
    metric_row("Aggregate", pbm.aggregate);
    for (const auto& row : pbm.rows)
        metric_row(std::string(audit::to_string(row.bucket)), row);
    out << metric_table.str() << "\n";
    emit_warnings(out, warnings);

    ordered_json machine = header;
    machine["warnings"] = warnings;
    ordered_json results;
    ordered_json dj;
    auto bucket_names = ordered_json::array();
    for (std::size_t i = 0; i < audit::kBucketCount; ++i) {
        ordered_json bj;
        bj["bucket"] =
            std::string(audit::to_string(static_cast<audit::RecognitionBucket>(i)));
        bj["n"] = dist.counts[i];
        bj["pct"] = dist.percentages[i];
        bucket_names.push_back(std::move(bj));
    }
    dj["buckets"] = std::move(bucket_names);
    dj["total"] = dist.total;
    results["distribution"] = std::move(dj);

    auto row_json = [&](const audit::BucketMetricsRow& row) {
        ordered_json rj;
        rj["n"] = row.n;
        rj["roc_auc"] = opt_json(row.roc_auc);
        rj["balanced_accuracy"] = opt_json(row.metrics.balanced_accuracy);
        rj["mcc"] = row.metrics.mcc;
        rj["sensitivity"] = opt_json(row.metrics.sensitivity);
        rj["specificity"] = opt_json(row.metrics.specificity);
        rj["f1"] = opt_json(row.metrics.f1);
        ordered_json cj;
        cj["tp"] = row.confusion.tp;
        cj["fp"] = row.confusion.fp;
        cj["tn"] = row.confusion.tn;
        cj["fn"] = row.confusion.fn;
        rj["confusion"] = std::move(cj);
        return rj;
    };
    auto rows_json = ordered_json::array();
    for (const auto& row : pbm.rows) {
        auto rj = row_json(row);
        rj["bucket"] = std::string(audit::to_string(row.bucket));
        rows_json.push_back(std::move(rj));
    }
    results["per_bucket"] = std::move(rows_json);
    results["aggregate"] = row_json(pbm.aggregate);
    results["skipped"] = pbm.skipped;
    machine["results"] = std::move(results);
    write_machine_report(opts.common, machine);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// Exit-code mapping
// ---------------------------------------------------------------------------

int exit_code_for_current_exception(std::ostream& err) {
    try {
        throw;
    } catch (const judge::JudgeError& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == judge::JudgeErrorCode::BadRequest ? kExitInputError
                                                             : kExitJudgeError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const curation::CurationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const audit::AuditError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const retrieval::RetrievalError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const classify::MetricError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const align::TallyError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternalError;
    } catch (...) {
        err << "internal error: unknown exception\n";
        return kExitInternalError;
    }
}

}  // namespace dili::cli
