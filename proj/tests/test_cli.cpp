#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "dili/cli.hpp"
#include "dili/model.hpp"
#include "dili/retrieval.hpp"
#include "test_util.hpp"

using namespace dili;
namespace fs = std::filesystem;

namespace {

cli::AlignEvalOptions mock_align_options(const std::string& out = "") {
    cli::AlignEvalOptions opts;
    opts.benchmark_path = testutil::fixture("benchmark_5.jsonl");
    opts.model_path = testutil::fixture("model_output_5.jsonl");
    opts.mock_judge = true;
    if (!out.empty()) opts.common.out_path = out;
    return opts;
}

}  // namespace

TEST_CASE("align-eval end to end with the mock judge") {
    const std::string out_path = "cli_align_out.json";
    auto opts = mock_align_options(out_path);
    opts.alignments_out = "cli_alignments.jsonl";

    std::ostringstream out;
    const int code = cli::cmd_align_eval(opts, out);
    CHECK(code == cli::kExitOk);
    const std::string text = out.str();

    SUBCASE("emits one row per joined compound plus the aggregate") {
        CHECK(text.find("AGGREGATE") != std::string::npos);
        std::size_t rows = 0;
        for (const auto& rec :
             parse_benchmark(opts.benchmark_path).records)
            if (text.find(rec.compound.inchikey) != std::string::npos) ++rows;
        CHECK(rows == 5);
    }
    SUBCASE("reproduces the 11-column header in order") {
        const char* expected =
            "G-Eval";  // order check below
        CHECK(text.find(expected) != std::string::npos);
        const std::vector<std::string> columns = {
            "G-Eval", "Jaccard", "Dice", "Overlap", "Fuzzy Jaccard", "Precision",
            "Recall", "F1", "Contr. Rate", "Halluc. Rate", "Miss Rate"};
        std::size_t pos = 0;
        for (const auto& c : columns) {
            const auto found = text.find(c, pos);
            REQUIRE_MESSAGE(found != std::string::npos, c);
            pos = found;
        }
    }
    SUBCASE("coverage warning for the extra model compound") {
        CHECK(text.find("absent from the benchmark; ignored") != std::string::npos);
    }
    SUBCASE("machine report carries rows, aggregate and support") {
        auto machine = nlohmann::json::parse(testutil::read_file(out_path));
        CHECK(machine["command"] == "align-eval");
        CHECK(machine["results"]["rows"].size() == 5);
        CHECK(machine["results"]["aggregate"]["geval_support"] == 5);
        CHECK(machine["results"]["aggregate"]["metrics"].contains("fuzzy_jaccard"));
        CHECK(machine["config"]["judge"]["mock"] == true);
        // exact-only compound scored 1.0 by the mock
        bool saw_perfect = false;
        for (const auto& row : machine["results"]["rows"])
            if (!row["geval"].is_null() && row["geval"] == 1.0) saw_perfect = true;
        CHECK(saw_perfect);
    }
    SUBCASE("alignment records file is parseable and tally-safe") {
        auto records = align::parse_alignment_records("cli_alignments.jsonl");
        CHECK(records.size() == 5);
        for (const auto& rec : records)
            CHECK_NOTHROW(align::tally(rec.pairs, rec.model_count, rec.reference_count));
    }
    SUBCASE("double run with identical config is byte-identical") {
        auto opts2 = mock_align_options("cli_align_rerun.json");
        std::ostringstream first;
        cli::cmd_align_eval(opts2, first);
        const auto machine_first = testutil::read_file("cli_align_rerun.json");
        std::ostringstream second;
        cli::cmd_align_eval(opts2, second);
        CHECK(first.str() == second.str());
        CHECK(machine_first == testutil::read_file("cli_align_rerun.json"));
    }
    SUBCASE("parallel jobs never change the assembled results") {
        auto opts_par = mock_align_options("cli_align_par.json");
        opts_par.common.jobs = 4;
        std::ostringstream par_out;
        cli::cmd_align_eval(opts_par, par_out);
        auto opts_seq = mock_align_options("cli_align_seq.json");
        std::ostringstream seq_out;
        cli::cmd_align_eval(opts_seq, seq_out);
        auto par = nlohmann::json::parse(testutil::read_file("cli_align_par.json"));
        auto seq = nlohmann::json::parse(testutil::read_file("cli_align_seq.json"));
        CHECK(par["results"] == seq["results"]);
        CHECK(par["warnings"] == seq["warnings"]);
    }
}

TEST_CASE("align-eval excludes benchmark compounds missing from the model file") {
    // Trim the model file to its first three records.
    const std::string trimmed = "cli_model_trimmed.jsonl";
    {
        auto parsed = parse_benchmark(testutil::fixture("model_output_5.jsonl"),
                                      {Source::Model, false});
        parsed.records.resize(3);
        write_benchmark(trimmed, parsed.records);
    }
    auto opts = mock_align_options("cli_align_trimmed.json");
    opts.model_path = trimmed;
    std::ostringstream out;
    CHECK(cli::cmd_align_eval(opts, out) == cli::kExitOk);
    CHECK(out.str().find("missing from the model file; excluded") != std::string::npos);
    auto machine = nlohmann::json::parse(testutil::read_file("cli_align_trimmed.json"));
    CHECK(machine["results"]["rows"].size() == 3);
    CHECK(machine["results"]["coverage"]["missing_from_model"].size() == 2);
}

TEST_CASE("align-eval against an unreachable judge fails with the judge exit code") {
    auto opts = mock_align_options();
    opts.mock_judge = false;
    opts.judge.endpoint = "http://127.0.0.1:1/judge";
    opts.judge.max_retries = 1;
    opts.judge.initial_backoff = std::chrono::milliseconds(1);
    std::ostringstream out;
    CHECK(cli::cmd_align_eval(opts, out) == cli::kExitJudgeError);
    CHECK(out.str().find("judge") != std::string::npos);
}

TEST_CASE("binary-eval end to end") {
    cli::BinaryEvalOptions opts;
    opts.benchmark_path = testutil::fixture("benchmark_5.jsonl");
    opts.predictions_path = testutil::fixture("predictions_5.jsonl");
    opts.common.out_path = "cli_binary_out.json";
    std::ostringstream out;
    CHECK(cli::cmd_binary_eval(opts, out) == cli::kExitOk);
    const auto text = out.str();
    CHECK(text.find("Model") != std::string::npos);
    CHECK(text.find("ROC-AUC") != std::string::npos);
    CHECK(text.find("Severity-scale confusion") != std::string::npos);

    auto machine = nlohmann::json::parse(testutil::read_file("cli_binary_out.json"));
    CHECK(machine["results"]["evaluated"] == 4);  // one benchmark compound uncovered
    CHECK(machine["results"]["coverage"]["missing_predictions"].size() == 1);
    CHECK(machine["results"]["coverage"]["extra_predictions"].size() == 1);
    CHECK(machine["results"]["scale_confusion"].is_array());
    const auto& conf = machine["results"]["confusion"];
    CHECK(conf["tp"].get<int>() + conf["fp"].get<int>() + conf["tn"].get<int>() +
              conf["fn"].get<int>() ==
          4);
    // model name defaults to the prediction file stem
    CHECK(machine["results"]["model"] == "predictions_5");
}

TEST_CASE("binary-eval with a single-class reference reports ROC-AUC absent") {
    // Build a one-class benchmark in memory.
    const std::string bench = "cli_single_class.jsonl";
    {
        auto parsed = parse_benchmark(testutil::fixture("benchmark_5.jsonl"));
        std::vector<BenchmarkRecord> only_pos;
        for (auto& rec : parsed.records)
            if (rec.compound.binary_label == 1) only_pos.push_back(rec);
        write_benchmark(bench, only_pos);
    }
    cli::BinaryEvalOptions opts;
    opts.benchmark_path = bench;
    opts.predictions_path = testutil::fixture("predictions_5.jsonl");
    opts.common.out_path = "cli_single_class_out.json";
    std::ostringstream out;
    CHECK(cli::cmd_binary_eval(opts, out) == cli::kExitOk);
    auto machine = nlohmann::json::parse(testutil::read_file("cli_single_class_out.json"));
    CHECK(machine["results"]["roc_auc"].is_null());
    CHECK(machine["results"]["roc_auc_note"].get<std::string>().find("single-class") !=
          std::string::npos);
}

TEST_CASE("retrieve command") {
    SUBCASE("energy metric emits ascending hits") {
        cli::RetrieveOptions opts;
        opts.corpus_path = testutil::fixture("embeddings_corpus.jsonl");
        opts.query_path = testutil::fixture("embeddings_query.jsonl");
        opts.k = 5;
        opts.common.out_path = "cli_retrieve_out.json";
        std::ostringstream out;
        CHECK(cli::cmd_retrieve(opts, out) == cli::kExitOk);
        auto machine = nlohmann::json::parse(testutil::read_file("cli_retrieve_out.json"));
        const auto& hits = machine["results"]["queries"][0]["hits"];
        REQUIRE(hits.size() == 5);
        for (std::size_t i = 1; i < hits.size(); ++i)
            CHECK(hits[i - 1]["distance"].get<double>() <=
                  hits[i]["distance"].get<double>());
    }
    SUBCASE("k beyond the corpus returns the full ranking") {
        cli::RetrieveOptions opts;
        opts.corpus_path = testutil::fixture("embeddings_corpus.jsonl");
        opts.query_path = testutil::fixture("embeddings_query.jsonl");
        opts.k = 999;
        std::ostringstream out;
        CHECK(cli::cmd_retrieve(opts, out) == cli::kExitOk);
        CHECK(out.str().find("mol11") != std::string::npos);
    }
    SUBCASE("tanimoto metric runs on fingerprint files") {
        cli::RetrieveOptions opts;
        opts.corpus_path = testutil::fixture("fingerprints_corpus.jsonl");
        opts.query_path = testutil::fixture("fingerprints_query.jsonl");
        opts.metric = "tanimoto";
        opts.k = 3;
        std::ostringstream out;
        CHECK(cli::cmd_retrieve(opts, out) == cli::kExitOk);
        // the query equals fp03, so the top hit is exact
        CHECK(out.str().find("fp03") != std::string::npos);
    }
    SUBCASE("cosine metric") {
        cli::RetrieveOptions opts;
        opts.corpus_path = testutil::fixture("embeddings_corpus.jsonl");
        opts.query_path = testutil::fixture("embeddings_query.jsonl");
        opts.metric = "cosine";
        opts.k = 3;
        std::ostringstream out;
        CHECK(cli::cmd_retrieve(opts, out) == cli::kExitOk);
    }
    SUBCASE("binary corpus files are auto-detected") {
        const auto entries =
            retrieval::read_embeddings(testutil::fixture("embeddings_corpus.jsonl"));
        retrieval::write_embeddings_binary("cli_corpus.bin", entries);
        cli::RetrieveOptions opts;
        opts.corpus_path = "cli_corpus.bin";
        opts.query_path = testutil::fixture("embeddings_query.jsonl");
        opts.k = 3;
        std::ostringstream bin_out;
        CHECK(cli::cmd_retrieve(opts, bin_out) == cli::kExitOk);

        cli::RetrieveOptions text_opts = opts;
        text_opts.corpus_path = testutil::fixture("embeddings_corpus.jsonl");
        std::ostringstream text_out;
        cli::cmd_retrieve(text_opts, text_out);
        // identical hits regardless of the container format
        const auto tail = [](const std::string& s) {
            return s.substr(s.find("query "));
        };
        CHECK(tail(bin_out.str()) == tail(text_out.str()));
    }
    SUBCASE("unknown metric is an input error") {
        cli::RetrieveOptions opts;
        opts.corpus_path = testutil::fixture("embeddings_corpus.jsonl");
        opts.query_path = testutil::fixture("embeddings_query.jsonl");
        opts.metric = "hamming";
        std::ostringstream out;
        CHECK_THROWS(cli::cmd_retrieve(opts, out));
    }
}

TEST_CASE("curate command end to end") {
    const std::string dir = "cli_curate_out";
    fs::remove_all(dir);
    cli::CurateOptions opts;
    opts.activity_path = testutil::fixture("activity_40.tsv");
    opts.mapping_path = testutil::fixture("target_mapping.tsv");
    opts.dili_compounds_path = testutil::fixture("dili_compounds.txt");
    opts.out_dir = dir;
    opts.common.out_path = "cli_curate_out.json";
    std::ostringstream out;
    CHECK(cli::cmd_curate(opts, out) == cli::kExitOk);
    CHECK(fs::exists(fs::path(dir) / "report.tsv"));
    CHECK(fs::exists(fs::path(dir) / "provenance.log"));
    auto machine = nlohmann::json::parse(testutil::read_file("cli_curate_out.json"));
    CHECK(machine["results"]["reports"].size() == 6);
    CHECK(machine["results"]["records_in"] == 40);
    CHECK(machine["results"]["dataset_files"].empty());
}

TEST_CASE("audit command end to end") {
    cli::AuditCmdOptions opts;
    opts.claims_path = testutil::fixture("claims_testset.jsonl");
    opts.synonyms_path = testutil::fixture("synonyms_testset.jsonl");
    opts.predictions_path = testutil::fixture("predictions_testset.jsonl");
    opts.benchmark_path = testutil::fixture("benchmark_testset.jsonl");
    opts.common.out_path = "cli_audit_out.json";
    std::ostringstream out;
    CHECK(cli::cmd_audit(opts, out) == cli::kExitOk);
    const auto text = out.str();
    CHECK(text.find("19.3") != std::string::npos);
    CHECK(text.find("0.9") != std::string::npos);
    CHECK(text.find("79.8") != std::string::npos);
    CHECK(text.find("Aggregate") != std::string::npos);

    auto machine = nlohmann::json::parse(testutil::read_file("cli_audit_out.json"));
    const auto& buckets = machine["results"]["distribution"]["buckets"];
    CHECK(buckets[0]["n"] == 43);
    CHECK(buckets[1]["n"] == 2);
    CHECK(buckets[2]["n"] == 178);
    // single-class bucket shows no ROC-AUC
    for (const auto& row : machine["results"]["per_bucket"])
        if (row["bucket"] == "Recognized Correctly") CHECK(row["roc_auc"].is_null());
}

TEST_CASE("input errors map to the input exit code") {
    cli::BinaryEvalOptions opts;
    opts.benchmark_path = "does_not_exist.jsonl";
    opts.predictions_path = testutil::fixture("predictions_5.jsonl");
    std::ostringstream out;
    int code = cli::kExitOk;
    try {
        cli::cmd_binary_eval(opts, out);
    } catch (...) {
        std::ostringstream err;
        code = cli::exit_code_for_current_exception(err);
        CHECK(err.str().find("does_not_exist") != std::string::npos);
    }
    CHECK(code == cli::kExitInputError);
}
