#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "dili/audit.hpp"
#include "test_util.hpp"

using namespace dili::audit;

namespace {

std::string key_of(int i) {
    std::string body;
    int n = i;
    for (int k = 0; k < 14; ++k) {
        body += static_cast<char>('A' + n % 26);
        n /= 26;
    }
    return body + "-AAAAAAAAAA-N";
}

SynonymTable small_table() {
    SynonymTable table;
    table.add(key_of(1), {"Sorafenib", "BAY 43-9006"});
    table.add(key_of(2), {"Pazopanib"});
    return table;
}

}  // namespace

TEST_CASE("name normalization") {
    CHECK(normalize_name("  Sorafenib ") == "sorafenib");
    CHECK(normalize_name("SORAFENIB") == "sorafenib");
    CHECK(normalize_name("bay  43-9006") == "bay 43-9006");
    CHECK(normalize_name("\"Tolcapone.\"") == "tolcapone");
    CHECK(normalize_name("") == "");
    // idempotence
    for (const char* s : {"  Mixed Case Name ", "..dots..", "a\tb\nc", "UPPER lower"}) {
        const auto once = normalize_name(s);
        CHECK(normalize_name(once) == once);
    }
}

TEST_CASE("bucket assignment") {
    const auto table = small_table();
    SUBCASE("no claim is NotRecognized") {
        CHECK(bucket({key_of(1), std::nullopt}, table) ==
              RecognitionBucket::NotRecognized);
    }
    SUBCASE("claim matching a synonym up to normalization is correct") {
        CHECK(bucket({key_of(1), "  SORAFENIB "}, table) ==
              RecognitionBucket::RecognizedCorrectly);
        CHECK(bucket({key_of(1), "bay 43-9006"}, table) ==
              RecognitionBucket::RecognizedCorrectly);
    }
    SUBCASE("a name from a different compound is incorrect") {
        // the claim is Sorafenib but the compound's synonyms are Pazopanib's
        CHECK(bucket({key_of(2), "Sorafenib"}, table) ==
              RecognitionBucket::RecognizedIncorrectly);
    }
    SUBCASE("claim for a compound missing from the table fails loudly") {
        CHECK_THROWS_AS(bucket({key_of(9), "anything"}, table), AuditError);
    }
    SUBCASE("salt suffixes are not stripped unless configured") {
        CHECK(bucket({key_of(1), "Sorafenib hydrochloride"}, table) ==
              RecognitionBucket::RecognizedIncorrectly);
        AuditOptions opts;
        opts.strip_suffixes = {"hydrochloride"};
        CHECK(bucket({key_of(1), "Sorafenib hydrochloride"}, table, opts) ==
              RecognitionBucket::RecognizedCorrectly);
    }
}

TEST_CASE("distribution on the published test-set shape") {
    const auto claims = parse_claims(testutil::fixture("claims_testset.jsonl"));
    const auto table = SynonymTable::load(testutil::fixture("synonyms_testset.jsonl"));
    REQUIRE(claims.size() == 223);

    const auto dist = bucket_distribution(claims, table);
    CHECK(dist.total == 223);
    CHECK(dist.counts[std::size_t(RecognitionBucket::NotRecognized)] == 43);
    CHECK(dist.counts[std::size_t(RecognitionBucket::RecognizedCorrectly)] == 2);
    CHECK(dist.counts[std::size_t(RecognitionBucket::RecognizedIncorrectly)] == 178);
    CHECK(dist.percentages[std::size_t(RecognitionBucket::NotRecognized)] ==
          doctest::Approx(19.3));
    CHECK(dist.percentages[std::size_t(RecognitionBucket::RecognizedCorrectly)] ==
          doctest::Approx(0.9));
    CHECK(dist.percentages[std::size_t(RecognitionBucket::RecognizedIncorrectly)] ==
          doctest::Approx(79.8));
    CHECK(dist.missing_synonyms.empty());
}

TEST_CASE("distribution edge cases") {
    const auto table = small_table();
    SUBCASE("all claims absent") {
        std::vector<RecognitionClaim> claims = {{key_of(1), std::nullopt},
                                                {key_of(2), std::nullopt}};
        auto dist = bucket_distribution(claims, table);
        CHECK(dist.counts[0] == 2);
        CHECK(dist.counts[1] == 0);
        CHECK(dist.counts[2] == 0);
    }
    SUBCASE("empty claim list") {
        auto dist = bucket_distribution({}, table);
        CHECK(dist.total == 0);
        CHECK(dist.counts == std::array<std::size_t, 3>{0, 0, 0});
    }
    SUBCASE("buckets partition the claims") {
        std::vector<RecognitionClaim> claims = {{key_of(1), "Sorafenib"},
                                                {key_of(2), "Sorafenib"},
                                                {key_of(1), std::nullopt}};
        auto dist = bucket_distribution(claims, table);
        CHECK(dist.counts[0] + dist.counts[1] + dist.counts[2] == dist.total);
        CHECK(dist.total == 3);
    }
}

TEST_CASE("per-bucket metrics") {
    SynonymTable table;
    for (int i = 1; i <= 8; ++i) table.add(key_of(i), {"name" + std::to_string(i)});

    std::vector<RecognitionClaim> claims;
    std::vector<LabeledScore> scored;
    // bucket NotRecognized: 4 compounds, separable scores
    claims.push_back({key_of(1), std::nullopt});
    scored.push_back({key_of(1), 0.9, 1});
    claims.push_back({key_of(2), std::nullopt});
    scored.push_back({key_of(2), 0.8, 1});
    claims.push_back({key_of(3), std::nullopt});
    scored.push_back({key_of(3), 0.2, 0});
    claims.push_back({key_of(4), std::nullopt});
    scored.push_back({key_of(4), 0.1, 0});
    // bucket RecognizedCorrectly: 2 compounds, single class -> ROC-AUC absent
    claims.push_back({key_of(5), "name5"});
    scored.push_back({key_of(5), 0.7, 1});
    claims.push_back({key_of(6), "name6"});
    scored.push_back({key_of(6), 0.3, 1});
    // bucket RecognizedIncorrectly: 2 compounds, both classes
    claims.push_back({key_of(7), "wrong"});
    scored.push_back({key_of(7), 0.6, 0});
    claims.push_back({key_of(8), "wrong"});
    scored.push_back({key_of(8), 0.9, 1});

    const auto result = per_bucket_metrics(claims, table, scored, 0.5);
    REQUIRE(result.rows.size() == 3);

    const auto& none = result.rows[0];
    CHECK(none.bucket == RecognitionBucket::NotRecognized);
    CHECK(none.n == 4);
    CHECK(*none.roc_auc == 1.0);

    const auto& correct = result.rows[1];
    CHECK(correct.bucket == RecognitionBucket::RecognizedCorrectly);
    CHECK(correct.n == 2);
    CHECK_FALSE(correct.roc_auc.has_value());  // single-class bucket

    const auto& wrong = result.rows[2];
    CHECK(wrong.n == 2);

    // Per-bucket confusion counts sum to the aggregate confusion.
    dili::classify::BinaryConfusion sum;
    for (const auto& row : result.rows) sum += row.confusion;
    CHECK(sum == result.aggregate.confusion);
    CHECK(result.aggregate.n == 8);
    CHECK(result.skipped.empty());
}

TEST_CASE("per-bucket metrics skip unjoinable claims") {
    const auto table = small_table();
    std::vector<RecognitionClaim> claims = {{key_of(1), "Sorafenib"},
                                            {key_of(2), std::nullopt},
                                            {key_of(7), "ghost"}};
    std::vector<LabeledScore> scored = {{key_of(1), 0.8, 1}, {key_of(2), 0.2, 0}};
    const auto result = per_bucket_metrics(claims, table, scored, 0.5);
    REQUIRE(result.skipped.size() == 1);
    CHECK(result.skipped[0] == key_of(7));
    CHECK(result.aggregate.n == 2);
}

TEST_CASE("synonym cache refresh through the HTTP fetcher") {
    httplib::Server server;
    server.Get(R"(/synonyms/(.+))", [](const httplib::Request& req, httplib::Response& res) {
        res.set_content("{\"synonyms\":[\"name for " + req.matches[1].str() + "\"]}",
                        "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpSynonymFetcher fetcher("http://127.0.0.1:" + std::to_string(port) + "/synonyms");
    const std::string cache_path = "synonym_cache_test.jsonl";
    refresh_synonym_cache(cache_path, {key_of(2), key_of(1), key_of(2)}, fetcher,
                          "2026-08-09T00:00:00Z");
    server.stop();
    thread.join();

    const auto table = SynonymTable::load(cache_path);
    CHECK(table.size() == 2);  // duplicates collapsed, sorted
    REQUIRE(table.find(key_of(1)) != nullptr);
    CHECK(table.find(key_of(1))->count(normalize_name("name for " + key_of(1))));
}
