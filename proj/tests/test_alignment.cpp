#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dili/alignment.hpp"

using namespace dili::align;

namespace {

// Independent direct-formula oracle, kept deliberately separate from the
// implementation path it checks.
struct Oracle {
    double E, P, HO, DO, C, H, D, U, M, wp;

    explicit Oracle(const AlignmentTally& t)
        : E(double(t.exact)), P(double(t.partial)), HO(double(t.model_only)),
          DO(double(t.reference_only)), C(double(t.contradiction)),
          H(double(t.model_count)), D(double(t.reference_count)),
          U(double(t.total_pairs)), M(double(t.min_count)), wp(t.partial_weight) {}

    static std::optional<double> div(double num, double den) {
        if (den == 0.0) return std::nullopt;
        return num / den;
    }
    std::optional<double> jaccard() const { return div(E, U); }
    std::optional<double> dice() const { return div(2 * E, H + D); }
    std::optional<double> overlap() const { return div(E, M); }
    std::optional<double> fuzzy() const {
        const double soft = E + wp * P;
        return div(soft, (H + D) - soft);
    }
    std::optional<double> precision() const { return div(E + wp * P, E + P + HO + C); }
    std::optional<double> recall() const { return div(E + wp * P, E + P + DO + C); }
    std::optional<double> f1() const {
        auto p = precision();
        auto r = recall();
        if (!p || !r || *p + *r == 0.0) return std::nullopt;
        return 2 * *p * *r / (*p + *r);
    }
    std::optional<double> contradiction_rate() const { return div(C, U); }
    std::optional<double> hallucination_rate() const { return div(HO, H); }
    std::optional<double> miss_rate() const { return div(DO, D); }
};

void check_close(const std::optional<double>& got, const std::optional<double>& want,
                 double tol = 1e-12) {
    REQUIRE(got.has_value() == want.has_value());
    if (got) CHECK(std::abs(*got - *want) <= tol);
}

}  // namespace

TEST_CASE("tally of all-exact pairs") {
    std::vector<PairAlignment> pairs = {
        {0, 0, AlignmentLabel::ExactMatch},
        {1, 1, AlignmentLabel::ExactMatch},
        {2, 2, AlignmentLabel::ExactMatch},
    };
    auto result = tally(pairs, 3, 3);
    CHECK(result.tally.exact == 3);
    CHECK(result.tally.total_pairs == 3);
    CHECK(result.tally.model_count == 3);
    CHECK(result.tally.reference_count == 3);
    CHECK(result.tally.min_count == 3);
    CHECK(result.auto_added_model_only == 0);
}

TEST_CASE("tally of the worked mixed example") {
    // 1 exact, 2 partial, 1 model-only, 1 reference-only, 1 contradiction.
    std::vector<PairAlignment> pairs = {
        {0, 0, AlignmentLabel::ExactMatch},
        {1, 1, AlignmentLabel::PartialMatch},
        {2, 2, AlignmentLabel::PartialMatch},
        {3, std::nullopt, AlignmentLabel::HadesOnly},
        {std::nullopt, 3, AlignmentLabel::DilerOnly},
        {4, 4, AlignmentLabel::Contradiction},
    };
    auto result = tally(pairs, 5, 5);
    CHECK(result.tally.total_pairs == 6);
    CHECK(result.tally.model_count == 5);
    CHECK(result.tally.reference_count == 5);
    CHECK(result.tally.min_count == 5);
    // identities hold
    const auto& t = result.tally;
    CHECK(t.model_count == t.exact + t.partial + t.contradiction + t.model_only);
    CHECK(t.reference_count == t.exact + t.partial + t.contradiction + t.reference_only);
}

TEST_CASE("tally auto-adds Only pairs for unmatched hypotheses") {
    auto result = tally({}, 2, 3);
    CHECK(result.tally.model_only == 2);
    CHECK(result.tally.reference_only == 3);
    CHECK(result.auto_added_model_only == 2);
    CHECK(result.auto_added_reference_only == 3);
    CHECK(result.tally.total_pairs == 5);
}

TEST_CASE("tally rejects malformed input") {
    CHECK_THROWS_AS(tally({{5, 0, AlignmentLabel::ExactMatch}}, 2, 2), TallyError);
    CHECK_THROWS_AS(tally({{0, 0, AlignmentLabel::ExactMatch},
                           {0, 1, AlignmentLabel::PartialMatch}},
                          2, 2),
                    TallyError);
    // wrong index combination for the label
    CHECK_THROWS_AS(tally({{0, std::nullopt, AlignmentLabel::ExactMatch}}, 1, 1),
                    TallyError);
    CHECK_THROWS_AS(tally({{0, 0, AlignmentLabel::HadesOnly}}, 1, 1), TallyError);
}

TEST_CASE("resolve_one_to_one keeps the strongest label and demotes the rest") {
    std::vector<PairAlignment> raw = {
        {0, 1, AlignmentLabel::PartialMatch},
        {0, 0, AlignmentLabel::ExactMatch},
    };
    auto resolved = resolve_one_to_one(raw, 1, 2);
    REQUIRE(resolved.pairs.size() == 2);
    // Exact(0,0) wins, Partial(0,1) demotes to a reference-only pair.
    bool saw_exact = false, saw_diler_only = false;
    for (const auto& p : resolved.pairs) {
        if (p.label == AlignmentLabel::ExactMatch) saw_exact = true;
        if (p.label == AlignmentLabel::DilerOnly && p.reference_index == 1)
            saw_diler_only = true;
    }
    CHECK(saw_exact);
    CHECK(saw_diler_only);
    CHECK(resolved.warnings.size() == 1);
    CHECK_NOTHROW(tally(resolved.pairs, 1, 2));
}

TEST_CASE("set similarity worked example") {
    auto t = AlignmentTally::from_counts(1, 2, 1, 1, 1);
    auto s = set_similarity(t);
    check_close(s.jaccard, 1.0 / 6.0);
    check_close(s.dice, 0.2);
    check_close(s.overlap, 0.2);
    check_close(s.fuzzy_jaccard, 0.25);
}

TEST_CASE("set similarity degenerate cases") {
    SUBCASE("perfect agreement") {
        auto s = set_similarity(AlignmentTally::from_counts(3, 0, 0, 0, 0));
        check_close(s.jaccard, 1.0);
        check_close(s.dice, 1.0);
        check_close(s.overlap, 1.0);
        check_close(s.fuzzy_jaccard, 1.0);
    }
    SUBCASE("empty model output: zero values kept, overlap absent") {
        auto s = set_similarity(AlignmentTally::from_counts(0, 0, 0, 3, 0));
        check_close(s.jaccard, 0.0);
        check_close(s.dice, 0.0);
        CHECK_FALSE(s.overlap.has_value());  // M = 0
        check_close(s.fuzzy_jaccard, 0.0);
    }
}

TEST_CASE("precision, recall, f1") {
    SUBCASE("worked example") {
        auto r = precision_recall_f1(AlignmentTally::from_counts(1, 2, 1, 1, 1));
        check_close(r.precision, 0.4);
        check_close(r.recall, 0.4);
        check_close(r.f1, 0.4);
    }
    SUBCASE("zero numerator with F1 absent") {
        auto r = precision_recall_f1(AlignmentTally::from_counts(0, 0, 2, 3, 0));
        check_close(r.precision, 0.0);
        check_close(r.recall, 0.0);
        CHECK_FALSE(r.f1.has_value());
    }
    SUBCASE("all exact") {
        auto r = precision_recall_f1(AlignmentTally::from_counts(4, 0, 0, 0, 0));
        check_close(r.precision, 1.0);
        check_close(r.recall, 1.0);
        check_close(r.f1, 1.0);
    }
}

TEST_CASE("error rates") {
    SUBCASE("worked example") {
        auto r = error_rates(AlignmentTally::from_counts(1, 2, 1, 1, 1));
        check_close(r.contradiction_rate, 1.0 / 6.0);
        check_close(r.hallucination_rate, 0.2);
        check_close(r.miss_rate, 0.2);
    }
    SUBCASE("total disjointness") {
        auto r = error_rates(AlignmentTally::from_counts(0, 0, 2, 3, 0));
        check_close(r.contradiction_rate, 0.0);
        check_close(r.hallucination_rate, 1.0);
        check_close(r.miss_rate, 1.0);
    }
    SUBCASE("all exact") {
        auto r = error_rates(AlignmentTally::from_counts(3, 0, 0, 0, 0));
        check_close(r.contradiction_rate, 0.0);
        check_close(r.hallucination_rate, 0.0);
        check_close(r.miss_rate, 0.0);
    }
}

TEST_CASE("randomized oracle equivalence and range/ordering invariants") {
    std::mt19937 rng(42);
    std::uniform_int_distribution<std::size_t> dist(0, 20);
    for (int i = 0; i < 1000; ++i) {
        const auto t = AlignmentTally::from_counts(dist(rng), dist(rng), dist(rng),
                                                   dist(rng), dist(rng));
        const Oracle oracle(t);
        const auto m = compute_metrics(t);
        check_close(m.jaccard(), oracle.jaccard());
        check_close(m.dice(), oracle.dice());
        check_close(m.overlap(), oracle.overlap());
        check_close(m.fuzzy_jaccard(), oracle.fuzzy());
        check_close(m.precision(), oracle.precision());
        check_close(m.recall(), oracle.recall());
        check_close(m.f1(), oracle.f1());
        check_close(m.contradiction_rate(), oracle.contradiction_rate());
        check_close(m.hallucination_rate(), oracle.hallucination_rate());
        check_close(m.miss_rate(), oracle.miss_rate());

        for (const auto& v : m.values)
            if (v) {
                CHECK(*v >= 0.0);
                CHECK(*v <= 1.0);
            }
        if (m.jaccard() && m.dice()) CHECK(*m.jaccard() <= *m.dice() + 1e-15);

        // Precision counts model-side pairs only, recall reference-side only.
        CHECK(t.exact + t.partial + t.model_only + t.contradiction == t.model_count);
        CHECK(t.exact + t.partial + t.reference_only + t.contradiction ==
              t.reference_count);
    }
}

TEST_CASE("fuzzy jaccard weight behavior") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<std::size_t> dist(0, 10);
    for (int i = 0; i < 200; ++i) {
        const std::size_t e = dist(rng), p = dist(rng), ho = dist(rng), dofs = dist(rng),
                          c = dist(rng);
        // literal identity at w_P = 0
        auto t0 = AlignmentTally::from_counts(e, p, ho, dofs, c, 0.0);
        auto f0 = set_similarity(t0).fuzzy_jaccard;
        const double hd = double(t0.model_count + t0.reference_count);
        if (hd - double(e) > 0.0) {
            REQUIRE(f0.has_value());
            CHECK(std::abs(*f0 - double(e) / (hd - double(e))) <= 1e-12);
        }
        // monotonically non-decreasing in w_P
        std::optional<double> prev;
        for (double wp : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            auto f = set_similarity(AlignmentTally::from_counts(e, p, ho, dofs, c, wp))
                         .fuzzy_jaccard;
            if (prev && f) CHECK(*f >= *prev - 1e-12);
            if (f) prev = f;
        }
    }
}

TEST_CASE("aggregate averages present fields and tracks support") {
    AlignmentMetrics a, b;
    a[MetricId::Jaccard] = 0.2;
    b[MetricId::Jaccard] = 0.4;
    a[MetricId::Overlap] = std::nullopt;
    b[MetricId::Overlap] = 0.5;
    auto agg = aggregate({a, b});
    CHECK(*agg.mean.jaccard() == doctest::Approx(0.3));
    CHECK(agg.support[std::size_t(MetricId::Jaccard)] == 2);
    CHECK(*agg.mean.overlap() == doctest::Approx(0.5));
    CHECK(agg.support[std::size_t(MetricId::Overlap)] == 1);
    CHECK_FALSE(agg.mean.f1().has_value());
    CHECK(agg.support[std::size_t(MetricId::F1)] == 0);
    CHECK_THROWS_AS(aggregate({}), TallyError);
}

TEST_CASE("label parsing is tolerant") {
    CHECK(*parse_label("Exact Match") == AlignmentLabel::ExactMatch);
    CHECK(*parse_label("EXACT-MATCH") == AlignmentLabel::ExactMatch);
    CHECK(*parse_label("exact_match") == AlignmentLabel::ExactMatch);
    CHECK(*parse_label("ONLY_IN_HADES") == AlignmentLabel::HadesOnly);
    CHECK(*parse_label("HADES Only") == AlignmentLabel::HadesOnly);
    CHECK(*parse_label("ONLY_IN_DILER") == AlignmentLabel::DilerOnly);
    CHECK(*parse_label("Contradiction") == AlignmentLabel::Contradiction);
    CHECK_FALSE(parse_label("Kinda Match").has_value());
}

TEST_CASE("alignment-record file round-trip") {
    std::vector<AlignmentRecord> records(2);
    records[0].inchikey = "BSYNRYPXCCBAUM-UHFFFAOYSA-N";
    records[0].model_count = 2;
    records[0].reference_count = 3;
    records[0].pairs = {{0, 1, AlignmentLabel::PartialMatch},
                        {1, std::nullopt, AlignmentLabel::HadesOnly},
                        {std::nullopt, 0, AlignmentLabel::DilerOnly}};
    records[1].inchikey = "GFFGJBXGBJISGV-UHFFFAOYSA-N";
    records[1].model_count = 0;
    records[1].reference_count = 1;

    std::ostringstream out;
    write_alignment_records(out, records);
    std::istringstream in(out.str());
    auto reparsed = parse_alignment_records_stream(in, "mem");
    CHECK(reparsed == records);
}
