#include <set>

#include "covfair/baselines.hpp"
#include "covfair/equal_coverage.hpp"
#include "covfair/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace covfair;
using testing::make_sample;
using testing::matrix_of;

namespace {

Corpus corpus_with_strata(const std::vector<std::size_t>& per_value, std::size_t K) {
    Corpus c;
    c.schema = testing::schema_of(K);
    int n = 0;
    for (std::size_t k = 0; k < per_value.size(); ++k) {
        for (std::size_t i = 0; i < per_value[k]; ++i) {
            std::vector<ValueIndex> attrs = {k, k, (k + 1) % K};
            c.samples.push_back(make_sample("s" + std::to_string(n++), attrs, 1));
        }
    }
    // A tie that belongs to no stratum.
    c.samples.push_back(make_sample("tie", {0, 1}, 1));
    return c;
}

}  // namespace

TEST_CASE("proportional representation") {
    auto schema = testing::schema_of(2);
    auto s = make_sample("s", {0, 1}, 1);
    auto m = matrix_of(s, {{0.8}, {0.2}});
    auto soft = proportional_representation(m, s, schema, PrMode::Soft);
    CHECK(soft.summary_dist[0] == doctest::Approx(0.8));
    CHECK(soft.summary_dist[1] == doctest::Approx(0.2));
    CHECK(soft.input_dist == std::vector<double>{0.5, 0.5});
    CHECK(soft.pr == doctest::Approx(0.3));

    auto hard = proportional_representation(m, s, schema, PrMode::Hard);
    CHECK(hard.summary_dist == std::vector<double>{1.0, 0.0});
    CHECK(hard.pr == doctest::Approx(0.5));

    auto even = matrix_of(s, {{0.4}, {0.4}});
    CHECK(proportional_representation(even, s, schema).pr == doctest::Approx(0.0));
    CHECK(proportional_representation(even, s, schema, PrMode::Hard).summary_dist ==
          std::vector<double>{1.0, 0.0});

    auto empty = make_sample("e", {0, 1}, 0);
    CHECK_THROWS_AS(proportional_representation(CoverageMatrix("e", {"d0", "d1"}, 0), empty, schema),
                    UndefinedMeasureError);
}

TEST_CASE("soft PR always yields a simplex point") {
    Rng rng(17, "pr");
    for (int t = 0; t < 200; ++t) {
        std::size_t K = 2 + rng.uniform_index(3);
        auto schema = testing::schema_of(K);
        auto [s, m] = testing::random_sample(rng, "s", 1 + rng.uniform_index(5), 1 + rng.uniform_index(5), K);
        if (rng.uniform01() < 0.3) {
            for (std::size_t i = 0; i < m.rows(); ++i) m.at(i, 0) = 0.0;  // an all-zero column
        }
        for (auto mode : {PrMode::Soft, PrMode::Hard}) {
            auto r = proportional_representation(m, s, schema, mode);
            double total = 0.0;
            for (double v : r.summary_dist) {
                CHECK(v >= 0.0);
                total += v;
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(r.pr >= 0.0);
            CHECK(r.pr <= 1.0);
        }
    }
}

TEST_CASE("dominance by strict plurality") {
    CHECK(dominant_value(make_sample("a", {0, 0, 1}, 1), 3) == 0);
    CHECK_FALSE(dominant_value(make_sample("b", {0, 1}, 1), 3).has_value());
    CHECK_FALSE(dominant_value(make_sample("c", {0, 0, 1, 1, 2}, 1), 3).has_value());
    CHECK(dominant_value(make_sample("d", {2, 0, 2, 1}, 1), 3) == 2);

    auto c = corpus_with_strata({3, 2, 0}, 3);
    auto p = dominance_partition(c);
    CHECK(p.strata[0].size() == 3);
    CHECK(p.strata[1].size() == 2);
    CHECK(p.strata[2].empty());
    CHECK(p.unassigned == std::vector<std::string>{"tie"});
    std::size_t total = p.unassigned.size();
    for (const auto& s : p.strata) total += s.size();
    CHECK(total == c.samples.size());
}

TEST_CASE("stratified sampling") {
    auto c = corpus_with_strata({10, 10}, 2);
    auto drawn = stratified_sample(c, 6, 99);
    REQUIRE(drawn.samples.size() == 6);
    auto p = dominance_partition(drawn);
    CHECK(p.strata[0].size() == 3);
    CHECK(p.strata[1].size() == 3);
    auto again = stratified_sample(c, 6, 99);
    for (std::size_t i = 0; i < 6; ++i) CHECK(again.samples[i].id == drawn.samples[i].id);
    auto other = stratified_sample(c, 6, 100);
    std::set<std::string> a, b;
    for (const auto& s : drawn.samples) a.insert(s.id);
    for (const auto& s : other.samples) b.insert(s.id);
    CHECK(a != b);

    // Output keeps corpus order.
    std::size_t last = 0;
    for (const auto& s : drawn.samples) {
        std::size_t pos = static_cast<std::size_t>(c.find(s.id) - c.samples.data());
        CHECK(pos >= last);
        last = pos;
    }

    auto three = corpus_with_strata({100, 100, 100}, 3);
    auto full_sized = stratified_sample(three, 300, 1);
    auto pp = dominance_partition(full_sized);
    for (const auto& s : pp.strata) CHECK(s.size() == 100);

    auto short_pool = corpus_with_strata({2, 10}, 2);
    try {
        stratified_sample(short_pool, 6, 1);
        FAIL("expected an insufficient pool");
    } catch (const InsufficientPoolError& e) {
        CHECK(std::string(e.what()) == "stratum v0 has 2 < 3");
    }
    CHECK_THROWS_AS(stratified_sample(c, 5, 1), ConfigError);
}

TEST_CASE("dominance differences of EC") {
    // Stratum v0 samples have EC 0.1, stratum v1 samples 0.12.
    Corpus c;
    c.schema = testing::schema_of(3);
    std::vector<CoverageMatrix> ms;
    auto add = [&](const std::string& id, ValueIndex dominant, double gap) {
        ValueIndex other = (dominant + 1) % 3;
        auto s = make_sample(id, {dominant, dominant, other}, 1);
        // Rows x, x, y give p = (2x+y)/3 and EC = |y-x|/2.
        ms.push_back(matrix_of(s, {{0.5}, {0.5}, {0.5 + 2 * gap}}));
        c.samples.push_back(s);
    };
    for (int i = 0; i < 4; ++i) add("a" + std::to_string(i), 0, 0.1);
    for (int i = 0; i < 4; ++i) add("b" + std::to_string(i), 1, 0.12);
    stats::BootstrapOptions opts{1000, 0.05, 3};
    auto two = dominance_differences(c, ms, DominanceMeasure::Ec, opts);
    CHECK(two.max_diff == doctest::Approx(0.02));
    CHECK(*two.per_stratum[0][0] == doctest::Approx(0.1));
    CHECK(*two.per_stratum[1][0] == doctest::Approx(0.12));
    CHECK_FALSE(two.per_stratum[2][0].has_value());
    CHECK(two.significant);

    for (int i = 0; i < 4; ++i) add("c" + std::to_string(i), 2, 0.15);
    auto three = dominance_differences(c, ms, DominanceMeasure::Ec, opts);
    CHECK(three.max_diff == doctest::Approx(0.05));

    Corpus d = c;
    auto dm = ms;
    for (std::size_t i = 8; i < 12; ++i) dm[i] = matrix_of(d.samples[i], {{0.5}, {0.5}, {1.0}});
    // Strata EC {0.1, 0.12, 0.25}.
    auto spread = dominance_differences(d, dm, DominanceMeasure::Ec, opts);
    CHECK(spread.max_diff == doctest::Approx(0.15));
    CHECK(std::set<ValueIndex>{*spread.stratum_a, *spread.stratum_b} == std::set<ValueIndex>{0, 2});
}

TEST_CASE("identical strata differ by nothing") {
    Corpus c;
    c.schema = testing::schema_of(2);
    std::vector<CoverageMatrix> ms;
    for (int i = 0; i < 6; ++i) {
        ValueIndex dom = i % 2;
        auto s = make_sample("s" + std::to_string(i), {dom, dom, 1 - dom}, 2);
        ms.push_back(matrix_of(s, {{0.3, 0.5}, {0.3, 0.5}, {0.3, 0.5}}));
        c.samples.push_back(s);
    }
    for (auto mode : {DominanceMeasure::Ec, DominanceMeasure::CpPerValue}) {
        auto r = dominance_differences(c, ms, mode, {500, 0.05, 1});
        CHECK(r.max_diff == doctest::Approx(0.0));
        CHECK_FALSE(r.significant);
    }
    Corpus lonely;
    lonely.schema = c.schema;
    lonely.samples = {c.samples[0]};
    CHECK_THROWS_AS(dominance_differences(lonely, {ms[0]}, DominanceMeasure::Ec), UndefinedMeasureError);
}

TEST_CASE("dominance differences of per-value parity") {
    // In v0-dominated samples the v0 documents are covered more; in v1-dominated
    // samples coverage is flat.
    Corpus c;
    c.schema = testing::schema_of(2);
    std::vector<CoverageMatrix> ms;
    for (int i = 0; i < 5; ++i) {
        auto s = make_sample("a" + std::to_string(i), {0, 0, 1}, 1);
        ms.push_back(matrix_of(s, {{0.8}, {0.8}, {0.2}}));
        c.samples.push_back(s);
        auto t = make_sample("b" + std::to_string(i), {1, 1, 0}, 1);
        ms.push_back(matrix_of(t, {{0.5}, {0.5}, {0.5}}));
        c.samples.push_back(t);
    }
    auto r = dominance_differences(c, ms, DominanceMeasure::CpPerValue, {1000, 0.05, 2});
    // In G_0: mean 0.6, c = +0.2,+0.2 for v0, -0.4 for v1. In G_1 all zero.
    CHECK(*r.per_stratum[0][0] == doctest::Approx(0.2));
    CHECK(*r.per_stratum[0][1] == doctest::Approx(-0.4));
    CHECK(*r.per_stratum[1][0] == doctest::Approx(0.0));
    CHECK(r.max_diff == doctest::Approx(0.4));
    CHECK(*r.value == 1);
    CHECK(r.significant);
}
