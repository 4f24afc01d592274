#include <algorithm>
#include <cstdlib>
#include <map>

#include "covfair/entailment.hpp"
#include "covfair/errors.hpp"
#include "covfair/text.hpp"
#include "doctest.h"
#include "stub_server.hpp"
#include "support.hpp"

using namespace covfair;

namespace {

// Sentence of exactly n words.
std::string sentence_of(std::size_t n, const std::string& word) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + word;
    return s + ".";
}

Document doc_from(const std::vector<std::string>& sentences) {
    Document d;
    d.id = "d";
    d.text = text::join(sentences, " ");
    d.sentences = sentences;
    return d;
}

// Returns a fixed probability per premise.
class TableProvider final : public EntailmentProvider {
public:
    std::map<std::string, double> table;
    std::size_t calls = 0;
    std::vector<double> entail(std::span<const EntailmentPair> pairs) override {
        std::vector<double> out;
        for (const auto& p : pairs) {
            ++calls;
            out.push_back(table.at(p.premise));
        }
        return out;
    }
    std::string identity() const override { return "table"; }
};

class FailingProvider final : public EntailmentProvider {
public:
    std::vector<double> entail(std::span<const EntailmentPair>) override {
        throw TransportError("service down");
    }
    std::string identity() const override { return "failing"; }
};

std::size_t words_in(const std::vector<std::string>& chunks, std::size_t c) {
    return text::word_count(chunks[c]);
}

}  // namespace

TEST_CASE("chunking packs sentences greedily") {
    auto a = sentence_of(40, "a"), b = sentence_of(50, "b"), c = sentence_of(80, "c"),
         d = sentence_of(30, "d");
    auto chunks = chunk_document(doc_from({a, b, c, d}), ChunkPolicy{100});
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0] == a + " " + b);
    CHECK(chunks[1] == c);
    CHECK(chunks[2] == d);

    auto big = sentence_of(150, "x");
    auto oversized = chunk_document(doc_from({big}), ChunkPolicy{100});
    REQUIRE(oversized.size() == 1);
    CHECK(words_in(oversized, 0) == 150);

    auto small = chunk_document(doc_from({sentence_of(10, "p"), sentence_of(10, "q"),
                                          sentence_of(10, "r")}),
                                ChunkPolicy{100});
    CHECK(small.size() == 1);

    Document empty;
    empty.id = "e";
    CHECK(chunk_document(empty, ChunkPolicy{100}).empty());
    CHECK_THROWS_AS(ChunkPolicy{0}.validate(), ConfigError);
    CHECK(ChunkPolicy::sentence_level().label() == "sent");
    CHECK(ChunkPolicy{50}.label() == "50");
}

TEST_CASE("chunks concatenate to the normalized text") {
    Rng rng(3, "chunk-fuzz");
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> sentences;
        std::size_t n = 1 + rng.uniform_index(8);
        for (std::size_t i = 0; i < n; ++i) sentences.push_back(sentence_of(1 + rng.uniform_index(30), "w"));
        Document d;
        d.id = "d";
        d.text = text::join(sentences, "\n  ");
        ChunkPolicy policy{1 + rng.uniform_index(60)};
        auto chunks = chunk_document(d, policy);
        CHECK(text::join(chunks, " ") == text::normalize_whitespace(d.text));
        for (std::size_t c = 0; c < chunks.size(); ++c) {
            // Only single-sentence chunks may exceed the limit.
            if (words_in(chunks, c) > policy.max_words) {
                CHECK(text::split_sentences(chunks[c]).size() == 1);
            }
        }
    }
}

TEST_CASE("lexical entailment rule") {
    CHECK(lexical_entailment("The cat sat on the mat", "the CAT sat") == 1.0);
    CHECK(lexical_entailment("alpha beta", "gamma delta") == 0.0);
    CHECK(lexical_entailment("the cat", "the the cat dog") == doctest::Approx(0.5));
    CHECK(lexical_entailment("the the cat", "the the cat dog") == doctest::Approx(0.75));
    CHECK(lexical_entailment("anything", "   ") == 0.0);
    CHECK(lexical_entailment("cat.", "cat") == 0.0);  // punctuation is part of the token
}

TEST_CASE("coverage is the maximum over chunks") {
    TableProvider p;
    p.table = {{"c1", 0.2}, {"c2", 0.9}, {"c3", 0.4}};
    std::vector<std::string> chunks = {"c1", "c2", "c3"};
    CHECK(coverage_prob(chunks, "unit", p) == 0.9);
    std::vector<std::string> one = {"c4"};
    p.table["c4"] = 0.37;
    CHECK(coverage_prob(one, "unit", p) == 0.37);
    CHECK_THROWS_AS(coverage_prob(chunks, "", p), PreconditionError);

    LexicalProvider lexical;
    Document d = doc_from({"The battery lasts all day.", "Shipping was slow."});
    CHECK(coverage_prob(d, "shipping was", lexical, ChunkPolicy::sentence_level()) == 1.0);
}

TEST_CASE("merging chunks never lowers lexical coverage") {
    Rng rng(11, "merge");
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f"};
    auto random_text = [&](std::size_t n) {
        std::string s;
        for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + vocab[rng.uniform_index(vocab.size())];
        return s;
    };
    LexicalProvider lexical;
    for (int trial = 0; trial < 300; ++trial) {
        std::string x = random_text(1 + rng.uniform_index(6));
        std::string y = random_text(1 + rng.uniform_index(6));
        std::string unit = random_text(1 + rng.uniform_index(5));
        std::vector<std::string> split = {x, y};
        std::vector<std::string> merged = {x + " " + y};
        CHECK(coverage_prob(merged, unit, lexical) >= coverage_prob(split, unit, lexical));
    }
}

TEST_CASE("build_matrix shape, context and permutation invariance") {
    Sample s;
    s.id = "s";
    s.documents = {Document{"a", "The battery lasts all day. Shipping was slow.", 0, {}, {}},
                   Document{"b", "The price is too high.", 1, {}, {}}};
    s.summary_units = {"battery lasts", "price is high", "nothing matches here"};
    LexicalProvider lexical;
    auto m = build_matrix(s, lexical, ChunkPolicy{100});
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 3);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(m.at(i, j) >= 0.0);
            CHECK(m.at(i, j) <= 1.0);
        }
    }
    CHECK(m.at(0, 0) == 1.0);
    CHECK(m.at(1, 1) == doctest::Approx(2.0 / 3.0));

    Sample swapped = s;
    std::swap(swapped.documents[0], swapped.documents[1]);
    auto m2 = build_matrix(swapped, lexical, ChunkPolicy{100});
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(m2.at(0, j) == m.at(1, j));
        CHECK(m2.at(1, j) == m.at(0, j));
    }

    Sample empty = s;
    empty.summary_units.clear();
    CHECK_THROWS_AS(build_matrix(empty, lexical, ChunkPolicy{100}), PreconditionError);

    FailingProvider failing;
    try {
        build_matrix(s, failing, ChunkPolicy{100});
        FAIL("expected a transport error");
    } catch (const TransportError& e) {
        std::string what = e.what();
        CHECK(what.find("a") != std::string::npos);
        CHECK(what.find("unit 0") != std::string::npos);
    }
}

TEST_CASE("precomputed coverage passes stored entries through") {
    auto s = testing::make_sample("s1", {0, 1}, 2);
    auto stored = testing::matrix_of(s, {{0.25, 0.5}, {1.0 / 3.0, 0.0}});
    testing::TempDir dir;
    write_matrix(stored, dir / "s1.json");
    PrecomputedCoverage pre(dir.path());
    CHECK(pre.contains("s1"));
    CHECK(build_matrix(s, pre) == stored);
    CHECK(pre.lookup("s1", "d1", 0) == 1.0 / 3.0);
    CHECK_THROWS_AS(pre.lookup("s1", "d9", 0), LookupError);
    CHECK_THROWS_AS(pre.lookup("s1", "d0", 2), LookupError);
    CHECK_THROWS_AS(pre.lookup("s2", "d0", 0), LookupError);
    auto other = testing::make_sample("s2", {0, 1}, 2);
    CHECK_THROWS_AS(build_matrix(other, pre), LookupError);
}

TEST_CASE("chunk size tuning") {
    Corpus c;
    c.schema = testing::schema_of(2);
    Sample s;
    s.id = "s";
    s.documents = {Document{"a", "The battery lasts all day. Shipping was slow. It broke.", 0, {}, {}},
                   Document{"b", "The price is too high. Support was kind.", 1, {}, {}}};
    s.summary_units = {"Shipping was slow.", "Support was kind.", "It broke."};
    c.samples = {s};
    LexicalProvider lexical;
    std::vector<ChunkPolicy> sizes = {ChunkPolicy::sentence_level(), ChunkPolicy{50},
                                      ChunkPolicy{100}, ChunkPolicy{200}, ChunkPolicy{400}};
    auto r = tune_chunk_size(c, lexical, sizes, 0.5);
    REQUIRE(r.fractions.size() == 5);
    for (const auto& [policy, f] : r.fractions) CHECK(f == 1.0);
    CHECK(r.best.label() == "sent");

    c.samples[0].summary_units = {"Shipping was quick.", "Support was rude."};
    auto strict = tune_chunk_size(c, lexical, sizes, 1.0);
    for (const auto& [policy, f] : strict.fractions) CHECK(f == 0.0);
}

TEST_CASE("entailment cache") {
    EntailmentCache cache;
    auto k1 = EntailmentCache::key("lexical-overlap/1", "premise", "hyp");
    auto k2 = EntailmentCache::key("other", "premise", "hyp");
    CHECK(k1 != k2);
    CHECK_FALSE(cache.find(k1).has_value());
    cache.insert(k1, 0.125);
    cache.insert(k2, 1.0 / 3.0);
    testing::TempDir dir;
    cache.save(dir / "cache.jsonl");
    EntailmentCache loaded;
    loaded.load(dir / "cache.jsonl");
    CHECK(loaded.size() == 2);
    CHECK(loaded.find(k2) == 1.0 / 3.0);
    EntailmentCache missing;
    CHECK_NOTHROW(missing.load(dir / "none.jsonl"));

    TableProvider inner;
    inner.table = {{"p", 0.5}};
    EntailmentCache shared;
    CachedProvider cached(inner, shared);
    std::vector<EntailmentPair> pairs = {{"p", "x"}, {"p", "y"}, {"p", "x"}};
    auto first = cached.entail(pairs);
    CHECK(first == std::vector<double>{0.5, 0.5, 0.5});
    auto again = cached.entail(pairs);
    CHECK(again == first);
    CHECK(cached.misses() + cached.hits() == 6);
    CHECK(inner.calls == cached.misses());
    CHECK(cached.hits() >= 3);
}

TEST_CASE("remote provider speaks the entailment protocol") {
    testing::StubServer server;
    RemoteConfig cfg;
    cfg.endpoint = server.endpoint();
    cfg.batch_size = 3;
    cfg.max_in_flight = 2;
    cfg.initial_backoff = std::chrono::milliseconds(1);
    RemoteProvider remote(cfg);
    CHECK(remote.health() == "stub-nli");
    CHECK(remote.identity() == "remote:" + server.endpoint() + "#stub-nli");

    Rng rng(9, "remote-pairs");
    const std::vector<std::string> vocab = {"a", "b", "C", "d.", "e"};
    std::vector<EntailmentPair> pairs;
    for (int i = 0; i < 10; ++i) {
        std::string p, h;
        for (std::size_t w = 0; w < 1 + rng.uniform_index(5); ++w) p += vocab[rng.uniform_index(5)] + " ";
        for (std::size_t w = 0; w < 1 + rng.uniform_index(4); ++w) h += vocab[rng.uniform_index(5)] + " ";
        pairs.push_back({p, h});
    }
    server.delay_ms = 20;
    auto probs = remote.entail(pairs);
    REQUIRE(probs.size() == pairs.size());
    LexicalProvider lexical;
    CHECK(probs == lexical.entail(pairs));
    auto batches = server.batches();
    std::sort(batches.begin(), batches.end());
    CHECK(batches == std::vector<std::size_t>{1, 3, 3, 3});
    CHECK(server.max_in_flight <= 2);
    CHECK(remote.entail({}).empty());
}

TEST_CASE("remote provider retries server errors and reports transport failures") {
    testing::StubServer server;
    RemoteConfig cfg;
    cfg.endpoint = server.endpoint();
    cfg.initial_backoff = std::chrono::milliseconds(1);
    RemoteProvider remote(cfg);
    std::vector<EntailmentPair> pairs = {{"a b", "a"}};

    server.fail_first = 2;
    CHECK(remote.entail(pairs) == std::vector<double>{1.0});
    CHECK(server.requests == 3);

    server.requests = 0;
    server.fail_first = 10;
    CHECK_THROWS_AS(remote.entail(pairs), TransportError);
    CHECK(server.requests == 4);  // first attempt plus three retries

    server.fail_first = 0;
    server.requests = 0;
    server.client_error = 422;
    CHECK_THROWS_AS(remote.entail(pairs), TransportError);
    CHECK(server.requests == 1);  // client errors are not retried

    RemoteConfig dead;
    dead.endpoint = testing::dead_endpoint();
    dead.initial_backoff = std::chrono::milliseconds(1);
    dead.timeout = std::chrono::seconds(2);
    RemoteProvider unreachable(dead);
    CHECK_THROWS_AS(unreachable.entail(pairs), TransportError);
    CHECK_THROWS_AS(unreachable.health(), TransportError);
}

TEST_CASE("remote provider sends the bearer token and honours the environment") {
    testing::StubServer server;
    server.required_token = "secret";
    RemoteConfig cfg;
    cfg.endpoint = "http://127.0.0.1:1";
    cfg.initial_backoff = std::chrono::milliseconds(1);
    ::setenv("COVFAIR_ENDPOINT", server.endpoint().c_str(), 1);
    ::setenv("COVFAIR_AUTH_TOKEN", "secret", 1);
    cfg.apply_environment();
    ::unsetenv("COVFAIR_ENDPOINT");
    ::unsetenv("COVFAIR_AUTH_TOKEN");
    CHECK(cfg.endpoint == server.endpoint());
    RemoteProvider remote(cfg);
    std::vector<EntailmentPair> pairs = {{"x y", "y"}};
    CHECK(remote.entail(pairs) == std::vector<double>{1.0});

    RemoteConfig no_token;
    no_token.endpoint = server.endpoint();
    no_token.initial_backoff = std::chrono::milliseconds(1);
    RemoteProvider rejected(no_token);
    CHECK_THROWS_AS(rejected.entail(pairs), TransportError);
}

TEST_CASE("remote provider rejects bad configuration") {
    RemoteConfig cfg;
    cfg.endpoint = "not a url";
    CHECK_THROWS_AS(RemoteProvider{cfg}, ConfigError);
    cfg.endpoint = "http://127.0.0.1:8080";
    cfg.batch_size = 0;
    CHECK_THROWS_AS(RemoteProvider{cfg}, ConfigError);
}
