#include <filesystem>
#include <sstream>

#include "app.hpp"
#include "covfair/corpus.hpp"
#include "doctest.h"
#include "json.hpp"
#include "stub_server.hpp"
#include "support.hpp"

using namespace covfair;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = app::run(args, out, err);
    return {code, out.str(), err.str()};
}

AttributeSchema sentiment() { return AttributeSchema{"sentiment", {"negative", "positive"}}; }

Corpus reviews() {
    Corpus c;
    c.schema = sentiment();
    auto doc = [](std::string id, std::string text, ValueIndex v) { return Document{id, text, v, {}, {}}; };
    Sample a;
    a.id = "hotel";
    a.documents = {doc("h1", "The room was clean. The staff were friendly.", 1),
                   doc("h2", "The room was noisy. Breakfast was cold.", 0),
                   doc("h3", "The staff were friendly. The view was great.", 1)};
    a.summary_text = "The staff were friendly and the room was clean.";
    Sample b;
    b.id = "phone";
    b.documents = {doc("p1", "The battery lasts long. The screen is bright.", 1),
                   doc("p2", "The battery died fast. The case cracked.", 0)};
    b.summary_text = "The battery lasts long. The screen is bright.";
    Sample d;
    d.id = "cafe";
    d.documents = {doc("c1", "The coffee was bitter. Service was slow.", 0),
                   doc("c2", "The coffee was strong. Service was quick.", 1),
                   doc("c3", "The cake was stale.", 0)};
    d.summary_text = "Service was slow and the cake was stale.";
    c.samples = {a, b, d};
    return c;
}

struct Workspace {
    testing::TempDir dir;
    std::string corpus;
    std::string schema;

    explicit Workspace(const Corpus& c = reviews()) {
        corpus = (dir / "corpus.jsonl").string();
        schema = (dir / "schema.json").string();
        write_corpus(c, fs::path(corpus));
        write_schema(c.schema, fs::path(schema));
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    std::vector<std::string> inputs() const { return {"--corpus", corpus, "--schema", schema}; }
};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_CASE("help exits cleanly and unknown options are configuration errors") {
    auto help = cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("score") != std::string::npos);
    CHECK(cli({"score", "--bogus"}).code == app::kConfigError);
    CHECK(cli({}).code == app::kConfigError);
}

TEST_CASE("score writes one matrix per sample and reuses its cache") {
    Workspace ws;
    auto run_dir = ws.path("run");
    auto first = cli(concat({"score", "-o", run_dir}, ws.inputs()));
    REQUIRE_MESSAGE(first.code == 0, first.err);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(fs::path(run_dir) / "matrices")) {
        CHECK(e.path().extension() == ".json");
        ++files;
    }
    CHECK(files == 3);
    CHECK(fs::exists(fs::path(run_dir) / "manifest.json"));
    CHECK_FALSE(fs::exists(fs::path(run_dir) / "failures.json"));
    auto manifest = json::parse(testing::read_file(fs::path(run_dir) / "manifest.json"));
    CHECK(manifest["samples"].size() == 3);
    CHECK(manifest["tool"] == "covfair");
    CHECK(manifest.contains("config_hash"));
    CHECK(first.err.find("misses: 0") == std::string::npos);

    std::map<std::string, std::string> before;
    for (const auto& e : fs::directory_iterator(fs::path(run_dir) / "matrices"))
        before[e.path().filename().string()] = testing::read_file(e.path());

    auto second = cli(concat({"score", "-o", run_dir, "--jobs", "3"}, ws.inputs()));
    REQUIRE_MESSAGE(second.code == 0, second.err);
    CHECK(second.err.find("misses: 0") != std::string::npos);
    for (const auto& [name, bytes] : before)
        CHECK(testing::read_file(fs::path(run_dir) / "matrices" / name) == bytes);
}

TEST_CASE("missing inputs name the path") {
    Workspace ws;
    auto missing = ws.path("nope.json");
    auto r = cli({"score", "-o", ws.path("run"), "--corpus", ws.corpus, "--schema", missing});
    CHECK(r.code == app::kConfigError);
    CHECK(r.err.find(missing) != std::string::npos);

    testing::write_file(ws.path("bad.jsonl"), "{not json}\n");
    auto bad = cli({"score", "-o", ws.path("run"), "--corpus", ws.path("bad.jsonl"), "--schema", ws.schema});
    CHECK(bad.code == app::kConfigError);
    CHECK(bad.err.find("line 1") != std::string::npos);
}

TEST_CASE("report on one and two systems") {
    Workspace ws;
    auto a = ws.path("a");
    REQUIRE(cli(concat({"score", "-o", a}, ws.inputs())).code == 0);

    Corpus other = reviews();
    other.samples[0].summary_text = "The room was noisy and breakfast was cold.";
    other.samples[2].summary_text = "The coffee was strong.";
    Workspace ws2(other);
    auto b = ws2.path("b");
    REQUIRE(cli(concat({"score", "-o", b}, ws2.inputs())).code == 0);

    auto one = cli({"report", "--run", "A=" + a, "--resamples", "200"});
    REQUIRE_MESSAGE(one.code == 0, one.err);
    auto j1 = json::parse(one.out);
    CHECK(j1.contains("overall_note"));
    CHECK_FALSE(j1.contains("overall"));

    auto out = ws.path("report.json");
    auto two = cli({"report", "--run", "A=" + a, "--run", "B=" + b, "--resamples", "200", "-o", out});
    REQUIRE_MESSAGE(two.code == 0, two.err);
    auto j2 = json::parse(testing::read_file(out));
    for (const auto& measure : {"ec", "cp"}) {
        for (const auto& [system, score] : j2["overall"][measure].items()) {
            CHECK(score.get<double>() >= 0.0);
            CHECK(score.get<double>() <= 1.0);
        }
        CHECK(j2["overall"][measure].size() == 2);
    }

    auto again = ws.path("again.json");
    REQUIRE(cli({"report", "--run", "A=" + a, "--run", "B=" + b, "--resamples", "200", "-o", again}).code == 0);
    CHECK(testing::read_file(again) == testing::read_file(out));

    auto tsv = cli({"report", "--run", "A=" + a, "--run", "B=" + b, "--resamples", "200", "--format", "tsv"});
    REQUIRE(tsv.code == 0);
    CHECK(tsv.out.find('\t') != std::string::npos);
    CHECK(tsv.out.find("\ncorpus\tdefault\tA\tlexical") != std::string::npos);
    CHECK(tsv.out.find("\noverall\tec\tB\t") != std::string::npos);

    CHECK(cli({"report", "--run", "A=" + ws.path("missing")}).code == app::kConfigError);
    CHECK(cli({"report", "--run", "no-equals-sign"}).code == app::kConfigError);
}

TEST_CASE("precomputed matrices reproduce the worked parity example") {
    Corpus c;
    c.schema = sentiment();
    for (const std::string id : {"s1", "s2"}) {
        Sample s;
        s.id = id;
        s.documents = {Document{"n", "Bad.", 0, {}, {}}, Document{"p", "Good.", 1, {}, {}}};
        s.summary_text = "Fine.";
        s.summary_units = {"Fine."};
        c.samples.push_back(s);
    }
    Workspace ws(c);
    fs::create_directories(ws.path("m"));
    write_matrix(CoverageMatrix::from_rows(c.samples[0], {{0.9}, {0.5}}), ws.dir / "m" / "s1.json");
    write_matrix(CoverageMatrix::from_rows(c.samples[1], {{0.3}, {0.5}}), ws.dir / "m" / "s2.json");

    auto run_dir = ws.path("run");
    auto score = cli(concat({"score", "-o", run_dir, "--provider", "precomputed", "--matrix-dir", ws.path("m")},
                            ws.inputs()));
    REQUIRE_MESSAGE(score.code == 0, score.err);
    auto r = cli({"report", "--run", "S=" + run_dir, "--resamples", "500"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto j = json::parse(r.out);
    auto sys = j["datasets"][0]["systems"][0];
    CHECK(sys["provider"] == "precomputed");
    CHECK(sys["cp"]["CP(G)"].get<double>() == doctest::Approx(0.05));
    CHECK(sys["cp"]["over"] == "negative");
    CHECK(sys["cp"]["under"] == "positive");
    CHECK(sys["cp"]["per_value"][0]["E(C_k)"].get<double>() == doctest::Approx(0.05));
    CHECK(sys["ec"]["samples"][0]["ec"].get<double>() == doctest::Approx(0.2));
    CHECK(sys["ec"]["EC(G)"].get<double>() == doctest::Approx(0.15));
}

TEST_CASE("bounds and sampling commands") {
    Workspace ws;
    auto out = ws.path("bounds");
    auto r = cli(concat({"bounds", "-o", out, "--budget", "12", "--trials", "3", "--candidates", "2"}, ws.inputs()));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto j = json::parse(testing::read_file(fs::path(out) / "bounds.json"));
    std::vector<std::string> labels;
    for (const auto& row : j["rows"]) labels.push_back(row["row"]);
    for (const auto& row : j["rows"]) {
        CHECK(row["EC(G)"].get<double>() >= 0.0);
        CHECK(row["CP(G)"].get<double>() >= 0.0);
    }
    CHECK(labels == std::vector<std::string>{"Lower_gre", "Upper_gre", "Random"});
    for (const auto& name : {"lower_ec.jsonl", "upper_ec.jsonl", "lower_cp.jsonl", "upper_cp.jsonl", "random.jsonl"}) {
        auto bound = ingest_corpus(fs::path(out) / name, sentiment());
        CHECK(bound.samples.size() == 3);
    }

    auto sampled = ws.path("sampled.jsonl");
    auto s = cli(concat({"sample", "-n", "2", "--seed", "4", "-o", sampled}, ws.inputs()));
    REQUIRE_MESSAGE(s.code == 0, s.err);
    CHECK(ingest_corpus(fs::path(sampled), sentiment()).samples.size() == 2);
    auto too_many = cli(concat({"sample", "-n", "8", "-o", sampled}, ws.inputs()));
    CHECK(too_many.code == app::kConfigError);

    auto tune = cli(concat({"tune-chunks", "--sizes", "sent,5,50"}, ws.inputs()));
    REQUIRE_MESSAGE(tune.code == 0, tune.err);
    auto t = json::parse(tune.out);
    CHECK(t["sizes"].size() == 3);
}

TEST_CASE("remote providers") {
    Workspace ws;
    testing::StubServer stub;
    auto ok = cli(concat({"score", "-o", ws.path("run"), "--provider", "remote", "--endpoint", stub.endpoint(),
                          "--no-cache"},
                         ws.inputs()));
    REQUIRE_MESSAGE(ok.code == 0, ok.err);
    CHECK(stub.requests > 0);

    auto dead = cli(concat({"score", "-o", ws.path("dead"), "--provider", "remote", "--endpoint",
                            testing::dead_endpoint(), "--no-cache"},
                           ws.inputs()));
    CHECK(dead.code == app::kProviderFailure);
}
