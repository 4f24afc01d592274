#include "app.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "covfair/baselines.hpp"
#include "covfair/bounds.hpp"
#include "covfair/corpus.hpp"
#include "covfair/coverage_parity.hpp"
#include "covfair/decomposition.hpp"
#include "covfair/entailment.hpp"
#include "covfair/equal_coverage.hpp"
#include "covfair/errors.hpp"
#include "covfair/text.hpp"
#include "report.hpp"

namespace covfair::app {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing

struct ProviderOptions {
    std::string kind = "lexical";
    std::string endpoint;
    std::string matrix_dir;
    std::size_t batch_size = 32;
    std::size_t max_in_flight = 4;
    std::size_t chunk_words = 100;

    Json to_json() const {
        Json j;
        j["kind"] = kind;
        if (kind == "remote") {
            j["endpoint"] = endpoint;
            j["batch_size"] = batch_size;
            j["max_in_flight"] = max_in_flight;
        }
        if (kind == "precomputed") j["matrix_dir"] = matrix_dir;
        j["chunk_words"] = chunk_words;
        return j;
    }
};

void add_provider_options(CLI::App* cmd, ProviderOptions& o, bool allow_precomputed) {
    std::vector<std::string> kinds = {"lexical", "remote"};
    if (allow_precomputed) kinds.push_back("precomputed");
    cmd->add_option("--provider", o.kind, "Entailment provider")
        ->check(CLI::IsMember(kinds))
        ->capture_default_str();
    cmd->add_option("--endpoint", o.endpoint,
                    "Entailment service URL (overridden by COVFAIR_ENDPOINT)");
    if (allow_precomputed) {
        cmd->add_option("--matrix-dir", o.matrix_dir, "Directory of precomputed matrix files");
    }
    cmd->add_option("--batch-size", o.batch_size, "Pairs per remote request")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-in-flight", o.max_in_flight, "Concurrent remote requests")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--chunk-words", o.chunk_words, "Maximum words per document chunk")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

std::unique_ptr<EntailmentProvider> make_provider(const ProviderOptions& o) {
    if (o.kind == "lexical") return std::make_unique<LexicalProvider>();
    if (o.kind == "remote") {
        RemoteConfig rc;
        rc.endpoint = o.endpoint;
        rc.batch_size = o.batch_size;
        rc.max_in_flight = o.max_in_flight;
        rc.apply_environment();
        if (rc.endpoint.empty()) throw ConfigError("remote provider requires --endpoint");
        auto provider = std::make_unique<RemoteProvider>(rc);
        provider->health();
        return provider;
    }
    throw ConfigError("provider '" + o.kind + "' cannot score text pairs");
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& content) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << content;
}

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string("missing ") + what + " path");
    if (!fs::exists(path)) throw ConfigError(std::string(what) + " file not found: " + path);
}

struct Inputs {
    AttributeSchema schema;
    Corpus corpus;
    std::string corpus_hash;
    std::string schema_hash;
};

Inputs load_inputs(const std::string& corpus_path, const std::string& schema_path) {
    require_file(schema_path, "schema");
    require_file(corpus_path, "corpus");
    Inputs in;
    in.schema = read_schema(schema_path);
    in.corpus = ingest_corpus(corpus_path, in.schema);
    in.corpus_hash = text::hex64(text::content_hash(read_text(corpus_path)));
    in.schema_hash = text::hex64(text::content_hash(read_text(schema_path)));
    return in;
}

std::string config_hash(const Json& config) {
    return text::hex64(text::content_hash(config.dump()));
}

Json artifact_header(const Json& config, std::uint64_t seed, const std::string& provider) {
    Json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["config_hash"] = config_hash(config);
    j["seed"] = seed;
    j["provider"] = provider;
    j["config"] = config;
    return j;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// File name for a sample's matrix: the id itself when it is filesystem-safe,
/// otherwise a sanitized id plus a hash suffix.
std::string matrix_file_name(const std::string& sample_id) {
    std::string safe;
    for (char c : sample_id) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        safe.push_back(ok ? c : '_');
    }
    if (safe != sample_id || safe.empty() || safe.front() == '.') {
        safe += "-" + text::hex64(text::content_hash(sample_id)).substr(0, 8);
    }
    return safe + ".json";
}

DecomposerProvider make_decomposer(const std::string& kind, const std::string& endpoint) {
    DecomposerProvider d;
    if (kind == "remote") {
        d.kind = DecomposerProvider::Kind::Remote;
        d.remote.endpoint = endpoint;
        d.remote.apply_environment();
    }
    d.validate();
    return d;
}

/// Decomposes (and optionally deduplicates) the summary of a sample without
/// units. Returns false when the summary yields no units.
bool ensure_units(Sample& sample, const DecomposerProvider& decomposer,
                  EntailmentProvider* dedupe_scorer, double threshold) {
    if (!sample.summary_units.empty()) return true;
    if (text::normalize_whitespace(sample.summary_text).empty()) return false;
    auto units = decompose(sample.summary_text, decomposer);
    if (units.empty()) return false;
    if (dedupe_scorer != nullptr) units = dedupe_units(units, *dedupe_scorer, threshold);
    sample.summary_units = std::move(units);
    return true;
}

int exit_code_for(const Error& e) {
    switch (e.category()) {
        case ErrorCategory::Transport: return kProviderFailure;
        case ErrorCategory::Measure: return kMeasureUndefined;
        case ErrorCategory::Input:
        case ErrorCategory::Configuration: return kConfigError;
    }
    return kConfigError;
}

// ---------------------------------------------------------------------------
// sample

struct SampleCmd {
    std::string corpus, schema, out;
    std::size_t n = 300;
    std::uint64_t seed = 13;

    int run(std::ostream& err) const {
        auto in = load_inputs(corpus, schema);
        auto drawn = stratified_sample(in.corpus, n, seed);
        write_corpus(drawn, fs::path(out));
        auto partition = dominance_partition(drawn);
        err << "sampled " << drawn.samples.size() << " of " << in.corpus.samples.size()
            << " samples (seed " << seed << "):";
        for (ValueIndex k = 0; k < in.schema.size(); ++k) {
            err << ' ' << in.schema.label(k) << '=' << partition.strata[k].size();
        }
        err << '\n';
        return kSuccess;
    }
};

// ---------------------------------------------------------------------------
// decompose

struct DecomposeCmd {
    std::string corpus, schema, out;
    std::string decomposer = "rule";
    std::string decomposer_endpoint;
    double threshold = 0.95;
    bool no_dedupe = false;
    bool force = false;
    ProviderOptions provider;

    int run(std::ostream& err) const {
        auto in = load_inputs(corpus, schema);
        auto d = make_decomposer(decomposer, decomposer_endpoint);
        std::unique_ptr<EntailmentProvider> scorer;
        if (!no_dedupe) scorer = make_provider(provider);
        std::size_t empty = 0;
        for (auto& s : in.corpus.samples) {
            if (force) s.summary_units.clear();
            if (!ensure_units(s, d, scorer.get(), threshold)) ++empty;
        }
        write_corpus(in.corpus, fs::path(out));
        err << "decomposed " << in.corpus.samples.size() << " summaries";
        if (empty > 0) err << "; " << empty << " produced no units";
        err << '\n';
        return empty > 0 ? kMeasureUndefined : kSuccess;
    }
};

// ---------------------------------------------------------------------------
// score

struct ScoreCmd {
    std::string corpus, schema, out;
    std::string decomposer = "rule";
    std::string decomposer_endpoint;
    double threshold = 0.95;
    bool no_cache = false;
    std::size_t jobs = 1;
    std::uint64_t seed = 13;
    ProviderOptions provider;

    int run(std::ostream& err) const {
        auto in = load_inputs(corpus, schema);
        const fs::path dir(out);
        fs::create_directories(dir / "matrices");

        Json config;
        config["command"] = "score";
        config["corpus_hash"] = in.corpus_hash;
        config["schema_hash"] = in.schema_hash;
        config["provider"] = provider.to_json();
        config["decomposer"] = decomposer;
        config["dedupe_threshold"] = threshold;

        std::optional<PrecomputedCoverage> precomputed;
        std::unique_ptr<EntailmentProvider> base;
        std::unique_ptr<CachedProvider> cached;
        EntailmentCache cache;
        const fs::path cache_path = dir / "cache" / "entailment.jsonl";
        EntailmentProvider* scorer = nullptr;
        std::string identity;
        if (provider.kind == "precomputed") {
            if (provider.matrix_dir.empty()) {
                throw ConfigError("precomputed provider requires --matrix-dir");
            }
            precomputed.emplace(fs::path(provider.matrix_dir));
            identity = precomputed->identity();
        } else {
            base = make_provider(provider);
            identity = base->identity();
            if (!no_cache) cache.load(cache_path);
            cached = std::make_unique<CachedProvider>(*base, cache);
            scorer = no_cache ? base.get() : cached.get();
        }
        auto decomp = make_decomposer(decomposer, decomposer_endpoint);
        const ChunkPolicy chunks{provider.chunk_words};

        const std::size_t n = in.corpus.samples.size();
        std::vector<std::string> failure(n);
        std::vector<bool> transport_failure(n, false);
        std::vector<std::string> files(n);
        parallel_for(n, jobs, [&](std::size_t s) {
            Sample& sample = in.corpus.samples[s];
            try {
                if (precomputed && sample.summary_units.empty()) {
                    throw PreconditionError("precomputed scoring needs summary_units in the corpus");
                }
                if (!ensure_units(sample, decomp, scorer, threshold)) {
                    throw UndefinedMeasureError("summary of sample " + sample.id +
                                                " has no units");
                }
                CoverageMatrix m = precomputed ? build_matrix(sample, *precomputed)
                                               : build_matrix(sample, *scorer, chunks);
                files[s] = "matrices/" + matrix_file_name(sample.id);
                write_matrix(m, dir / files[s]);
            } catch (const Error& e) {
                failure[s] = e.what();
                transport_failure[s] = e.category() == ErrorCategory::Transport;
            }
        });

        write_corpus(in.corpus, dir / "corpus.jsonl");
        write_schema(in.schema, dir / "schema.json");

        Json manifest = artifact_header(config, seed, identity);
        Json samples = Json::array();
        Json failures = Json::array();
        bool any_transport = false;
        for (std::size_t s = 0; s < n; ++s) {
            Json row;
            row["id"] = in.corpus.samples[s].id;
            if (failure[s].empty()) {
                row["matrix"] = files[s];
                row["units"] = in.corpus.samples[s].summary_units.size();
            } else {
                row["matrix"] = nullptr;
                failures.push_back({{"id", in.corpus.samples[s].id}, {"error", failure[s]}});
                any_transport = any_transport || transport_failure[s];
            }
            samples.push_back(std::move(row));
        }
        manifest["samples"] = std::move(samples);
        write_text(dir / "manifest.json", manifest.dump(2) + "\n");
        if (!failures.empty()) {
            write_text(dir / "failures.json", failures.dump(2) + "\n");
        } else {
            fs::remove(dir / "failures.json");
        }

        if (cached && !no_cache) {
            cache.save(cache_path);
            err << "cache hits: " << cached->hits() << ", misses: " << cached->misses() << '\n';
        }
        err << "scored " << (n - failures.size()) << " of " << n << " samples into "
            << dir.string() << '\n';
        if (!failures.empty()) {
            err << failures.size() << " sample(s) failed; see " << (dir / "failures.json").string()
                << '\n';
            return any_transport ? kProviderFailure : kMeasureUndefined;
        }
        return kSuccess;
    }
};

// ---------------------------------------------------------------------------
// report

struct ReportCmd {
    std::vector<std::string> runs;
    std::string format = "json";
    std::string out;
    std::uint64_t seed = 13;
    std::size_t resamples = 5000;
    double alpha = 0.05;
    std::string pr_mode = "soft";
    bool dominance = false;

    static RunData load_run(const std::string& arg) {
        auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
            throw ConfigError("--run expects [DATASET:]SYSTEM=DIR, got '" + arg + "'");
        }
        RunData run;
        std::string name = arg.substr(0, eq);
        run.dir = arg.substr(eq + 1);
        auto colon = name.find(':');
        run.dataset = colon == std::string::npos ? "default" : name.substr(0, colon);
        run.system = colon == std::string::npos ? name : name.substr(colon + 1);
        const fs::path dir(run.dir);
        require_file((dir / "manifest.json").string(), "run manifest");
        run.manifest = Json::parse(read_text(dir / "manifest.json"));
        auto schema = read_schema(dir / "schema.json");
        run.corpus = ingest_corpus(dir / "corpus.jsonl", schema);
        std::map<std::string, std::string> files;
        for (const auto& row : run.manifest.at("samples")) {
            if (!row.at("matrix").is_null()) {
                files[row.at("id").get<std::string>()] = row.at("matrix").get<std::string>();
            }
        }
        for (const auto& sample : run.corpus.samples) {
            auto it = files.find(sample.id);
            if (it == files.end()) {
                run.matrices.emplace_back();
            } else {
                run.matrices.emplace_back(read_matrix(dir / it->second, sample));
            }
        }
        return run;
    }

    int run(std::ostream& out_stream, std::ostream& err) const {
        if (runs.empty()) throw ConfigError("report needs at least one --run");
        ReportOptions options;
        options.bootstrap.seed = seed;
        options.bootstrap.resamples = resamples;
        options.bootstrap.alpha = alpha;
        options.pr_mode = pr_mode == "hard" ? PrMode::Hard : PrMode::Soft;
        options.dominance = dominance;

        std::vector<RunData> loaded;
        for (const auto& arg : runs) loaded.push_back(load_run(arg));

        Json config;
        config["command"] = "report";
        Json run_cfg = Json::array();
        for (const auto& r : loaded) {
            run_cfg.push_back({{"dataset", r.dataset},
                               {"system", r.system},
                               {"run_config_hash", r.manifest.value("config_hash", "")}});
        }
        config["runs"] = std::move(run_cfg);
        config["resamples"] = resamples;
        config["alpha"] = alpha;
        config["pr_mode"] = pr_mode;
        config["dominance"] = dominance;

        std::set<std::string> providers;
        for (const auto& r : loaded) providers.insert(r.manifest.value("provider", "unknown"));
        std::string provider_ids;
        for (const auto& p : providers) provider_ids += (provider_ids.empty() ? "" : ",") + p;

        Json report = artifact_header(config, seed, provider_ids);
        report["bootstrap"] = {{"resamples", resamples}, {"alpha", alpha}};

        std::vector<std::string> dataset_order;
        std::map<std::string, Json> datasets;
        SystemScores ec_scores;
        SystemScores cp_scores;
        std::size_t undefined = 0;
        std::set<std::string> systems;
        for (const auto& r : loaded) {
            if (!datasets.count(r.dataset)) {
                dataset_order.push_back(r.dataset);
                Json ds;
                ds["name"] = r.dataset;
                ds["schema"] = {{"name", r.corpus.schema.name}, {"values", r.corpus.schema.values}};
                ds["systems"] = Json::array();
                datasets[r.dataset] = std::move(ds);
            }
            auto summary = summarize_system(r, options);
            undefined += summary.undefined.size();
            if (summary.ec) ec_scores[r.dataset][r.system] = *summary.ec;
            if (summary.cp) cp_scores[r.dataset][r.system] = *summary.cp;
            systems.insert(r.system);
            datasets[r.dataset]["systems"].push_back(std::move(summary.json));
        }
        Json ds_array = Json::array();
        for (const auto& name : dataset_order) ds_array.push_back(datasets[name]);
        report["datasets"] = std::move(ds_array);

        if (systems.size() >= 2) {
            Json overall;
            for (auto [name, scores] : {std::pair{"ec", &ec_scores}, std::pair{"cp", &cp_scores}}) {
                try {
                    Json per = Json::object();
                    for (const auto& [system, v] : overall_score(*scores)) per[system] = v;
                    overall[name] = std::move(per);
                } catch (const Error& e) {
                    report["overall_note"] = e.what();
                }
            }
            report["overall"] = std::move(overall);
        } else {
            report["overall_note"] = "Overall scores need runs of at least two systems";
        }

        const std::string rendered =
            format == "tsv" ? report_to_tsv(report) : report.dump(2) + "\n";
        if (out.empty()) {
            out_stream << rendered;
        } else {
            write_text(out, rendered);
            err << "wrote " << out << '\n';
        }
        if (undefined > 0) {
            err << undefined << " sample(s) have undefined measures and were excluded\n";
            return kMeasureUndefined;
        }
        return kSuccess;
    }
};

// ---------------------------------------------------------------------------
// bounds

struct BoundsCmd {
    std::string corpus, schema, out;
    std::size_t budget = 50;
    std::size_t candidates = 8;
    std::size_t trials = 10;
    std::uint64_t seed = 13;
    ProviderOptions provider;

    int run(std::ostream& err) const {
        auto in = load_inputs(corpus, schema);
        auto scorer = make_provider(provider);
        const ChunkPolicy chunks{provider.chunk_words};
        const BudgetPolicy budget_policy{budget};
        const fs::path dir(out);

        Json config;
        config["command"] = "bounds";
        config["corpus_hash"] = in.corpus_hash;
        config["schema_hash"] = in.schema_hash;
        config["provider"] = provider.to_json();
        config["budget"] = budget;
        config["candidates_per_sample"] = candidates;
        config["trials"] = trials;

        auto pools = build_sentence_pools(in.corpus, *scorer, chunks);
        Json rows = Json::array();
        auto cp_row = [&](const std::string& name, double ec, const CpResult& cp) {
            Json row;
            row["row"] = name;
            row["EC(G)"] = ec;
            row["CP(G)"] = cp.cp;
            row["over"] = label_or_none(cp.most_over, in.schema);
            row["under"] = label_or_none(cp.most_under, in.schema);
            return row;
        };

        for (auto [name, direction] : {std::pair{"lower", Direction::Min},
                                       std::pair{"upper", Direction::Max}}) {
            std::vector<ExtractiveSummary> ec_summaries;
            double ec_total = 0.0;
            for (std::size_t s = 0; s < in.corpus.samples.size(); ++s) {
                auto b = greedy_ec_bound(in.corpus.samples[s], pools[s], in.schema, budget_policy,
                                         direction);
                ec_total += b.ec;
                ec_summaries.push_back(std::move(b.summary));
            }
            auto cp = greedy_cp_bound(in.corpus, pools, budget_policy, direction, candidates, seed);
            write_corpus(summaries_corpus(in.corpus, ec_summaries),
                         dir / (std::string(name) + "_ec.jsonl"));
            write_corpus(summaries_corpus(in.corpus, cp.summaries),
                         dir / (std::string(name) + "_cp.jsonl"));
            Json row = cp_row(direction == Direction::Min ? "Lower_gre" : "Upper_gre",
                              ec_total / static_cast<double>(in.corpus.samples.size()), cp.cp);
            rows.push_back(std::move(row));
        }

        auto random = random_bound(in.corpus, pools, budget_policy, trials, seed);
        write_corpus(summaries_corpus(in.corpus, random.first_trial), dir / "random.jsonl");
        CpResult random_cp;
        random_cp.cp = random.cp_mean;
        if (random.cp_mean > 1e-12) {
            const auto& d = random.mean_value_diff;
            random_cp.most_over =
                static_cast<ValueIndex>(std::max_element(d.begin(), d.end()) - d.begin());
            random_cp.most_under =
                static_cast<ValueIndex>(std::min_element(d.begin(), d.end()) - d.begin());
        }
        rows.push_back(cp_row("Random", random.ec_mean, random_cp));

        Json report = artifact_header(config, seed, scorer->identity());
        report["rows"] = std::move(rows);
        write_text(dir / "bounds.json", report.dump(2) + "\n");
        err << "wrote bounds for " << in.corpus.samples.size() << " samples to " << dir.string()
            << '\n';
        return kSuccess;
    }
};

// ---------------------------------------------------------------------------
// tune-chunks

struct TuneCmd {
    std::string corpus, schema, out;
    std::vector<std::string> sizes = {"sent", "50", "100", "200", "400"};
    double threshold = 0.5;
    ProviderOptions provider;

    int run(std::ostream& out_stream, std::ostream& err) const {
        auto in = load_inputs(corpus, schema);
        auto scorer = make_provider(provider);
        std::vector<ChunkPolicy> candidates;
        for (const auto& s : sizes) {
            if (s == "sent") {
                candidates.push_back(ChunkPolicy::sentence_level());
                continue;
            }
            std::size_t pos = 0;
            unsigned long v = 0;
            try {
                v = std::stoul(s, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != s.size() || v == 0) throw ConfigError("invalid chunk size '" + s + "'");
            candidates.push_back(ChunkPolicy{v});
        }
        DecomposerProvider rule;
        for (auto& sample : in.corpus.samples) ensure_units(sample, rule, nullptr, 0.95);

        auto result = tune_chunk_size(in.corpus, *scorer, candidates, threshold);
        Json config;
        config["command"] = "tune-chunks";
        config["corpus_hash"] = in.corpus_hash;
        config["provider"] = provider.to_json();
        config["sizes"] = sizes;
        config["attribution_threshold"] = threshold;
        Json report = artifact_header(config, 0, scorer->identity());
        Json rows = Json::array();
        for (const auto& [policy, fraction] : result.fractions) {
            rows.push_back({{"size", policy.label()}, {"identified_fraction", fraction}});
        }
        report["sizes"] = std::move(rows);
        report["best"] = result.best.label();
        const std::string rendered = report.dump(2) + "\n";
        if (out.empty()) {
            out_stream << rendered;
        } else {
            write_text(out, rendered);
            err << "wrote " << out << '\n';
        }
        return kSuccess;
    }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Coverage-based fairness evaluation for multi-document summaries", kToolName};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    auto add_io = [](CLI::App* cmd, std::string& corpus, std::string& schema) {
        cmd->add_option("--corpus", corpus, "Corpus JSONL")->required();
        cmd->add_option("--schema", schema, "Attribute schema JSON")->required();
    };

    SampleCmd sample_cmd;
    auto* sample = app.add_subcommand("sample", "Stratified sampling by dominant attribute value");
    add_io(sample, sample_cmd.corpus, sample_cmd.schema);
    sample->add_option("-n,--count", sample_cmd.n, "Samples to draw")->capture_default_str();
    sample->add_option("--seed", sample_cmd.seed)->capture_default_str();
    sample->add_option("-o,--out", sample_cmd.out, "Output corpus JSONL")->required();

    DecomposeCmd decompose_cmd;
    auto* decompose_sub = app.add_subcommand("decompose", "Split summaries into units and dedupe");
    add_io(decompose_sub, decompose_cmd.corpus, decompose_cmd.schema);
    decompose_sub->add_option("-o,--out", decompose_cmd.out, "Output corpus JSONL")->required();
    decompose_sub->add_option("--decomposer", decompose_cmd.decomposer)
        ->check(CLI::IsMember({"rule", "remote"}))
        ->capture_default_str();
    decompose_sub->add_option("--decomposer-endpoint", decompose_cmd.decomposer_endpoint);
    decompose_sub->add_option("--dedupe-threshold", decompose_cmd.threshold)
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    decompose_sub->add_flag("--no-dedupe", decompose_cmd.no_dedupe);
    decompose_sub->add_flag("--force", decompose_cmd.force, "Re-split summaries that have units");
    add_provider_options(decompose_sub, decompose_cmd.provider, false);

    ScoreCmd score_cmd;
    auto* score = app.add_subcommand("score", "Build coverage matrices for every sample");
    add_io(score, score_cmd.corpus, score_cmd.schema);
    score->add_option("-o,--out", score_cmd.out, "Output run directory")->required();
    score->add_option("--decomposer", score_cmd.decomposer)
        ->check(CLI::IsMember({"rule", "remote"}))
        ->capture_default_str();
    score->add_option("--decomposer-endpoint", score_cmd.decomposer_endpoint);
    score->add_option("--dedupe-threshold", score_cmd.threshold)
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    score->add_flag("--no-cache", score_cmd.no_cache, "Ignore and do not write the cache");
    score->add_option("--jobs", score_cmd.jobs)->check(CLI::PositiveNumber)->capture_default_str();
    score->add_option("--seed", score_cmd.seed)->capture_default_str();
    add_provider_options(score, score_cmd.provider, true);

    ReportCmd report_cmd;
    auto* report = app.add_subcommand("report", "Compute fairness reports from scored runs");
    report->add_option("--run", report_cmd.runs, "[DATASET:]SYSTEM=RUN_DIR")->required();
    report->add_option("--format", report_cmd.format)
        ->check(CLI::IsMember({"json", "tsv"}))
        ->capture_default_str();
    report->add_option("-o,--out", report_cmd.out, "Report file (default stdout)");
    report->add_option("--seed", report_cmd.seed)->capture_default_str();
    report->add_option("--resamples", report_cmd.resamples)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    report->add_option("--alpha", report_cmd.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    report->add_option("--pr-mode", report_cmd.pr_mode)
        ->check(CLI::IsMember({"soft", "hard"}))
        ->capture_default_str();
    report->add_flag("--dominance", report_cmd.dominance, "Add dominance-partition analyses");

    BoundsCmd bounds_cmd;
    auto* bounds = app.add_subcommand("bounds", "Greedy and random empirical bounds");
    add_io(bounds, bounds_cmd.corpus, bounds_cmd.schema);
    bounds->add_option("-o,--out", bounds_cmd.out, "Output directory")->required();
    bounds->add_option("--budget", bounds_cmd.budget, "Summary length in words")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bounds->add_option("--candidates", bounds_cmd.candidates, "Candidates per sample for CP bounds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bounds->add_option("--trials", bounds_cmd.trials)->check(CLI::PositiveNumber)->capture_default_str();
    bounds->add_option("--seed", bounds_cmd.seed)->capture_default_str();
    add_provider_options(bounds, bounds_cmd.provider, false);

    TuneCmd tune_cmd;
    auto* tune = app.add_subcommand("tune-chunks", "Compare chunk sizes for attributing units");
    add_io(tune, tune_cmd.corpus, tune_cmd.schema);
    tune->add_option("--sizes", tune_cmd.sizes, "Chunk sizes ('sent' for one sentence per chunk)")
        ->delimiter(',')
        ->capture_default_str();
    tune->add_option("--threshold", tune_cmd.threshold, "Attribution threshold")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    tune->add_option("-o,--out", tune_cmd.out, "Output JSON (default stdout)");
    add_provider_options(tune, tune_cmd.provider, false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kConfigError;
    }

    try {
        if (*sample) return sample_cmd.run(err);
        if (*decompose_sub) return decompose_cmd.run(err);
        if (*score) return score_cmd.run(err);
        if (*report) return report_cmd.run(out, err);
        if (*bounds) return bounds_cmd.run(err);
        if (*tune) return tune_cmd.run(out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}

}  // namespace covfair::app
