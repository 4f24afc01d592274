#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "covfair/corpus.hpp"

namespace covfair {

struct EntailmentPair {
    std::string premise;
    std::string hypothesis;
};

/// Scores premise -> hypothesis entailment. Implementations return one
/// probability in [0,1] per pair, in request order.
class EntailmentProvider {
public:
    virtual ~EntailmentProvider() = default;

    virtual std::vector<double> entail(std::span<const EntailmentPair> pairs) = 0;

    /// Stable identity string embedded in reports and cache keys.
    virtual std::string identity() const = 0;

    double entail_one(const std::string& premise, const std::string& hypothesis);
};

/// Token-overlap baseline: fraction of hypothesis tokens (whitespace words,
/// ASCII case-folded, counted with multiplicity) present in the premise.
/// 1 on containment, 0 on disjoint vocabularies, 0 for a hypothesis with no
/// tokens.
double lexical_entailment(std::string_view premise, std::string_view hypothesis);

class LexicalProvider final : public EntailmentProvider {
public:
    std::vector<double> entail(std::span<const EntailmentPair> pairs) override;
    std::string identity() const override { return "lexical-overlap/1"; }
};

struct RemoteConfig {
    std::string endpoint;             // e.g. http://127.0.0.1:8080
    std::string auth_token;           // sent as a bearer token when non-empty
    std::size_t batch_size = 32;
    std::size_t max_in_flight = 4;
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{200};
    std::chrono::seconds timeout{60};

    /// Fills endpoint/token from COVFAIR_ENDPOINT / COVFAIR_AUTH_TOKEN when set.
    void apply_environment();
};

/// Client for the entailment service: POST /v1/entail, GET /health.
class RemoteProvider final : public EntailmentProvider {
public:
    explicit RemoteProvider(RemoteConfig config);

    std::vector<double> entail(std::span<const EntailmentPair> pairs) override;
    std::string identity() const override;

    /// Queries /health; records the served model id for identity().
    std::string health();

    const RemoteConfig& config() const { return config_; }

private:
    std::vector<double> entail_batch(std::span<const EntailmentPair> pairs);

    RemoteConfig config_;
    std::string model_;
};

/// Thread-safe cache of pair probabilities keyed by
/// (provider identity, premise hash, hypothesis hash).
class EntailmentCache {
public:
    std::optional<double> find(const std::string& key) const;
    void insert(const std::string& key, double prob);

    static std::string key(const std::string& provider, std::string_view premise,
                           std::string_view hypothesis);

    /// One JSON object per line: {"key": str, "prob": float}. Missing file is
    /// an empty cache.
    void load(const std::filesystem::path& path);
    /// Writes entries sorted by key.
    void save(const std::filesystem::path& path) const;

    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, double> entries_;
};

/// Wraps a provider with an EntailmentCache and counts hits and misses.
class CachedProvider final : public EntailmentProvider {
public:
    CachedProvider(EntailmentProvider& inner, EntailmentCache& cache);

    std::vector<double> entail(std::span<const EntailmentPair> pairs) override;
    std::string identity() const override { return inner_.identity(); }

    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }

private:
    EntailmentProvider& inner_;
    EntailmentCache& cache_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

struct ChunkPolicy {
    std::size_t max_words = 100;

    /// max_words = 1 packs every sentence into its own chunk.
    static ChunkPolicy sentence_level() { return ChunkPolicy{1}; }
    std::string label() const;
    void validate() const;
};

/// Greedy packing of consecutive sentences into chunks of at most
/// policy.max_words words. A sentence longer than the limit forms its own
/// chunk. Sentences are derived from the text when the document has none.
std::vector<std::string> chunk_document(const Document& doc, const ChunkPolicy& policy);

/// p(d_i, s_j): maximum chunk -> unit entailment probability.
double coverage_prob(const Document& doc, const std::string& unit,
                     EntailmentProvider& provider, const ChunkPolicy& policy);
double coverage_prob(std::span<const std::string> chunks, const std::string& unit,
                     EntailmentProvider& provider);

/// Coverage matrix over all (document, summary unit) pairs of a sample.
CoverageMatrix build_matrix(const Sample& sample, EntailmentProvider& provider,
                            const ChunkPolicy& policy);

/// Coverage probabilities loaded from matrix files, one per sample.
class PrecomputedCoverage {
public:
    PrecomputedCoverage() = default;
    /// Loads every *.json matrix file in `dir`.
    explicit PrecomputedCoverage(const std::filesystem::path& dir);

    void add(CoverageMatrix m);
    bool contains(const std::string& sample_id) const;

    /// Throws LookupError when the sample, document or unit is missing.
    double lookup(const std::string& sample_id, const std::string& doc_id,
                  std::size_t unit_index) const;
    const CoverageMatrix& matrix(const std::string& sample_id) const;

    std::string identity() const { return "precomputed"; }

private:
    std::unordered_map<std::string, CoverageMatrix> matrices_;
};

CoverageMatrix build_matrix(const Sample& sample, const PrecomputedCoverage& provider);

struct ChunkTuningResult {
    std::vector<std::pair<ChunkPolicy, double>> fractions;  // candidate order
    ChunkPolicy best;
};

/// For each candidate chunk size, the fraction of summary units whose
/// maximum coverage over the sample's documents exceeds
/// attribution_threshold. Ties for the best size keep the earlier candidate.
ChunkTuningResult tune_chunk_size(const Corpus& corpus, EntailmentProvider& provider,
                                  const std::vector<ChunkPolicy>& candidates,
                                  double attribution_threshold = 0.5);

}  // namespace covfair
