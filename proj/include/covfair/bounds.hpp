#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "covfair/corpus.hpp"
#include "covfair/coverage_parity.hpp"
#include "covfair/entailment.hpp"

namespace covfair {

struct BudgetPolicy {
    std::size_t max_words = 50;
    void validate() const;
};

enum class Direction { Min, Max };

struct SentenceRef {
    std::size_t doc = 0;
    std::size_t sentence = 0;
    friend bool operator==(const SentenceRef&, const SentenceRef&) = default;
};

struct ExtractiveSummary {
    std::vector<SentenceRef> refs;
    std::vector<std::string> units;  // extracted sentences, verbatim
    std::size_t word_count = 0;
};

/// Every document sentence of a sample with its coverage column.
struct SentencePool {
    std::vector<SentenceRef> refs;         // (doc, sentence) order
    std::vector<std::string> sentences;
    std::vector<std::size_t> words;
    std::vector<std::vector<double>> coverage;  // coverage[c][i] = p(d_i, sentence c)

    std::size_t size() const { return refs.size(); }
};

SentencePool build_sentence_pool(const Sample& sample, EntailmentProvider& provider,
                                 const ChunkPolicy& policy);

/// Sample whose summary units are the extracted sentences, plus its matrix.
Sample summary_sample(const Sample& sample, const ExtractiveSummary& summary);
CoverageMatrix summary_matrix(const Sample& sample, const SentencePool& pool,
                              const ExtractiveSummary& summary);

struct EcBound {
    ExtractiveSummary summary;
    double ec = 0.0;
};

/// Pool index of the sentence covering the most documents (p > 0.5); ties go
/// to the larger summed coverage, then the lowest index.
std::size_t most_covering_sentence(const SentencePool& pool);

/// Greedy extractive EC bound. Starts from `first` (default: the most
/// covering sentence, which may exceed the budget) and repeatedly adds the
/// fitting sentence that minimizes or maximizes EC of the extract until no
/// sentence fits.
EcBound greedy_ec_bound(const Sample& sample, const SentencePool& pool,
                        const AttributeSchema& schema, const BudgetPolicy& budget,
                        Direction direction, std::optional<std::size_t> first = std::nullopt);
EcBound greedy_ec_bound(const Sample& sample, EntailmentProvider& provider,
                        const ChunkPolicy& policy, const AttributeSchema& schema,
                        const BudgetPolicy& budget, Direction direction);

/// Sweeps samples in `order` and picks, per sample, the candidate whose
/// per-document coverage differences minimize or maximize CP of the choices
/// made so far (lowest candidate index on ties). candidates[s][c] holds the
/// differences of candidate c of sample s.
std::vector<std::size_t> select_candidates(
    const std::vector<std::vector<std::vector<CoverageDiff>>>& candidates, std::size_t num_values,
    Direction direction, const std::vector<std::size_t>& order);

struct CpBound {
    std::vector<ExtractiveSummary> summaries;  // parallel to corpus.samples
    std::vector<double> ec;                    // per-sample EC of the chosen summary
    CpResult cp;
};

CpBound greedy_cp_bound(const Corpus& corpus, const std::vector<SentencePool>& pools,
                        const BudgetPolicy& budget, Direction direction,
                        std::size_t candidates_per_sample, std::uint64_t seed);
CpBound greedy_cp_bound(const Corpus& corpus, EntailmentProvider& provider,
                        const ChunkPolicy& policy, const BudgetPolicy& budget,
                        Direction direction, std::size_t candidates_per_sample,
                        std::uint64_t seed);

struct RandomBound {
    double ec_mean = 0.0;
    double cp_mean = 0.0;
    std::vector<double> mean_value_diff;  // E(C_k) averaged over trials
    std::vector<ExtractiveSummary> first_trial;  // summaries of trial 0
};

/// Random extraction: per sample, draw a first sentence uniformly, then keep
/// drawing uniformly among remaining sentences that fit until none fits.
RandomBound random_bound(const Corpus& corpus, const std::vector<SentencePool>& pools,
                         const BudgetPolicy& budget, std::size_t trials, std::uint64_t seed);
RandomBound random_bound(const Corpus& corpus, EntailmentProvider& provider,
                         const ChunkPolicy& policy, const BudgetPolicy& budget,
                         std::size_t trials, std::uint64_t seed);

std::vector<SentencePool> build_sentence_pools(const Corpus& corpus, EntailmentProvider& provider,
                                               const ChunkPolicy& policy);

/// Corpus whose summaries are the given extracts, for re-scoring.
Corpus summaries_corpus(const Corpus& corpus, const std::vector<ExtractiveSummary>& summaries);

}  // namespace covfair
