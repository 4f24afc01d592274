#include "covfair/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "covfair/equal_coverage.hpp"
#include "covfair/errors.hpp"
#include "covfair/rng.hpp"
#include "covfair/text.hpp"

namespace covfair {

void BudgetPolicy::validate() const {
    if (max_words < 1) throw ConfigError("summary budget must be at least one word");
}

namespace {

constexpr double kCoverThreshold = 0.5;

// Incremental EC of an extract: row sums of the growing coverage matrix.
class ExtractState {
public:
    ExtractState(const Sample& sample, std::size_t num_values)
        : attributes_(sample.documents.size()), counts_(num_values, 0),
          row_sum_(sample.documents.size(), 0.0) {
        for (std::size_t i = 0; i < sample.documents.size(); ++i) {
            attributes_[i] = sample.documents[i].attribute;
            ++counts_[attributes_[i]];
        }
    }

    void add(const std::vector<double>& column) {
        for (std::size_t i = 0; i < row_sum_.size(); ++i) row_sum_[i] += column[i];
        ++units_;
    }

    double ec_with(const std::vector<double>& column) const {
        std::vector<double> value_sum(counts_.size(), 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < row_sum_.size(); ++i) {
            const double r = row_sum_[i] + column[i];
            value_sum[attributes_[i]] += r;
            total += r;
        }
        const double m = static_cast<double>(units_ + 1);
        const double p = total / (static_cast<double>(row_sum_.size()) * m);
        double dev = 0.0;
        std::size_t present = 0;
        for (std::size_t k = 0; k < counts_.size(); ++k) {
            if (counts_[k] == 0) continue;
            ++present;
            dev += std::abs(p - value_sum[k] / (static_cast<double>(counts_[k]) * m));
        }
        return dev / static_cast<double>(present);
    }

private:
    std::vector<ValueIndex> attributes_;
    std::vector<std::size_t> counts_;
    std::vector<double> row_sum_;
    std::size_t units_ = 0;
};

std::size_t max_value_index(const Sample& sample) {
    std::size_t k = 0;
    for (const auto& d : sample.documents) k = std::max(k, d.attribute + 1);
    return k;
}

void append(ExtractiveSummary& summary, const SentencePool& pool, std::size_t c) {
    summary.refs.push_back(pool.refs[c]);
    summary.units.push_back(pool.sentences[c]);
    summary.word_count += pool.words[c];
}

}  // namespace

SentencePool build_sentence_pool(const Sample& sample, EntailmentProvider& provider,
                                 const ChunkPolicy& policy) {
    SentencePool pool;
    std::vector<std::vector<std::string>> chunks;
    for (std::size_t d = 0; d < sample.documents.size(); ++d) {
        const auto& doc = sample.documents[d];
        chunks.push_back(chunk_document(doc, policy));
        auto sentences = doc.sentences.empty() ? text::split_sentences(doc.text) : doc.sentences;
        for (std::size_t s = 0; s < sentences.size(); ++s) {
            pool.refs.push_back({d, s});
            pool.words.push_back(text::word_count(sentences[s]));
            pool.sentences.push_back(std::move(sentences[s]));
        }
    }
    if (pool.size() == 0) throw PreconditionError("sample " + sample.id + " has no sentences");
    pool.coverage.resize(pool.size());
    for (std::size_t c = 0; c < pool.size(); ++c) {
        pool.coverage[c].resize(sample.documents.size());
        for (std::size_t i = 0; i < sample.documents.size(); ++i) {
            pool.coverage[c][i] = coverage_prob(chunks[i], pool.sentences[c], provider);
        }
    }
    return pool;
}

std::vector<SentencePool> build_sentence_pools(const Corpus& corpus, EntailmentProvider& provider,
                                               const ChunkPolicy& policy) {
    std::vector<SentencePool> pools;
    pools.reserve(corpus.samples.size());
    for (const auto& s : corpus.samples) pools.push_back(build_sentence_pool(s, provider, policy));
    return pools;
}

Sample summary_sample(const Sample& sample, const ExtractiveSummary& summary) {
    Sample out = sample;
    out.summary_units = summary.units;
    out.summary_text = text::join(summary.units, " ");
    return out;
}

CoverageMatrix summary_matrix(const Sample& sample, const SentencePool& pool,
                              const ExtractiveSummary& summary) {
    std::vector<std::string> ids;
    for (const auto& d : sample.documents) ids.push_back(d.id);
    CoverageMatrix m(sample.id, std::move(ids), summary.refs.size());
    for (std::size_t j = 0; j < summary.refs.size(); ++j) {
        auto it = std::find(pool.refs.begin(), pool.refs.end(), summary.refs[j]);
        if (it == pool.refs.end()) throw LookupError("summary sentence not in pool");
        const auto& column = pool.coverage[static_cast<std::size_t>(it - pool.refs.begin())];
        for (std::size_t i = 0; i < m.rows(); ++i) m.at(i, j) = column[i];
    }
    return m;
}

std::size_t most_covering_sentence(const SentencePool& pool) {
    if (pool.size() == 0) throw PreconditionError("empty sentence pool");
    std::size_t best = 0;
    std::size_t best_covered = 0;
    double best_sum = -1.0;
    for (std::size_t c = 0; c < pool.size(); ++c) {
        std::size_t covered = 0;
        double sum = 0.0;
        for (double p : pool.coverage[c]) {
            if (p > kCoverThreshold) ++covered;
            sum += p;
        }
        if (covered > best_covered || (covered == best_covered && sum > best_sum)) {
            best = c;
            best_covered = covered;
            best_sum = sum;
        }
    }
    return best;
}

EcBound greedy_ec_bound(const Sample& sample, const SentencePool& pool,
                        const AttributeSchema& schema, const BudgetPolicy& budget,
                        Direction direction, std::optional<std::size_t> first) {
    budget.validate();
    if (pool.size() == 0) throw PreconditionError("sample " + sample.id + " has no sentences");
    const std::size_t start = first.value_or(most_covering_sentence(pool));
    if (start >= pool.size()) throw PreconditionError("first sentence index out of range");

    ExtractState state(sample, std::max(schema.size(), max_value_index(sample)));
    std::vector<bool> used(pool.size(), false);
    EcBound out;
    append(out.summary, pool, start);
    state.add(pool.coverage[start]);
    used[start] = true;

    while (true) {
        std::optional<std::size_t> pick;
        double pick_ec = 0.0;
        for (std::size_t c = 0; c < pool.size(); ++c) {
            if (used[c] || out.summary.word_count + pool.words[c] > budget.max_words) continue;
            const double ec = state.ec_with(pool.coverage[c]);
            const bool better = direction == Direction::Min ? ec < pick_ec : ec > pick_ec;
            if (!pick || better) {
                pick = c;
                pick_ec = ec;
            }
        }
        if (!pick) break;
        append(out.summary, pool, *pick);
        state.add(pool.coverage[*pick]);
        used[*pick] = true;
    }
    out.ec = equal_coverage(summary_matrix(sample, pool, out.summary),
                            summary_sample(sample, out.summary), schema)
                 .ec;
    return out;
}

EcBound greedy_ec_bound(const Sample& sample, EntailmentProvider& provider,
                        const ChunkPolicy& policy, const AttributeSchema& schema,
                        const BudgetPolicy& budget, Direction direction) {
    return greedy_ec_bound(sample, build_sentence_pool(sample, provider, policy), schema, budget,
                           direction);
}

// ---------------------------------------------------------------------------
// Coverage Parity bound

namespace {

// Running per-value sums of coverage differences.
struct PoolSums {
    std::vector<double> sum;
    std::vector<std::size_t> count;

    explicit PoolSums(std::size_t k) : sum(k, 0.0), count(k, 0) {}

    void add(const std::vector<CoverageDiff>& diffs) {
        for (const auto& d : diffs) {
            sum.at(d.value) += d.c;
            ++count.at(d.value);
        }
    }

    // CP over the values seen so far, divided by the full K.
    double cp() const {
        double total = 0.0;
        for (std::size_t k = 0; k < sum.size(); ++k) {
            if (count[k] > 0) total += std::abs(sum[k] / static_cast<double>(count[k]));
        }
        return total / static_cast<double>(sum.size());
    }
};

}  // namespace

std::vector<std::size_t> select_candidates(
    const std::vector<std::vector<std::vector<CoverageDiff>>>& candidates, std::size_t num_values,
    Direction direction, const std::vector<std::size_t>& order) {
    if (order.size() != candidates.size()) throw DimensionError("order must cover every sample");
    std::vector<std::size_t> choice(candidates.size(), 0);
    PoolSums sums(num_values);
    for (auto s : order) {
        if (candidates.at(s).empty()) throw PreconditionError("sample without candidates");
        std::size_t best = 0;
        double best_cp = 0.0;
        for (std::size_t c = 0; c < candidates[s].size(); ++c) {
            PoolSums trial = sums;
            trial.add(candidates[s][c]);
            const double cp = trial.cp();
            const bool better = direction == Direction::Min ? cp < best_cp : cp > best_cp;
            if (c == 0 || better) {
                best = c;
                best_cp = cp;
            }
        }
        choice[s] = best;
        sums.add(candidates[s][best]);
    }
    return choice;
}

CpBound greedy_cp_bound(const Corpus& corpus, const std::vector<SentencePool>& pools,
                        const BudgetPolicy& budget, Direction direction,
                        std::size_t candidates_per_sample, std::uint64_t seed) {
    if (candidates_per_sample < 1) throw ConfigError("need at least one candidate per sample");
    if (pools.size() != corpus.samples.size()) throw DimensionError("one pool per sample expected");
    const std::size_t n = corpus.samples.size();

    std::vector<std::vector<EcBound>> cands(n);
    std::vector<std::vector<std::vector<CoverageDiff>>> diffs(n);
    for (std::size_t s = 0; s < n; ++s) {
        const Sample& sample = corpus.samples[s];
        Rng rng(seed, "cp-bound/candidates", s);
        for (std::size_t c = 0; c < candidates_per_sample; ++c) {
            const std::size_t first = rng.uniform_index(pools[s].size());
            auto bound = greedy_ec_bound(sample, pools[s], corpus.schema, budget, direction, first);
            diffs[s].push_back(coverage_diffs(summary_matrix(sample, pools[s], bound.summary),
                                              summary_sample(sample, bound.summary)));
            cands[s].push_back(std::move(bound));
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return corpus.samples[a].id < corpus.samples[b].id;
    });
    auto choice = select_candidates(diffs, corpus.schema.size(), direction, order);

    CpBound out;
    std::vector<std::vector<double>> value_pools(corpus.schema.size());
    for (std::size_t s = 0; s < n; ++s) {
        out.summaries.push_back(cands[s][choice[s]].summary);
        out.ec.push_back(cands[s][choice[s]].ec);
        for (const auto& d : diffs[s][choice[s]]) value_pools[d.value].push_back(d.c);
    }
    out.cp = coverage_parity_from_pools(value_pools, corpus.schema, nullptr);
    return out;
}

CpBound greedy_cp_bound(const Corpus& corpus, EntailmentProvider& provider,
                        const ChunkPolicy& policy, const BudgetPolicy& budget,
                        Direction direction, std::size_t candidates_per_sample,
                        std::uint64_t seed) {
    return greedy_cp_bound(corpus, build_sentence_pools(corpus, provider, policy), budget,
                           direction, candidates_per_sample, seed);
}

// ---------------------------------------------------------------------------
// Random bound

RandomBound random_bound(const Corpus& corpus, const std::vector<SentencePool>& pools,
                         const BudgetPolicy& budget, std::size_t trials, std::uint64_t seed) {
    budget.validate();
    if (trials < 1) throw ConfigError("random bound needs at least one trial");
    if (pools.size() != corpus.samples.size()) throw DimensionError("one pool per sample expected");
    if (corpus.samples.empty()) throw UndefinedMeasureError("random bound of an empty corpus");

    RandomBound out;
    double ec_total = 0.0;
    double cp_total = 0.0;
    out.mean_value_diff.assign(corpus.schema.size(), 0.0);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::string tag = "random-bound/" + std::to_string(t);
        std::vector<std::vector<double>> value_pools(corpus.schema.size());
        double ec_sum = 0.0;
        for (std::size_t s = 0; s < corpus.samples.size(); ++s) {
            const Sample& sample = corpus.samples[s];
            const SentencePool& pool = pools[s];
            Rng rng(seed, tag, s);
            ExtractiveSummary summary;
            std::vector<std::size_t> remaining(pool.size());
            std::iota(remaining.begin(), remaining.end(), 0);
            bool first = true;
            while (!remaining.empty()) {
                std::vector<std::size_t> fitting;
                for (auto c : remaining) {
                    if (first || summary.word_count + pool.words[c] <= budget.max_words) {
                        fitting.push_back(c);
                    }
                }
                if (fitting.empty()) break;
                const std::size_t c = fitting[rng.uniform_index(fitting.size())];
                append(summary, pool, c);
                std::erase(remaining, c);
                first = false;
            }
            const auto m = summary_matrix(sample, pool, summary);
            const auto scored = summary_sample(sample, summary);
            ec_sum += equal_coverage(m, scored, corpus.schema).ec;
            for (const auto& d : coverage_diffs(m, scored)) value_pools[d.value].push_back(d.c);
            if (t == 0) out.first_trial.push_back(std::move(summary));
        }
        ec_total += ec_sum / static_cast<double>(corpus.samples.size());
        auto cp = coverage_parity_from_pools(value_pools, corpus.schema, nullptr);
        cp_total += cp.cp;
        for (std::size_t k = 0; k < cp.per_value.size(); ++k) {
            out.mean_value_diff[k] += cp.per_value[k].mean_diff / static_cast<double>(trials);
        }
    }
    out.ec_mean = ec_total / static_cast<double>(trials);
    out.cp_mean = cp_total / static_cast<double>(trials);
    return out;
}

RandomBound random_bound(const Corpus& corpus, EntailmentProvider& provider,
                         const ChunkPolicy& policy, const BudgetPolicy& budget,
                         std::size_t trials, std::uint64_t seed) {
    return random_bound(corpus, build_sentence_pools(corpus, provider, policy), budget, trials,
                        seed);
}

Corpus summaries_corpus(const Corpus& corpus, const std::vector<ExtractiveSummary>& summaries) {
    if (summaries.size() != corpus.samples.size()) {
        throw DimensionError("one summary per sample expected");
    }
    Corpus out;
    out.schema = corpus.schema;
    for (std::size_t s = 0; s < corpus.samples.size(); ++s) {
        out.samples.push_back(summary_sample(corpus.samples[s], summaries[s]));
    }
    return out;
}

}  // namespace covfair
