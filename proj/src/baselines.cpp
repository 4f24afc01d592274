#include "covfair/baselines.hpp"

#include <algorithm>
#include <unordered_set>
#include <cmath>

#include "covfair/coverage_parity.hpp"
#include "covfair/equal_coverage.hpp"
#include "covfair/errors.hpp"
#include "covfair/rng.hpp"

namespace covfair {

PrResult proportional_representation(const CoverageMatrix& matrix, const Sample& sample,
                                     const AttributeSchema& schema, PrMode mode) {
    if (sample.summary_units.empty()) {
        throw UndefinedMeasureError("sample " + sample.id + " has no summary units");
    }
    if (sample.documents.empty()) {
        throw UndefinedMeasureError("sample " + sample.id + " has no documents");
    }
    matrix.validate_against(sample);
    const std::size_t K = schema.size();
    const std::size_t n = matrix.rows();
    const std::size_t m = matrix.cols();

    PrResult r;
    r.sample_id = sample.id;
    r.summary_dist.assign(K, 0.0);
    r.input_dist.assign(K, 0.0);
    for (const auto& d : sample.documents) r.input_dist.at(d.attribute) += 1.0 / static_cast<double>(n);

    for (std::size_t j = 0; j < m; ++j) {
        if (mode == PrMode::Hard) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < n; ++i) {
                if (matrix.at(i, j) > matrix.at(best, j)) best = i;
            }
            r.summary_dist[sample.documents[best].attribute] += 1.0;
            continue;
        }
        double column = 0.0;
        for (std::size_t i = 0; i < n; ++i) column += matrix.at(i, j);
        for (std::size_t i = 0; i < n; ++i) {
            double w = column > 0.0 ? matrix.at(i, j) / column : 1.0 / static_cast<double>(n);
            r.summary_dist[sample.documents[i].attribute] += w;
        }
    }
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        r.summary_dist[k] /= static_cast<double>(m);
        total += std::abs(r.summary_dist[k] - r.input_dist[k]);
    }
    r.pr = total / static_cast<double>(K);
    return r;
}

std::optional<ValueIndex> dominant_value(const Sample& sample, std::size_t num_values) {
    auto counts = sample.value_counts(num_values);
    auto top = std::max_element(counts.begin(), counts.end());
    if (*top == 0 || std::count(counts.begin(), counts.end(), *top) > 1) return std::nullopt;
    return static_cast<ValueIndex>(top - counts.begin());
}

DominancePartition dominance_partition(const Corpus& corpus) {
    DominancePartition p;
    p.strata.resize(corpus.schema.size());
    for (const auto& s : corpus.samples) {
        if (auto k = dominant_value(s, corpus.schema.size())) {
            p.strata[*k].push_back(s.id);
        } else {
            p.unassigned.push_back(s.id);
        }
    }
    return p;
}

Corpus stratified_sample(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
    auto partition = dominance_partition(corpus);
    std::vector<ValueIndex> strata;
    for (ValueIndex k = 0; k < partition.strata.size(); ++k) {
        if (!partition.strata[k].empty()) strata.push_back(k);
    }
    if (strata.empty()) throw InsufficientPoolError("corpus has no dominated samples");
    if (n == 0 || n % strata.size() != 0) {
        throw ConfigError("sample size " + std::to_string(n) + " is not divisible by the " +
                          std::to_string(strata.size()) + " non-empty strata");
    }
    const std::size_t per = n / strata.size();
    for (auto k : strata) {
        if (partition.strata[k].size() < per) {
            throw InsufficientPoolError("stratum " + corpus.schema.label(k) + " has " +
                                        std::to_string(partition.strata[k].size()) + " < " +
                                        std::to_string(per));
        }
    }
    std::vector<std::string> chosen;
    for (auto k : strata) {
        auto pool = partition.strata[k];
        Rng rng(seed, "stratified-sample", k);
        // Partial Fisher-Yates: the first `per` slots are a uniform draw.
        for (std::size_t i = 0; i < per; ++i) {
            std::size_t j = i + rng.uniform_index(pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(per));
    }
    Corpus out;
    out.schema = corpus.schema;
    const std::unordered_set<std::string> keep(chosen.begin(), chosen.end());
    for (const auto& s : corpus.samples) {
        if (keep.count(s.id)) out.samples.push_back(s);
    }
    return out;
}

DominanceDifference dominance_differences(const Corpus& corpus,
                                          const std::vector<CoverageMatrix>& matrices,
                                          DominanceMeasure measure,
                                          const stats::BootstrapOptions& bootstrap) {
    if (matrices.size() != corpus.samples.size()) {
        throw DimensionError("expected one coverage matrix per sample");
    }
    const std::size_t K = corpus.schema.size();
    std::vector<std::optional<ValueIndex>> dominant;
    for (const auto& s : corpus.samples) dominant.push_back(dominant_value(s, K));

    // observations[k][j]: EC values of samples in G_k (j = 0), or c(d_i) of
    // documents with value j in samples of G_k.
    const std::size_t columns = measure == DominanceMeasure::Ec ? 1 : K;
    std::vector<std::vector<std::vector<double>>> obs(K, std::vector<std::vector<double>>(columns));
    for (std::size_t s = 0; s < corpus.samples.size(); ++s) {
        if (!dominant[s]) continue;
        const auto k = *dominant[s];
        if (measure == DominanceMeasure::Ec) {
            obs[k][0].push_back(equal_coverage(matrices[s], corpus.samples[s], corpus.schema).ec);
        } else {
            for (const auto& d : coverage_diffs(matrices[s], corpus.samples[s])) {
                obs[k][d.value].push_back(d.c);
            }
        }
    }

    DominanceDifference out;
    out.per_stratum.assign(K, std::vector<std::optional<double>>(columns));
    for (ValueIndex k = 0; k < K; ++k) {
        for (std::size_t j = 0; j < columns; ++j) {
            if (!obs[k][j].empty()) out.per_stratum[k][j] = stats::mean(obs[k][j]);
        }
    }
    bool found = false;
    for (std::size_t j = 0; j < columns; ++j) {
        for (ValueIndex a = 0; a < K; ++a) {
            for (ValueIndex b = a + 1; b < K; ++b) {
                const auto& va = out.per_stratum[a][j];
                const auto& vb = out.per_stratum[b][j];
                if (!va || !vb) continue;
                const double diff = std::abs(*va - *vb);
                if (!found || diff > out.max_diff) {
                    found = true;
                    out.max_diff = diff;
                    out.stratum_a = *va >= *vb ? a : b;
                    out.stratum_b = *va >= *vb ? b : a;
                    if (measure == DominanceMeasure::CpPerValue) out.value = j;
                }
            }
        }
    }
    if (!found) {
        throw UndefinedMeasureError("dominance differences need at least two non-empty strata");
    }
    const std::size_t j = out.value.value_or(0);
    out.ci = stats::bootstrap_diff_ci(obs[*out.stratum_a][j], obs[*out.stratum_b][j], bootstrap,
                                      j);
    out.significant = out.ci.ci_low > 1e-12 || out.ci.ci_high < -1e-12;
    return out;
}

}  // namespace covfair
