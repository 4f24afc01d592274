#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "covfair/corpus.hpp"
#include "covfair/stats.hpp"

namespace covfair {

/// p(d_i, s): row mean of the coverage matrix.
double doc_summary_coverage(const CoverageMatrix& matrix, std::size_t row);

struct CoverageDiff {
    std::string doc_id;
    ValueIndex value = 0;
    double c = 0.0;  // p(d_i,s) - p(d,s); positive means covered above the sample average
};

/// c(d_i) for every document of the sample. p(d,s) is taken as the mean of
/// the row means, so the differences of one sample sum to zero.
std::vector<CoverageDiff> coverage_diffs(const CoverageMatrix& matrix, const Sample& sample);

struct ValueParity {
    double mean_diff = 0.0;  // E(C_k)
    std::size_t count = 0;   // |C_k|
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool significant = false;
};

struct CpResult {
    double cp = 0.0;
    std::vector<ValueParity> per_value;  // indexed by ValueIndex
    /// Value with the largest / smallest E(C_k); empty when cp is zero.
    std::optional<ValueIndex> most_over;
    std::optional<ValueIndex> most_under;
};

/// Pools c(d_i) by value over all documents of all samples:
/// C_k per value, in sample order.
std::vector<std::vector<double>> pool_coverage_diffs(const Corpus& corpus,
                                                     const std::vector<CoverageMatrix>& matrices);

/// CP(G) = (1/K) sum_k |E(C_k)|, with a bootstrap CI per value. Throws
/// CoverageError listing values that no document in the corpus carries.
CpResult coverage_parity(const Corpus& corpus, const std::vector<CoverageMatrix>& matrices,
                         const stats::BootstrapOptions& bootstrap = {});

/// CP from already pooled differences; values with an empty pool are an error.
CpResult coverage_parity_from_pools(const std::vector<std::vector<double>>& pools,
                                    const AttributeSchema& schema,
                                    const stats::BootstrapOptions* bootstrap);

/// Dataset -> system -> measure value.
using SystemScores = std::map<std::string, std::map<std::string, double>>;

/// Per dataset, min-max normalize values across systems to [0,1] and average
/// over datasets. Only systems scored on every dataset are ranked. A dataset
/// where all systems tie contributes 0 to everyone.
std::map<std::string, double> overall_score(const SystemScores& per_dataset);

}  // namespace covfair
