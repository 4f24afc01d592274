#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "covfair/corpus.hpp"
#include "covfair/stats.hpp"

namespace covfair {

enum class PrMode { Soft, Hard };

/// Proportional Representation: distance between the attribute distribution
/// attributed to the summary and the distribution of the input documents.
struct PrResult {
    std::string sample_id;
    std::vector<double> summary_dist;  // length K, sums to 1
    std::vector<double> input_dist;    // length K, sums to 1
    double pr = 0.0;                   // (1/K) sum_k |summary_k - input_k|
};

/// Soft mode spreads each unit over documents in proportion to its coverage
/// column (uniform for an all-zero column); hard mode gives the whole unit to
/// the highest-coverage document (lowest index on ties).
PrResult proportional_representation(const CoverageMatrix& matrix, const Sample& sample,
                                     const AttributeSchema& schema, PrMode mode = PrMode::Soft);

/// Samples grouped by the value holding a strict plurality of their documents.
struct DominancePartition {
    std::vector<std::vector<std::string>> strata;  // indexed by ValueIndex
    std::vector<std::string> unassigned;           // plurality ties
};

/// The dominant value of a sample, or nullopt on a plurality tie.
std::optional<ValueIndex> dominant_value(const Sample& sample, std::size_t num_values);
DominancePartition dominance_partition(const Corpus& corpus);

/// Draws n samples, equally many from every non-empty dominance stratum,
/// uniformly without replacement. Output keeps corpus order.
Corpus stratified_sample(const Corpus& corpus, std::size_t n, std::uint64_t seed);

enum class DominanceMeasure { Ec, CpPerValue };

struct DominanceDifference {
    double max_diff = 0.0;
    /// EC mode: EC(G_k) per stratum in per_stratum[k][0]. CP mode:
    /// per_stratum[k][j] = E(C_j) on G_k. Empty strata hold no values.
    std::vector<std::vector<std::optional<double>>> per_stratum;
    /// Strata (and value, in CP mode) attaining max_diff.
    std::optional<ValueIndex> stratum_a;
    std::optional<ValueIndex> stratum_b;
    std::optional<ValueIndex> value;
    stats::MeanCi ci;  // bootstrap CI of the attaining difference
    bool significant = false;
};

/// Maximum difference of EC(G_k) across dominance strata, or of E(C_j)
/// across strata for the same value j. Significance is a bootstrap over
/// samples (EC) or documents (CP) of the attaining pair.
DominanceDifference dominance_differences(const Corpus& corpus,
                                          const std::vector<CoverageMatrix>& matrices,
                                          DominanceMeasure measure,
                                          const stats::BootstrapOptions& bootstrap = {});

}  // namespace covfair
