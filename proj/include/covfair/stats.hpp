#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace covfair::stats {

struct BootstrapOptions {
    std::size_t resamples = 5000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
};

struct MeanCi {
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool significant = false;  // 0 lies outside [ci_low, ci_high]
};

double mean(std::span<const double> values);

/// Linear-interpolated quantile (R type 7) of sorted values.
double quantile_sorted(std::span<const double> sorted, double q);

/// Percentile bootstrap CI of the mean. `stream` separates independent uses
/// under the same seed; resample r draws from Rng(seed, "bootstrap/<stream>", r).
MeanCi bootstrap_mean_ci(std::span<const double> values, const BootstrapOptions& options,
                         std::uint64_t stream = 0);

/// Bootstrap CI of mean(a) - mean(b) for two independent groups, each
/// resampled with replacement within itself.
MeanCi bootstrap_diff_ci(std::span<const double> a, std::span<const double> b,
                         const BootstrapOptions& options, std::uint64_t stream = 0);

enum class Winner { A, B, Tie };
std::string to_string(Winner w);

struct PairedComparison {
    double mean_diff = 0.0;  // mean(a - b)
    double p_value = 1.0;
    Winner winner = Winner::Tie;
};

/// Paired bootstrap resampling. p is the fraction of resamples whose mean
/// difference does not keep the observed sign. Lower scores are fairer, so a
/// significant negative mean difference makes `a` the winner.
PairedComparison paired_bootstrap_compare(std::span<const double> a, std::span<const double> b,
                                          const BootstrapOptions& options);

/// Average ranks (1-based); ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation with average ranks for ties. Throws when the
/// inputs differ in length, have fewer than two items or are constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace covfair::stats
