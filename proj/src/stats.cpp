#include "covfair/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "covfair/errors.hpp"
#include "covfair/rng.hpp"

namespace covfair::stats {

double mean(std::span<const double> values) {
    if (values.empty()) throw PreconditionError("mean of an empty list");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw PreconditionError("quantile of an empty list");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

void check_options(const BootstrapOptions& o) {
    if (o.resamples == 0) throw ConfigError("bootstrap needs at least one resample");
    if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
}

double resampled_mean(std::span<const double> values, Rng& rng) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += values[rng.uniform_index(values.size())];
    return sum / static_cast<double>(values.size());
}

MeanCi percentile_ci(double observed, std::vector<double>& dist, double alpha) {
    std::sort(dist.begin(), dist.end());
    MeanCi ci;
    ci.mean = observed;
    ci.ci_low = quantile_sorted(dist, alpha / 2.0);
    ci.ci_high = quantile_sorted(dist, 1.0 - alpha / 2.0);
    ci.significant = !(ci.ci_low <= 0.0 && 0.0 <= ci.ci_high);
    return ci;
}

}  // namespace

MeanCi bootstrap_mean_ci(std::span<const double> values, const BootstrapOptions& options,
                         std::uint64_t stream) {
    if (values.empty()) throw PreconditionError("bootstrap of an empty list");
    check_options(options);
    const std::string tag = "bootstrap/" + std::to_string(stream);
    std::vector<double> dist(options.resamples);
    for (std::size_t r = 0; r < options.resamples; ++r) {
        Rng rng(options.seed, tag, r);
        dist[r] = resampled_mean(values, rng);
    }
    return percentile_ci(mean(values), dist, options.alpha);
}

MeanCi bootstrap_diff_ci(std::span<const double> a, std::span<const double> b,
                         const BootstrapOptions& options, std::uint64_t stream) {
    if (a.empty() || b.empty()) throw PreconditionError("bootstrap of an empty group");
    check_options(options);
    const std::string tag = "bootstrap-diff/" + std::to_string(stream);
    std::vector<double> dist(options.resamples);
    for (std::size_t r = 0; r < options.resamples; ++r) {
        Rng rng(options.seed, tag, r);
        double ma = resampled_mean(a, rng);
        double mb = resampled_mean(b, rng);
        dist[r] = ma - mb;
    }
    return percentile_ci(mean(a) - mean(b), dist, options.alpha);
}

std::string to_string(Winner w) {
    switch (w) {
        case Winner::A: return "a";
        case Winner::B: return "b";
        case Winner::Tie: return "tie";
    }
    return "tie";
}

PairedComparison paired_bootstrap_compare(std::span<const double> a, std::span<const double> b,
                                          const BootstrapOptions& options) {
    if (a.size() != b.size()) {
        throw DimensionError("paired bootstrap needs equal-length lists, got " +
                             std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    if (a.size() < 2) throw PreconditionError("paired bootstrap needs at least two pairs");
    check_options(options);
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];

    PairedComparison out;
    out.mean_diff = mean(diff);
    if (out.mean_diff == 0.0) return out;  // p = 1, tie

    const bool positive = out.mean_diff > 0.0;
    std::size_t flips = 0;
    for (std::size_t r = 0; r < options.resamples; ++r) {
        Rng rng(options.seed, "paired-bootstrap", r);
        double m = resampled_mean(diff, rng);
        if (positive ? m <= 0.0 : m >= 0.0) ++flips;
    }
    out.p_value = static_cast<double>(flips) / static_cast<double>(options.resamples);
    if (out.p_value < options.alpha) out.winner = positive ? Winner::B : Winner::A;
    return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("spearman needs equal-length lists");
    if (x.size() < 2) throw UndefinedMeasureError("spearman needs at least two pairs");
    auto rx = average_ranks(x);
    auto ry = average_ranks(y);
    const double mx = mean(rx);
    const double my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedMeasureError("spearman is undefined for a constant list");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace covfair::stats
