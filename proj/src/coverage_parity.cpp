#include "covfair/coverage_parity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "covfair/errors.hpp"

namespace covfair {

namespace {

constexpr double kZeroTolerance = 1e-12;

void check_defined(const CoverageMatrix& matrix, const Sample& sample) {
    if (sample.summary_units.empty()) {
        throw UndefinedMeasureError("sample " + sample.id + " has no summary units");
    }
    matrix.validate_against(sample);
}

}  // namespace

double doc_summary_coverage(const CoverageMatrix& matrix, std::size_t row) {
    if (matrix.cols() == 0) throw UndefinedMeasureError("coverage matrix has no units");
    if (row >= matrix.rows()) throw DimensionError("row out of range");
    double sum = 0.0;
    for (std::size_t j = 0; j < matrix.cols(); ++j) sum += matrix.at(row, j);
    return sum / static_cast<double>(matrix.cols());
}

std::vector<CoverageDiff> coverage_diffs(const CoverageMatrix& matrix, const Sample& sample) {
    check_defined(matrix, sample);
    std::vector<double> row_means(matrix.rows());
    double sum = 0.0;
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        row_means[i] = doc_summary_coverage(matrix, i);
        sum += row_means[i];
    }
    const double overall = sum / static_cast<double>(matrix.rows());
    std::vector<CoverageDiff> out;
    out.reserve(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        out.push_back({sample.documents[i].id, sample.documents[i].attribute,
                       row_means[i] - overall});
    }
    return out;
}

std::vector<std::vector<double>> pool_coverage_diffs(const Corpus& corpus,
                                                     const std::vector<CoverageMatrix>& matrices) {
    if (matrices.size() != corpus.samples.size()) {
        throw DimensionError("expected one coverage matrix per sample");
    }
    std::vector<std::vector<double>> pools(corpus.schema.size());
    for (std::size_t s = 0; s < corpus.samples.size(); ++s) {
        for (const auto& d : coverage_diffs(matrices[s], corpus.samples[s])) {
            pools.at(d.value).push_back(d.c);
        }
    }
    return pools;
}

CpResult coverage_parity_from_pools(const std::vector<std::vector<double>>& pools,
                                    const AttributeSchema& schema,
                                    const stats::BootstrapOptions* bootstrap) {
    if (pools.size() != schema.size()) throw DimensionError("one pool per schema value expected");
    std::string missing;
    for (ValueIndex k = 0; k < pools.size(); ++k) {
        if (pools[k].empty()) missing += (missing.empty() ? "" : ", ") + schema.label(k);
    }
    if (!missing.empty()) {
        throw CoverageError("no document in the corpus has value(s): " + missing);
    }

    CpResult r;
    r.per_value.resize(pools.size());
    double total = 0.0;
    for (ValueIndex k = 0; k < pools.size(); ++k) {
        auto& v = r.per_value[k];
        v.count = pools[k].size();
        v.mean_diff = stats::mean(pools[k]);
        v.ci_low = v.ci_high = v.mean_diff;
        if (bootstrap != nullptr) {
            auto ci = stats::bootstrap_mean_ci(pools[k], *bootstrap, k);
            v.ci_low = ci.ci_low;
            v.ci_high = ci.ci_high;
            // Rounding residue around an exact zero is not evidence of bias.
            v.significant = ci.ci_low > kZeroTolerance || ci.ci_high < -kZeroTolerance;
        }
        total += std::abs(v.mean_diff);
    }
    r.cp = total / static_cast<double>(pools.size());
    if (r.cp > kZeroTolerance) {
        ValueIndex over = 0;
        ValueIndex under = 0;
        for (ValueIndex k = 1; k < pools.size(); ++k) {
            if (r.per_value[k].mean_diff > r.per_value[over].mean_diff) over = k;
            if (r.per_value[k].mean_diff < r.per_value[under].mean_diff) under = k;
        }
        r.most_over = over;
        r.most_under = under;
    }
    return r;
}

CpResult coverage_parity(const Corpus& corpus, const std::vector<CoverageMatrix>& matrices,
                         const stats::BootstrapOptions& bootstrap) {
    return coverage_parity_from_pools(pool_coverage_diffs(corpus, matrices), corpus.schema,
                                      &bootstrap);
}

std::map<std::string, double> overall_score(const SystemScores& per_dataset) {
    if (per_dataset.empty()) throw PreconditionError("overall score needs at least one dataset");
    std::set<std::string> systems;
    for (const auto& [name, scores] : per_dataset.begin()->second) systems.insert(name);
    for (const auto& [dataset, scores] : per_dataset) {
        std::erase_if(systems, [&](const std::string& s) { return scores.count(s) == 0; });
    }
    if (systems.size() < 2) {
        throw PreconditionError("overall score needs at least two systems scored on every dataset");
    }
    std::map<std::string, double> overall;
    for (const auto& s : systems) overall[s] = 0.0;
    for (const auto& [dataset, scores] : per_dataset) {
        double lo = scores.at(*systems.begin());
        double hi = lo;
        for (const auto& s : systems) {
            lo = std::min(lo, scores.at(s));
            hi = std::max(hi, scores.at(s));
        }
        if (hi == lo) continue;
        for (const auto& s : systems) overall[s] += (scores.at(s) - lo) / (hi - lo);
    }
    for (auto& [s, v] : overall) v /= static_cast<double>(per_dataset.size());
    return overall;
}

}  // namespace covfair
