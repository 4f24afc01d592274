#pragma once

#include <optional>
#include <vector>

#include "covfair/corpus.hpp"

namespace covfair {

/// Summary-level Equal Coverage of one sample.
struct EcResult {
    std::string sample_id;
    /// p(d,s|a=k) per value; nullopt for values with no documents.
    std::vector<std::optional<double>> per_value_coverage;
    double doc_coverage = 0.0;  // p(d,s)
    double ec = 0.0;
    std::vector<ValueIndex> present_values;

    /// True when some schema value has no documents in this sample, i.e. the
    /// average ran over fewer than K values.
    bool has_absent_values() const { return present_values.size() < per_value_coverage.size(); }
};

/// Mean of p(d_i, s_j) over documents with value k and all units.
/// Throws AbsentValueError when no document has value k.
double attribute_coverage(const CoverageMatrix& matrix, const Sample& sample, ValueIndex k);

/// Grand mean of the matrix.
double doc_coverage(const CoverageMatrix& matrix, const Sample& sample);

/// EC(D,S): mean absolute deviation of p(d,s|a=k) from p(d,s), averaged over
/// the values present in the sample.
EcResult equal_coverage(const CoverageMatrix& matrix, const Sample& sample,
                        const AttributeSchema& schema);

struct CorpusEc {
    double ec = 0.0;  // EC(G)
    std::vector<EcResult> samples;
};

/// Unweighted mean of per-sample EC. `matrices` is parallel to corpus.samples.
CorpusEc corpus_ec(const Corpus& corpus, const std::vector<CoverageMatrix>& matrices);

}  // namespace covfair
