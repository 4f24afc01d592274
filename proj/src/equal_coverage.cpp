#include "covfair/equal_coverage.hpp"

#include <cmath>

#include "covfair/errors.hpp"

namespace covfair {

namespace {

void check_defined(const CoverageMatrix& matrix, const Sample& sample) {
    if (sample.documents.empty()) {
        throw UndefinedMeasureError("sample " + sample.id + " has no documents");
    }
    if (sample.summary_units.empty()) {
        throw UndefinedMeasureError("sample " + sample.id + " has no summary units");
    }
    matrix.validate_against(sample);
}

}  // namespace

double attribute_coverage(const CoverageMatrix& matrix, const Sample& sample, ValueIndex k) {
    check_defined(matrix, sample);
    double sum = 0.0;
    std::size_t docs = 0;
    for (std::size_t i = 0; i < sample.documents.size(); ++i) {
        if (sample.documents[i].attribute != k) continue;
        ++docs;
        for (std::size_t j = 0; j < matrix.cols(); ++j) sum += matrix.at(i, j);
    }
    if (docs == 0) {
        throw AbsentValueError("sample " + sample.id + " has no document with value index " +
                               std::to_string(k));
    }
    return sum / (static_cast<double>(docs) * static_cast<double>(matrix.cols()));
}

double doc_coverage(const CoverageMatrix& matrix, const Sample& sample) {
    check_defined(matrix, sample);
    double sum = 0.0;
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        for (std::size_t j = 0; j < matrix.cols(); ++j) sum += matrix.at(i, j);
    }
    return sum / (static_cast<double>(matrix.rows()) * static_cast<double>(matrix.cols()));
}

EcResult equal_coverage(const CoverageMatrix& matrix, const Sample& sample,
                        const AttributeSchema& schema) {
    EcResult r;
    r.sample_id = sample.id;
    r.doc_coverage = doc_coverage(matrix, sample);
    r.per_value_coverage.assign(schema.size(), std::nullopt);
    const auto counts = sample.value_counts(schema.size());
    double total = 0.0;
    for (ValueIndex k = 0; k < schema.size(); ++k) {
        if (counts[k] == 0) continue;
        double pk = attribute_coverage(matrix, sample, k);
        r.per_value_coverage[k] = pk;
        r.present_values.push_back(k);
        total += std::abs(r.doc_coverage - pk);
    }
    r.ec = total / static_cast<double>(r.present_values.size());
    return r;
}

CorpusEc corpus_ec(const Corpus& corpus, const std::vector<CoverageMatrix>& matrices) {
    if (corpus.samples.empty()) throw UndefinedMeasureError("EC(G) of an empty corpus");
    if (matrices.size() != corpus.samples.size()) {
        throw DimensionError("expected one coverage matrix per sample");
    }
    CorpusEc out;
    double sum = 0.0;
    for (std::size_t s = 0; s < corpus.samples.size(); ++s) {
        out.samples.push_back(equal_coverage(matrices[s], corpus.samples[s], corpus.schema));
        sum += out.samples.back().ec;
    }
    out.ec = sum / static_cast<double>(corpus.samples.size());
    return out;
}

}  // namespace covfair
