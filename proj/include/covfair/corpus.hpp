#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace covfair {

/// Attribute values are dense indices into AttributeSchema::values.
using ValueIndex = std::size_t;

struct AttributeSchema {
    std::string name;
    std::vector<std::string> values;

    std::size_t size() const { return values.size(); }
    const std::string& label(ValueIndex k) const { return values.at(k); }
    std::optional<ValueIndex> find(std::string_view label) const;

    /// Throws SchemaError unless K >= 2 and labels are unique and non-empty.
    void validate() const;
};

struct Document {
    std::string id;
    std::string text;
    ValueIndex attribute = 0;
    std::vector<std::string> sentences;  // derived
    std::vector<std::string> chunks;     // derived
};

struct Sample {
    std::string id;
    std::vector<Document> documents;
    std::string summary_text;
    std::vector<std::string> summary_units;

    /// Number of documents per attribute value, length K.
    std::vector<std::size_t> value_counts(std::size_t num_values) const;
};

struct Corpus {
    AttributeSchema schema;
    std::vector<Sample> samples;

    const Sample* find(std::string_view sample_id) const;
    /// Checks schema, id uniqueness and attribute ranges.
    void validate() const;
};

/// Row-major matrix of p(d_i, s_j): one row per document, one column per
/// summary unit.
class CoverageMatrix {
public:
    CoverageMatrix() = default;
    CoverageMatrix(std::string sample_id, std::vector<std::string> doc_ids, std::size_t units);

    const std::string& sample_id() const { return sample_id_; }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    std::size_t rows() const { return doc_ids_.size(); }
    std::size_t cols() const { return cols_; }

    double at(std::size_t i, std::size_t j) const { return probs_[i * cols_ + j]; }
    double& at(std::size_t i, std::size_t j) { return probs_[i * cols_ + j]; }

    /// Throws RangeError when any entry is outside [0,1] or not finite.
    void validate_range() const;
    /// Throws DimensionError unless rows/doc ids/columns agree with the sample.
    void validate_against(const Sample& sample) const;

    /// Builds a matrix for `sample` from nested rows.
    static CoverageMatrix from_rows(const Sample& sample,
                                    const std::vector<std::vector<double>>& rows);

    friend bool operator==(const CoverageMatrix&, const CoverageMatrix&) = default;

private:
    std::string sample_id_;
    std::vector<std::string> doc_ids_;
    std::size_t cols_ = 0;
    std::vector<double> probs_;
};

AttributeSchema read_schema(const std::filesystem::path& path);
void write_schema(const AttributeSchema& schema, const std::filesystem::path& path);

enum class CorpusFormat { Jsonl };

/// Reads one sample per line. Blank lines are skipped.
Corpus ingest_corpus(const std::filesystem::path& path, const AttributeSchema& schema,
                     CorpusFormat format = CorpusFormat::Jsonl);
Corpus parse_corpus(std::istream& in, const AttributeSchema& schema);

void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

void write_matrix(const CoverageMatrix& m, const std::filesystem::path& path);
std::string serialize_matrix(const CoverageMatrix& m);
CoverageMatrix read_matrix(const std::filesystem::path& path);
/// Reads and checks dimensions against the sample the matrix belongs to.
CoverageMatrix read_matrix(const std::filesystem::path& path, const Sample& sample);
CoverageMatrix parse_matrix(std::string_view json);

/// Fills Document::sentences from the text when absent.
void derive_sentences(Document& doc);
void derive_sentences(Corpus& corpus);

}  // namespace covfair
