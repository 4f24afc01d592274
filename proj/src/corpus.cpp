#include "covfair/corpus.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "covfair/errors.hpp"
#include "covfair/text.hpp"
#include "json.hpp"

namespace covfair {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::optional<ValueIndex> AttributeSchema::find(std::string_view label) const {
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (values[k] == label) return k;
    }
    return std::nullopt;
}

void AttributeSchema::validate() const {
    if (values.size() < 2) {
        throw SchemaError("schema '" + name + "' needs at least two values, has " +
                          std::to_string(values.size()));
    }
    std::set<std::string> seen;
    for (const auto& v : values) {
        if (v.empty()) throw SchemaError("schema '" + name + "' has an empty value label");
        if (!seen.insert(v).second) {
            throw SchemaError("schema '" + name + "' repeats value label " + v);
        }
    }
}

std::vector<std::size_t> Sample::value_counts(std::size_t num_values) const {
    std::vector<std::size_t> counts(num_values, 0);
    for (const auto& d : documents) counts.at(d.attribute) += 1;
    return counts;
}

const Sample* Corpus::find(std::string_view sample_id) const {
    for (const auto& s : samples) {
        if (s.id == sample_id) return &s;
    }
    return nullptr;
}

void Corpus::validate() const {
    schema.validate();
    std::set<std::string> sample_ids;
    for (const auto& s : samples) {
        if (!sample_ids.insert(s.id).second) {
            throw ValidationError("duplicate sample id " + s.id);
        }
        if (s.documents.empty()) {
            throw ValidationError("sample " + s.id + " has no documents");
        }
        std::set<std::string> doc_ids;
        for (const auto& d : s.documents) {
            if (!doc_ids.insert(d.id).second) {
                throw ValidationError("duplicate document id " + d.id + " in sample " + s.id);
            }
            if (d.attribute >= schema.size()) {
                throw SchemaError("document " + d.id + " in sample " + s.id +
                                  " has attribute index out of range");
            }
            if (text::normalize_whitespace(d.text).empty()) {
                throw ValidationError("document " + d.id + " in sample " + s.id +
                                      " has empty text");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// CoverageMatrix

CoverageMatrix::CoverageMatrix(std::string sample_id, std::vector<std::string> doc_ids,
                               std::size_t units)
    : sample_id_(std::move(sample_id)),
      doc_ids_(std::move(doc_ids)),
      cols_(units),
      probs_(doc_ids_.size() * units, 0.0) {}

void CoverageMatrix::validate_range() const {
    for (std::size_t i = 0; i < rows(); ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            double p = at(i, j);
            if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
                std::ostringstream msg;
                msg << "coverage matrix for sample " << sample_id_ << " has entry " << p
                    << " outside [0,1] at (" << i << ", " << j << ")";
                throw RangeError(msg.str());
            }
        }
    }
}

void CoverageMatrix::validate_against(const Sample& sample) const {
    if (sample_id_ != sample.id) {
        throw DimensionError("matrix sample id " + sample_id_ + " does not match sample " +
                             sample.id);
    }
    if (rows() != sample.documents.size()) {
        throw DimensionError("matrix for sample " + sample.id + " has " +
                             std::to_string(rows()) + " rows but the sample has " +
                             std::to_string(sample.documents.size()) + " documents");
    }
    for (std::size_t i = 0; i < rows(); ++i) {
        if (doc_ids_[i] != sample.documents[i].id) {
            throw DimensionError("matrix row " + std::to_string(i) + " is document " +
                                 doc_ids_[i] + ", expected " + sample.documents[i].id);
        }
    }
    if (!sample.summary_units.empty() && cols_ != sample.summary_units.size()) {
        throw DimensionError("matrix for sample " + sample.id + " has " +
                             std::to_string(cols_) + " columns but the sample has " +
                             std::to_string(sample.summary_units.size()) + " summary units");
    }
}

CoverageMatrix CoverageMatrix::from_rows(const Sample& sample,
                                         const std::vector<std::vector<double>>& rows) {
    std::vector<std::string> ids;
    for (const auto& d : sample.documents) ids.push_back(d.id);
    if (rows.size() != ids.size()) {
        throw DimensionError("expected " + std::to_string(ids.size()) + " rows, got " +
                             std::to_string(rows.size()));
    }
    std::size_t cols = rows.empty() ? 0 : rows.front().size();
    CoverageMatrix m(sample.id, std::move(ids), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw DimensionError("ragged coverage rows");
        for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = rows[i][j];
    }
    m.validate_range();
    return m;
}

// ---------------------------------------------------------------------------
// Schema and corpus files

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

std::vector<std::string> string_list(const json& j, const std::string& field) {
    if (!j.is_array()) throw ParseError("field '" + field + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& item : j) {
        if (!item.is_string()) throw ParseError("field '" + field + "' must contain strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

const json& require(const json& obj, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end()) throw ParseError(std::string("missing field '") + field + "'");
    return *it;
}

std::string require_string(const json& obj, const char* field) {
    const json& v = require(obj, field);
    if (!v.is_string()) throw ParseError(std::string("field '") + field + "' must be a string");
    return v.get<std::string>();
}

Sample parse_sample(const json& j, const AttributeSchema& schema) {
    if (!j.is_object()) throw ParseError("sample record must be a JSON object");
    Sample s;
    s.id = require_string(j, "id");
    s.summary_text = require_string(j, "summary");
    const json& docs = require(j, "documents");
    if (!docs.is_array()) throw ParseError("field 'documents' must be an array");
    for (const auto& dj : docs) {
        if (!dj.is_object()) throw ParseError("document record must be a JSON object");
        Document d;
        d.id = require_string(dj, "id");
        d.text = require_string(dj, "text");
        std::string label = require_string(dj, "attribute");
        auto k = schema.find(label);
        if (!k) {
            throw SchemaError("unknown attribute value '" + label + "' for schema '" +
                              schema.name + "'");
        }
        d.attribute = *k;
        if (auto it = dj.find("sentences"); it != dj.end()) {
            d.sentences = string_list(*it, "sentences");
        }
        s.documents.push_back(std::move(d));
    }
    if (auto it = j.find("summary_units"); it != j.end() && !it->is_null()) {
        s.summary_units = string_list(*it, "summary_units");
    }
    return s;
}

}  // namespace

AttributeSchema read_schema(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw ConfigError("schema file not found: " + path.string());
    }
    AttributeSchema schema;
    try {
        json j = json::parse(read_file(path));
        schema.name = require_string(j, "name");
        schema.values = string_list(require(j, "values"), "values");
    } catch (const json::exception& e) {
        throw ParseError("schema " + path.string() + ": " + e.what());
    }
    schema.validate();
    return schema;
}

void write_schema(const AttributeSchema& schema, const std::filesystem::path& path) {
    ordered_json j;
    j["name"] = schema.name;
    j["values"] = schema.values;
    write_file(path, j.dump() + "\n");
}

Corpus parse_corpus(std::istream& in, const AttributeSchema& schema) {
    schema.validate();
    Corpus corpus;
    corpus.schema = schema;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::normalize_whitespace(line).empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        Sample s;
        try {
            s = parse_sample(json::parse(line), schema);
        } catch (const json::exception& e) {
            throw ParseError(where + e.what());
        } catch (const ParseError& e) {
            throw ParseError(where + e.what());
        } catch (const SchemaError& e) {
            throw SchemaError(where + e.what());
        }
        if (!ids.insert(s.id).second) {
            throw ValidationError(where + "duplicate sample id " + s.id);
        }
        corpus.samples.push_back(std::move(s));
    }
    try {
        corpus.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("corpus: ") + e.what());
    }
    return corpus;
}

Corpus ingest_corpus(const std::filesystem::path& path, const AttributeSchema& schema,
                     CorpusFormat format) {
    if (format != CorpusFormat::Jsonl) throw ConfigError("unsupported corpus format");
    std::ifstream in(path);
    if (!in) throw ConfigError("corpus file not found: " + path.string());
    return parse_corpus(in, schema);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    for (const auto& s : corpus.samples) {
        ordered_json j;
        j["id"] = s.id;
        ordered_json docs = ordered_json::array();
        for (const auto& d : s.documents) {
            ordered_json dj;
            dj["id"] = d.id;
            dj["text"] = d.text;
            dj["attribute"] = corpus.schema.label(d.attribute);
            if (!d.sentences.empty()) dj["sentences"] = d.sentences;
            docs.push_back(std::move(dj));
        }
        j["documents"] = std::move(docs);
        j["summary"] = s.summary_text;
        if (!s.summary_units.empty()) j["summary_units"] = s.summary_units;
        out << j.dump() << '\n';
    }
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ostringstream ss;
    write_corpus(corpus, ss);
    write_file(path, ss.str());
}

// ---------------------------------------------------------------------------
// Matrix files

std::string serialize_matrix(const CoverageMatrix& m) {
    ordered_json j;
    j["sample_id"] = m.sample_id();
    j["doc_ids"] = m.doc_ids();
    j["unit_index"] = m.cols();
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t j2 = 0; j2 < m.cols(); ++j2) row.push_back(m.at(i, j2));
        rows.push_back(std::move(row));
    }
    j["probs"] = std::move(rows);
    // nlohmann emits the shortest decimal that round-trips, i.e. up to 17
    // significant digits.
    return j.dump() + "\n";
}

void write_matrix(const CoverageMatrix& m, const std::filesystem::path& path) {
    m.validate_range();
    write_file(path, serialize_matrix(m));
}

CoverageMatrix parse_matrix(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("coverage matrix: ") + e.what());
    }
    try {
        std::string sample_id = require_string(j, "sample_id");
        auto doc_ids = string_list(require(j, "doc_ids"), "doc_ids");
        const json& units = require(j, "unit_index");
        if (!units.is_number_unsigned()) {
            throw ParseError("field 'unit_index' must be a non-negative integer");
        }
        auto cols = units.get<std::size_t>();
        const json& probs = require(j, "probs");
        if (!probs.is_array()) throw ParseError("field 'probs' must be an array");
        if (probs.size() != doc_ids.size()) {
            throw DimensionError("coverage matrix for sample " + sample_id + " has " +
                                 std::to_string(probs.size()) + " rows for " +
                                 std::to_string(doc_ids.size()) + " doc ids");
        }
        CoverageMatrix m(sample_id, std::move(doc_ids), cols);
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const json& row = probs[i];
            if (!row.is_array() || row.size() != cols) {
                throw DimensionError("coverage matrix for sample " + sample_id + " row " +
                                     std::to_string(i) + " does not have " +
                                     std::to_string(cols) + " entries");
            }
            for (std::size_t c = 0; c < cols; ++c) {
                if (!row[c].is_number()) throw ParseError("coverage entries must be numbers");
                m.at(i, c) = row[c].get<double>();
            }
        }
        m.validate_range();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("coverage matrix: ") + e.what());
    }
}

CoverageMatrix read_matrix(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw LookupError("matrix file not found: " + path.string());
    return parse_matrix(read_file(path));
}

CoverageMatrix read_matrix(const std::filesystem::path& path, const Sample& sample) {
    CoverageMatrix m = read_matrix(path);
    m.validate_against(sample);
    return m;
}

// ---------------------------------------------------------------------------

void derive_sentences(Document& doc) {
    if (doc.sentences.empty()) doc.sentences = text::split_sentences(doc.text);
}

void derive_sentences(Corpus& corpus) {
    for (auto& s : corpus.samples) {
        for (auto& d : s.documents) derive_sentences(d);
    }
}

}  // namespace covfair
