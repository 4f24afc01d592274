#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "covfair/corpus.hpp"
#include "covfair/rng.hpp"

namespace testing {

using namespace covfair;

inline AttributeSchema schema_of(std::size_t k) {
    AttributeSchema s;
    s.name = "attr";
    for (std::size_t i = 0; i < k; ++i) s.values.push_back("v" + std::to_string(i));
    return s;
}

// Documents d0..dn-1 with the given values and placeholder units u0..um-1.
inline Sample make_sample(const std::string& id, const std::vector<ValueIndex>& attrs,
                          std::size_t units) {
    Sample s;
    s.id = id;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        s.documents.push_back(Document{"d" + std::to_string(i), "document " + std::to_string(i),
                                       attrs[i], {}, {}});
    }
    s.summary_text = "summary";
    for (std::size_t j = 0; j < units; ++j) s.summary_units.push_back("u" + std::to_string(j));
    return s;
}

inline CoverageMatrix matrix_of(const Sample& s, const std::vector<std::vector<double>>& rows) {
    return CoverageMatrix::from_rows(s, rows);
}

// A random sample with n docs, m units, K values and uniform entries; probabilities
// are sometimes snapped to 0 or 1 to exercise the edges.
inline std::pair<Sample, CoverageMatrix> random_sample(Rng& rng, const std::string& id,
                                                       std::size_t n, std::size_t m,
                                                       std::size_t k) {
    std::vector<ValueIndex> attrs(n);
    for (auto& a : attrs) a = rng.uniform_index(k);
    Sample s = make_sample(id, attrs, m);
    std::vector<std::vector<double>> rows(n, std::vector<double>(m));
    for (auto& r : rows) {
        for (auto& v : r) {
            double u = rng.uniform01();
            v = u < 0.1 ? 0.0 : (u > 0.9 ? 1.0 : rng.uniform01());
        }
    }
    return {s, CoverageMatrix::from_rows(s, rows)};
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("covfair-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testing
