#include "covfair/entailment.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>
#include <unordered_map>

#include "covfair/errors.hpp"
#include "covfair/text.hpp"
#include "http_json.hpp"

namespace covfair {

double EntailmentProvider::entail_one(const std::string& premise, const std::string& hypothesis) {
    EntailmentPair pair{premise, hypothesis};
    return entail(std::span<const EntailmentPair>(&pair, 1)).at(0);
}

// ---------------------------------------------------------------------------
// Lexical baseline

double lexical_entailment(std::string_view premise, std::string_view hypothesis) {
    auto hyp = text::split_words(text::fold_case(hypothesis));
    if (hyp.empty()) return 0.0;
    std::unordered_map<std::string, std::size_t> available;
    for (auto& w : text::split_words(text::fold_case(premise))) ++available[w];
    std::size_t matched = 0;
    for (const auto& w : hyp) {
        auto it = available.find(w);
        if (it != available.end() && it->second > 0) {
            --it->second;
            ++matched;
        }
    }
    return static_cast<double>(matched) / static_cast<double>(hyp.size());
}

std::vector<double> LexicalProvider::entail(std::span<const EntailmentPair> pairs) {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(lexical_entailment(p.premise, p.hypothesis));
    return out;
}

// ---------------------------------------------------------------------------
// Remote provider

void RemoteConfig::apply_environment() {
    if (const char* e = std::getenv("COVFAIR_ENDPOINT"); e != nullptr && *e != '\0') endpoint = e;
    if (const char* t = std::getenv("COVFAIR_AUTH_TOKEN"); t != nullptr && *t != '\0') {
        auth_token = t;
    }
}

RemoteProvider::RemoteProvider(RemoteConfig config) : config_(std::move(config)) {
    detail::parse_endpoint(config_.endpoint);
    if (config_.batch_size == 0) throw ConfigError("remote batch size must be >= 1");
    if (config_.max_in_flight == 0) throw ConfigError("remote max in-flight must be >= 1");
}

std::string RemoteProvider::identity() const {
    return "remote:" + config_.endpoint + (model_.empty() ? "" : "#" + model_);
}

namespace {

detail::HttpOptions http_options(const RemoteConfig& c) {
    detail::HttpOptions o;
    o.auth_token = c.auth_token;
    o.max_retries = c.max_retries;
    o.initial_backoff = c.initial_backoff;
    o.timeout = c.timeout;
    return o;
}

}  // namespace

std::string RemoteProvider::health() {
    auto reply = detail::get_json(config_.endpoint, "/health", http_options(config_));
    if (reply.value("status", "") != "ok") {
        throw TransportError("entailment service at " + config_.endpoint + " is not ready");
    }
    model_ = reply.value("model", "");
    return model_;
}

std::vector<double> RemoteProvider::entail_batch(std::span<const EntailmentPair> pairs) {
    nlohmann::json body;
    body["pairs"] = nlohmann::json::array();
    for (const auto& p : pairs) {
        body["pairs"].push_back({{"premise", p.premise}, {"hypothesis", p.hypothesis}});
    }
    auto reply = detail::post_json(config_.endpoint, "/v1/entail", body, http_options(config_));
    auto it = reply.find("probs");
    if (it == reply.end() || !it->is_array() || it->size() != pairs.size()) {
        throw TransportError("entailment reply does not carry " + std::to_string(pairs.size()) +
                             " probabilities");
    }
    std::vector<double> probs;
    probs.reserve(pairs.size());
    for (const auto& v : *it) {
        if (!v.is_number()) throw TransportError("entailment reply has a non-numeric probability");
        double p = v.get<double>();
        if (!(p >= 0.0 && p <= 1.0)) {
            throw TransportError("entailment reply probability outside [0,1]");
        }
        probs.push_back(p);
    }
    return probs;
}

std::vector<double> RemoteProvider::entail(std::span<const EntailmentPair> pairs) {
    std::vector<double> out(pairs.size());
    const std::size_t batches = (pairs.size() + config_.batch_size - 1) / config_.batch_size;
    // Batches are dispatched in waves of at most max_in_flight requests and
    // written back by position.
    for (std::size_t first = 0; first < batches; first += config_.max_in_flight) {
        const std::size_t last = std::min(batches, first + config_.max_in_flight);
        std::vector<std::future<std::vector<double>>> wave;
        for (std::size_t b = first; b < last; ++b) {
            auto begin = b * config_.batch_size;
            auto len = std::min(config_.batch_size, pairs.size() - begin);
            wave.push_back(std::async(std::launch::async, [this, pairs, begin, len] {
                return entail_batch(pairs.subspan(begin, len));
            }));
        }
        for (std::size_t b = first; b < last; ++b) {
            auto probs = wave[b - first].get();
            std::copy(probs.begin(), probs.end(), out.begin() + static_cast<std::ptrdiff_t>(b * config_.batch_size));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cache

std::optional<double> EntailmentCache::find(const std::string& key) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void EntailmentCache::insert(const std::string& key, double prob) {
    std::lock_guard lock(mutex_);
    entries_[key] = prob;
}

std::size_t EntailmentCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::string EntailmentCache::key(const std::string& provider, std::string_view premise,
                                 std::string_view hypothesis) {
    return text::hex64(text::content_hash(provider)) + ":" +
           text::hex64(text::content_hash(premise)) + ":" +
           text::hex64(text::content_hash(hypothesis));
}

void EntailmentCache::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return;
    std::string line;
    std::size_t line_no = 0;
    std::lock_guard lock(mutex_);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            entries_[j.at("key").get<std::string>()] = j.at("prob").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void EntailmentCache::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write cache " + path.string());
    std::lock_guard lock(mutex_);
    for (const auto& [key, prob] : entries_) {
        nlohmann::ordered_json j;
        j["key"] = key;
        j["prob"] = prob;
        out << j.dump() << '\n';
    }
}

CachedProvider::CachedProvider(EntailmentProvider& inner, EntailmentCache& cache)
    : inner_(inner), cache_(cache) {}

std::vector<double> CachedProvider::entail(std::span<const EntailmentPair> pairs) {
    const std::string id = inner_.identity();
    std::vector<double> out(pairs.size());
    std::vector<std::string> keys(pairs.size());
    std::vector<std::size_t> missing;
    std::vector<EntailmentPair> to_score;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        keys[i] = EntailmentCache::key(id, pairs[i].premise, pairs[i].hypothesis);
        if (auto hit = cache_.find(keys[i])) {
            out[i] = *hit;
            ++hits_;
        } else {
            missing.push_back(i);
            to_score.push_back(pairs[i]);
        }
    }
    if (!to_score.empty()) {
        auto scored = inner_.entail(to_score);
        for (std::size_t m = 0; m < missing.size(); ++m) {
            out[missing[m]] = scored[m];
            cache_.insert(keys[missing[m]], scored[m]);
        }
        misses_ += missing.size();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Chunking and coverage

std::string ChunkPolicy::label() const {
    return max_words == 1 ? std::string("sent") : std::to_string(max_words);
}

void ChunkPolicy::validate() const {
    if (max_words < 1) throw ConfigError("chunk size must be at least one word");
}

std::vector<std::string> chunk_document(const Document& doc, const ChunkPolicy& policy) {
    policy.validate();
    const std::vector<std::string> derived =
        doc.sentences.empty() ? text::split_sentences(doc.text) : std::vector<std::string>{};
    const auto& sentences = doc.sentences.empty() ? derived : doc.sentences;

    std::vector<std::string> chunks;
    std::vector<std::string> current;
    std::size_t current_words = 0;
    for (const auto& sentence : sentences) {
        const std::size_t w = text::word_count(sentence);
        if (!current.empty() && current_words + w > policy.max_words) {
            chunks.push_back(text::join(current, " "));
            current.clear();
            current_words = 0;
        }
        current.push_back(sentence);
        current_words += w;
    }
    if (!current.empty()) chunks.push_back(text::join(current, " "));
    return chunks;
}

double coverage_prob(std::span<const std::string> chunks, const std::string& unit,
                     EntailmentProvider& provider) {
    if (text::normalize_whitespace(unit).empty()) {
        throw PreconditionError("summary unit is empty");
    }
    if (chunks.empty()) return 0.0;
    std::vector<EntailmentPair> pairs;
    pairs.reserve(chunks.size());
    for (const auto& c : chunks) pairs.push_back({c, unit});
    auto probs = provider.entail(pairs);
    double best = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) throw RangeError("provider returned probability outside [0,1]");
        best = std::max(best, p);
    }
    return best;
}

double coverage_prob(const Document& doc, const std::string& unit, EntailmentProvider& provider,
                     const ChunkPolicy& policy) {
    auto chunks = doc.chunks.empty() ? chunk_document(doc, policy) : doc.chunks;
    return coverage_prob(chunks, unit, provider);
}

CoverageMatrix build_matrix(const Sample& sample, EntailmentProvider& provider,
                            const ChunkPolicy& policy) {
    if (sample.summary_units.empty()) {
        throw PreconditionError("sample " + sample.id + " has no summary units");
    }
    std::vector<std::string> doc_ids;
    for (const auto& d : sample.documents) doc_ids.push_back(d.id);
    CoverageMatrix m(sample.id, std::move(doc_ids), sample.summary_units.size());
    for (std::size_t i = 0; i < sample.documents.size(); ++i) {
        const Document& doc = sample.documents[i];
        auto chunks = doc.chunks.empty() ? chunk_document(doc, policy) : doc.chunks;
        for (std::size_t j = 0; j < sample.summary_units.size(); ++j) {
            try {
                m.at(i, j) = coverage_prob(chunks, sample.summary_units[j], provider);
            } catch (const Error& e) {
                const std::string ctx = "sample " + sample.id + ", document " + doc.id +
                                        ", unit " + std::to_string(j) + ": " + e.what();
                if (e.category() == ErrorCategory::Transport) throw TransportError(ctx);
                if (dynamic_cast<const RangeError*>(&e) != nullptr) throw RangeError(ctx);
                throw PreconditionError(ctx);
            }
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Precomputed matrices

PrecomputedCoverage::PrecomputedCoverage(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError("precomputed matrix directory not found: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) add(read_matrix(f));
}

void PrecomputedCoverage::add(CoverageMatrix m) {
    m.validate_range();
    std::string id = m.sample_id();
    if (!matrices_.emplace(id, std::move(m)).second) {
        throw ValidationError("duplicate precomputed matrix for sample " + id);
    }
}

bool PrecomputedCoverage::contains(const std::string& sample_id) const {
    return matrices_.count(sample_id) != 0;
}

const CoverageMatrix& PrecomputedCoverage::matrix(const std::string& sample_id) const {
    auto it = matrices_.find(sample_id);
    if (it == matrices_.end()) {
        throw LookupError("no precomputed matrix for sample " + sample_id);
    }
    return it->second;
}

double PrecomputedCoverage::lookup(const std::string& sample_id, const std::string& doc_id,
                                   std::size_t unit_index) const {
    const CoverageMatrix& m = matrix(sample_id);
    const auto& ids = m.doc_ids();
    auto row = std::find(ids.begin(), ids.end(), doc_id);
    if (row == ids.end()) {
        throw LookupError("precomputed matrix for sample " + sample_id + " has no document " +
                          doc_id);
    }
    if (unit_index >= m.cols()) {
        throw LookupError("precomputed matrix for sample " + sample_id + " has no unit " +
                          std::to_string(unit_index));
    }
    return m.at(static_cast<std::size_t>(row - ids.begin()), unit_index);
}

CoverageMatrix build_matrix(const Sample& sample, const PrecomputedCoverage& provider) {
    if (sample.summary_units.empty()) {
        throw PreconditionError("sample " + sample.id + " has no summary units");
    }
    CoverageMatrix m = provider.matrix(sample.id);
    m.validate_against(sample);
    return m;
}

// ---------------------------------------------------------------------------

ChunkTuningResult tune_chunk_size(const Corpus& corpus, EntailmentProvider& provider,
                                  const std::vector<ChunkPolicy>& candidates,
                                  double attribution_threshold) {
    if (candidates.empty()) throw ConfigError("no candidate chunk sizes");
    ChunkTuningResult result;
    double best_fraction = -1.0;
    for (const auto& policy : candidates) {
        policy.validate();
        std::size_t total = 0;
        std::size_t identified = 0;
        for (const auto& sample : corpus.samples) {
            if (sample.summary_units.empty()) {
                throw PreconditionError("sample " + sample.id + " has no summary units");
            }
            std::vector<std::vector<std::string>> chunks;
            for (const auto& d : sample.documents) chunks.push_back(chunk_document(d, policy));
            for (const auto& unit : sample.summary_units) {
                double best = 0.0;
                for (const auto& c : chunks) best = std::max(best, coverage_prob(c, unit, provider));
                ++total;
                if (best > attribution_threshold) ++identified;
            }
        }
        double fraction = total == 0 ? 0.0 : static_cast<double>(identified) / total;
        result.fractions.emplace_back(policy, fraction);
        if (fraction > best_fraction) {
            best_fraction = fraction;
            result.best = policy;
        }
    }
    return result;
}

}  // namespace covfair
