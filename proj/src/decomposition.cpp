#include "covfair/decomposition.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include "covfair/errors.hpp"
#include "covfair/text.hpp"
#include "http_json.hpp"

namespace covfair {

void DecomposerProvider::validate() const {
    if (kind == Kind::Remote && remote.endpoint.empty()) {
        throw ConfigError("remote decomposer requires an endpoint");
    }
}

namespace {

const std::set<std::string, std::less<>> kConjunctions = {"and", "but", "or", "so", "yet"};

const std::set<std::string, std::less<>> kSubjectStarters = {
    "the", "a", "an", "this", "that", "these", "those", "my", "our", "your", "their",
    "his", "her", "its", "some", "many", "most", "all", "each", "every", "no", "both",
    "several", "few", "other", "others", "i", "we", "you", "they", "he", "she", "it",
    "there", "everyone", "everything", "someone", "something", "nobody", "nothing",
};

const std::set<std::string, std::less<>> kFiniteVerbs = {
    "is", "are", "was", "were", "am", "has", "have", "had", "does", "do", "did",
    "will", "would", "can", "could", "should", "shall", "may", "might", "must",
    "seems", "seem", "feels", "feel", "looks", "look", "says", "say", "gets", "get",
    "makes", "make", "offers", "offer", "provides", "provide", "remains", "remain",
    // irregular past forms
    "became", "began", "bought", "broke", "brought", "came", "chose", "did", "fell",
    "felt", "found", "gave", "got", "grew", "held", "kept", "knew", "left", "lost",
    "made", "met", "paid", "ran", "rose", "said", "saw", "sent", "sold", "spent",
    "stood", "took", "told", "thought", "went", "won", "wrote",
};

// Lowercased word with surrounding punctuation removed.
std::string bare(std::string_view word) {
    std::size_t b = 0;
    std::size_t e = word.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(word[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(word[e - 1]))) --e;
    return text::fold_case(word.substr(b, e - b));
}

bool is_verb(const std::string& w) {
    if (kFiniteVerbs.count(w) != 0) return true;
    if (w.find("n't") != std::string::npos) return true;
    if (w.size() > 3 && w.ends_with("ed")) return true;
    return false;
}

bool has_verb(const std::vector<std::string>& words, std::size_t from) {
    for (std::size_t i = from; i < words.size(); ++i) {
        if (is_verb(bare(words[i]))) return true;
    }
    return false;
}

bool starts_with_subject(const std::vector<std::string>& words) {
    if (words.empty()) return false;
    std::string first = bare(words.front());
    if (kSubjectStarters.count(first) != 0) return true;
    // A capitalized word mid-sentence is read as a proper-noun subject.
    unsigned char c = static_cast<unsigned char>(words.front().front());
    return std::isupper(c) != 0;
}

bool independent_clause(const std::vector<std::string>& words, bool need_subject) {
    if (words.size() < 2) return false;
    if (need_subject) return starts_with_subject(words) && has_verb(words, 1);
    return has_verb(words, 0);
}

// Splits a clause at coordinating conjunctions joining independent clauses.
std::vector<std::vector<std::string>> split_conjunctions(const std::vector<std::string>& words) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> rest = words;
    bool split = true;
    while (split) {
        split = false;
        int depth = 0;
        for (std::size_t i = 1; i + 1 < rest.size(); ++i) {
            for (char c : rest[i - 1]) {
                if (c == '(' || c == '[') ++depth;
                if (c == ')' || c == ']') --depth;
            }
            if (depth != 0 || kConjunctions.count(text::fold_case(rest[i])) == 0) continue;
            std::vector<std::string> left(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(i));
            std::vector<std::string> right(rest.begin() + static_cast<std::ptrdiff_t>(i) + 1, rest.end());
            if (independent_clause(left, false) && independent_clause(right, true)) {
                out.push_back(std::move(left));
                rest = std::move(right);
                split = true;
                break;
            }
        }
    }
    out.push_back(std::move(rest));
    return out;
}

std::string finish_unit(std::vector<std::string> words, char terminal) {
    std::string s = text::join(words, " ");
    while (!s.empty() && (s.back() == ',' || s.back() == ';' || s.back() == ':' ||
                          s.back() == '.' || s.back() == '!' || s.back() == '?' ||
                          s.back() == ' ')) {
        s.pop_back();
    }
    if (s.empty()) return s;
    s.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(s.front())));
    s.push_back(terminal);
    return s;
}

char terminal_of(const std::string& sentence) {
    for (auto it = sentence.rbegin(); it != sentence.rend(); ++it) {
        if (*it == '.' || *it == '!' || *it == '?') return *it;
        if (*it != '"' && *it != '\'' && *it != ')' && *it != ']') break;
    }
    return '.';
}

}  // namespace

std::vector<std::string> decompose_rule_based(const std::string& summary_text) {
    std::vector<std::string> units;
    for (const auto& sentence : text::split_sentences(summary_text)) {
        const char terminal = terminal_of(sentence);
        // Top-level semicolons separate clauses.
        std::vector<std::vector<std::string>> parts(1);
        int depth = 0;
        for (const auto& w : text::split_words(sentence)) {
            for (char c : w) {
                if (c == '(' || c == '[') ++depth;
                if (c == ')' || c == ']') --depth;
            }
            parts.back().push_back(w);
            if (depth == 0 && w.back() == ';') parts.emplace_back();
        }
        const bool only_part = parts.size() == 1;
        for (auto& part : parts) {
            if (part.empty()) continue;
            auto clauses = split_conjunctions(part);
            if (only_part && clauses.size() == 1) {
                units.push_back(sentence);
                continue;
            }
            for (auto& clause : clauses) {
                auto unit = finish_unit(std::move(clause), terminal);
                if (!unit.empty()) units.push_back(std::move(unit));
            }
        }
    }
    return units;
}

std::vector<std::vector<std::string>> decompose_remote(const std::vector<std::string>& texts,
                                                       const RemoteConfig& config) {
    detail::HttpOptions options;
    options.auth_token = config.auth_token;
    options.max_retries = config.max_retries;
    options.initial_backoff = config.initial_backoff;
    options.timeout = config.timeout;
    nlohmann::json body;
    body["texts"] = texts;
    auto reply = detail::post_json(config.endpoint, "/v1/decompose", body, options);
    auto it = reply.find("units");
    if (it == reply.end() || !it->is_array()) {
        throw DecompositionError("decomposition reply has no 'units' array");
    }
    std::vector<std::vector<std::string>> out;
    for (const auto& group : *it) {
        if (!group.is_array()) throw DecompositionError("decomposition reply is not nested");
        std::vector<std::string> units;
        for (const auto& u : group) {
            if (!u.is_string()) throw DecompositionError("decomposition unit is not a string");
            units.push_back(u.get<std::string>());
        }
        out.push_back(std::move(units));
    }
    // An empty request is answered with a single empty group.
    if (texts.empty()) return {};
    if (out.size() != texts.size()) {
        throw DecompositionError("decomposition reply has " + std::to_string(out.size()) +
                                 " groups for " + std::to_string(texts.size()) + " texts");
    }
    return out;
}

std::vector<std::string> decompose(const std::string& summary_text,
                                   const DecomposerProvider& provider) {
    provider.validate();
    if (text::normalize_whitespace(summary_text).empty()) {
        throw PreconditionError("summary text is empty");
    }
    if (provider.kind == DecomposerProvider::Kind::RuleBased) {
        return decompose_rule_based(summary_text);
    }
    auto groups = decompose_remote({summary_text}, provider.remote);
    if (groups.front().empty()) {
        throw DecompositionError("remote decomposer returned no units");
    }
    return groups.front();
}

// ---------------------------------------------------------------------------
// Entailment graph

std::vector<std::size_t> EntailmentGraph::components() const {
    std::vector<std::size_t> parent(nodes);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto [u, v] : edges) {
        auto ru = find(u);
        auto rv = find(v);
        if (ru != rv) parent[std::max(ru, rv)] = std::min(ru, rv);
    }
    std::vector<std::size_t> comp(nodes);
    std::vector<std::size_t> id_of_root(nodes, nodes);
    std::size_t next = 0;
    for (std::size_t i = 0; i < nodes; ++i) {
        auto r = find(i);
        if (id_of_root[r] == nodes) id_of_root[r] = next++;
        comp[i] = id_of_root[r];
    }
    return comp;
}

EntailmentGraph build_entailment_graph(std::size_t nodes, std::vector<double> directed_probs,
                                       double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ConfigError("entailment threshold must lie in (0,1)");
    }
    if (directed_probs.size() != nodes * nodes) {
        throw DimensionError("entailment probability matrix must be nodes x nodes");
    }
    EntailmentGraph g;
    g.nodes = nodes;
    g.threshold = threshold;
    g.probs = std::move(directed_probs);
    for (std::size_t u = 0; u < nodes; ++u) {
        for (std::size_t v = u + 1; v < nodes; ++v) {
            if (g.prob(u, v) > threshold && g.prob(v, u) > threshold) g.edges.emplace_back(u, v);
        }
    }
    return g;
}

EntailmentGraph build_entailment_graph(const std::vector<std::string>& units,
                                       EntailmentProvider& scorer, double threshold) {
    const std::size_t n = units.size();
    std::vector<EntailmentPair> pairs;
    pairs.reserve(n * (n > 0 ? n - 1 : 0));
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (u != v) pairs.push_back({units[u], units[v]});
        }
    }
    auto scored = pairs.empty() ? std::vector<double>{} : scorer.entail(pairs);
    std::vector<double> probs(n * n, 1.0);
    std::size_t k = 0;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (u != v) probs[u * n + v] = scored[k++];
        }
    }
    return build_entailment_graph(n, std::move(probs), threshold);
}

std::vector<std::size_t> dedupe_indices(const EntailmentGraph& graph) {
    const auto comp = graph.components();
    const std::size_t n = graph.nodes;
    // entails[u] counts other members v of u's component with p(u -> v) > threshold
    std::vector<std::size_t> entails(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (u != v && comp[u] == comp[v] && graph.prob(u, v) > graph.threshold) ++entails[u];
        }
    }
    const std::size_t num_components =
        n == 0 ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
    std::vector<std::size_t> survivor(num_components, n);
    for (std::size_t u = 0; u < n; ++u) {
        auto& s = survivor[comp[u]];
        if (s == n || entails[u] > entails[s]) s = u;
    }
    std::sort(survivor.begin(), survivor.end());
    return survivor;
}

std::vector<std::string> dedupe_units(const std::vector<std::string>& units,
                                      EntailmentProvider& scorer, double threshold) {
    if (units.empty()) throw PreconditionError("no units to deduplicate");
    auto graph = build_entailment_graph(units, scorer, threshold);
    std::vector<std::string> kept;
    for (auto i : dedupe_indices(graph)) kept.push_back(units[i]);
    return kept;
}

}  // namespace covfair
