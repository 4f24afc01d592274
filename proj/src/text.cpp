#include "covfair/text.hpp"

#include <array>
#include <cctype>
#include <cstdio>

namespace covfair::text {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) {
    return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}';
}

// Tokens ending in a period that do not end a sentence.
constexpr std::array<std::string_view, 18> kAbbreviations = {
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "vs.",
    "etc.", "e.g.", "i.e.", "inc.", "ltd.", "co.", "no.", "u.s.", "approx.",
};

bool is_abbreviation(std::string_view word) {
    std::string lowered = fold_case(word);
    // strip leading quotes/brackets
    std::size_t start = 0;
    while (start < lowered.size() && (lowered[start] == '"' || lowered[start] == '(' ||
                                      lowered[start] == '\'')) {
        ++start;
    }
    std::string_view core(lowered);
    core.remove_prefix(start);
    for (auto abbr : kAbbreviations) {
        if (core == abbr) return true;
    }
    return false;
}

bool ends_sentence(std::string_view word) {
    std::size_t end = word.size();
    while (end > 0 && is_closer(word[end - 1])) --end;
    if (end == 0 || !is_terminal(word[end - 1])) return false;
    return !is_abbreviation(word.substr(0, end));
}

}  // namespace

std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > start) words.emplace_back(s.substr(start, i - start));
    }
    return words;
}

std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : s) {
        bool space = is_space(c);
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::string fold_case(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> sentences;
    std::string current;
    for (const auto& word : split_words(s)) {
        if (!current.empty()) current.push_back(' ');
        current += word;
        if (ends_sentence(word)) {
            sentences.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) sentences.push_back(std::move(current));
    return sentences;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

std::uint64_t content_hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace covfair::text
