#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace covfair::text {

/// Collapses every run of whitespace to a single space and trims both ends.
std::string normalize_whitespace(std::string_view s);

/// Words are maximal runs of non-whitespace characters.
std::vector<std::string> split_words(std::string_view s);
std::size_t word_count(std::string_view s);

/// ASCII case folding; bytes outside ASCII pass through unchanged.
std::string fold_case(std::string_view s);

/// Splits normalized text into sentences at terminal punctuation followed by
/// whitespace. Joining the result with single spaces reproduces
/// normalize_whitespace(s) exactly.
std::vector<std::string> split_sentences(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// 64-bit FNV-1a. Stable across platforms; used for cache keys and config hashes.
std::uint64_t content_hash(std::string_view s);
std::string hex64(std::uint64_t v);

}  // namespace covfair::text
