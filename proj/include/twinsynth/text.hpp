#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace twinsynth::text {

// Decodes UTF-8 into codepoints. Invalid bytes decode to U+FFFD one byte at a
// time so the function never fails.
std::vector<char32_t> decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);

bool is_unicode_space(char32_t cp);
// CJK ideographs, kana, hangul, CJK punctuation and full-width forms.
bool is_cjk(char32_t cp);

std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::string ascii_lower(std::string_view s);

// trim + lowercase + internal whitespace collapsed to a single space.
std::string normalize_key(std::string_view s);

// Length in codepoints after trimming surrounding whitespace.
std::size_t char_length(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

std::vector<std::string> split_lines(std::string_view s);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// Stable per-item seed: hash of the global seed and the item id, so results do
// not depend on processing order.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view item_id);

}  // namespace twinsynth::text
