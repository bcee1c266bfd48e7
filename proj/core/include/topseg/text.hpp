#pragma once

#include <string>
#include <string_view>
#include <vector>

/// Unicode helpers shared by extraction, heading normalization and tokenization.
/// Case folding and character classes cover Latin, Greek and Cyrillic; other
/// scripts pass through unchanged and count as word characters.
namespace topseg::text {

/// Decodes UTF-8; invalid or truncated sequences become U+FFFD.
std::u32string decode_utf8(std::string_view bytes);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(std::u32string_view cps);

/// Re-encodes input with invalid sequences replaced.
std::string sanitize_utf8(std::string_view bytes);

/// Windows-1252 (superset of ISO-8859-1 printable range) to UTF-8.
std::string cp1252_to_utf8(std::string_view bytes);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);
bool is_word_char(char32_t cp);
char32_t fold_case(char32_t cp);

std::string to_lower(std::string_view s);

/// Trims and collapses every whitespace run to one ASCII space.
std::string collapse_whitespace(std::string_view s);

/// Lowercased word tokens. Apostrophes and periods inside a word are kept
/// ("don't", "e.g"), commas only between digits ("1,000"); everything else
/// that is not a word character separates tokens.
std::vector<std::string> tokenize(std::string_view s);

}  // namespace topseg::text
