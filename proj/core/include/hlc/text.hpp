#pragma once

#include <string>
#include <string_view>

namespace hlc {

/// NFC, lowercase, whitespace runs collapsed to one space, trimmed.
/// Used for both catalog matching and dataset dedup.
std::string normalize_text(std::string_view s);

/// Decodes UTF-8 into code points. Ill-formed sequences become U+FFFD.
std::u32string to_code_points(std::string_view utf8);

std::string to_utf8(std::u32string_view code_points);

/// Number of code points in a UTF-8 string.
std::size_t code_point_length(std::string_view utf8);

/// Substring by code point offsets [start, end).
std::string code_point_substr(std::string_view utf8, std::size_t start, std::size_t end);

/// Strips leading/trailing Unicode whitespace.
std::string trim(std::string_view s);

bool is_unicode_whitespace(char32_t c);

/// Token characters are everything except whitespace, punctuation and
/// symbols; hyphens stay inside tokens.
bool is_token_char(char32_t c);

}  // namespace hlc
