#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace legalstyle::utf8 {

/// Decodes UTF-8; malformed sequences become U+FFFD.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
std::string encode(char32_t cp);

std::size_t length(std::string_view text);

/// Unicode canonical composition (NFC).
std::string nfc(std::string_view text);

/// Whitespace as understood by Python's `str.isspace`, which the reference
/// segmenter relies on.
bool is_space(char32_t cp) noexcept;
bool is_punct(char32_t cp) noexcept;
/// CJK unified ideographs (basic block, extension A, compatibility).
bool is_han(char32_t cp) noexcept;
bool is_fullwidth(char32_t cp) noexcept;

bool is_blank(std::string_view text);
std::string trim(std::string_view text);

}  // namespace legalstyle::utf8
