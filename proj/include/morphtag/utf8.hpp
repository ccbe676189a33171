#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace morphtag::utf8 {

// Byte length of the UTF-8 sequence starting at text[pos]. Throws FormatError
// on a malformed or truncated sequence.
std::size_t sequence_length(std::string_view text, std::size_t pos);

// Splits text into its characters (code points), each as a view into text.
std::vector<std::string_view> characters(std::string_view text);

std::size_t char_count(std::string_view text);

bool is_space(char32_t cp);

// Splits on runs of Unicode whitespace, dropping empty pieces.
std::vector<std::string> split_whitespace(std::string_view text);

// Trims ASCII and Unicode whitespace from both ends.
std::string_view trim(std::string_view text);

}  // namespace morphtag::utf8
