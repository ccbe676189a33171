#include "morphtag/utf8.hpp"

#include "morphtag/error.hpp"

namespace morphtag::utf8 {
namespace {

char32_t decode(std::string_view text, std::size_t pos, std::size_t len) {
  auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[pos + i]); };
  switch (len) {
    case 1:
      return byte(0);
    case 2:
      return ((byte(0) & 0x1Fu) << 6) | (byte(1) & 0x3Fu);
    case 3:
      return ((byte(0) & 0x0Fu) << 12) | ((byte(1) & 0x3Fu) << 6) | (byte(2) & 0x3Fu);
    default:
      return ((byte(0) & 0x07u) << 18) | ((byte(1) & 0x3Fu) << 12) |
             ((byte(2) & 0x3Fu) << 6) | (byte(3) & 0x3Fu);
  }
}

}  // namespace

std::size_t sequence_length(std::string_view text, std::size_t pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t len = 0;
  if (lead < 0x80) {
    len = 1;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
  } else {
    throw FormatError("invalid UTF-8 lead byte at offset " + std::to_string(pos));
  }
  if (pos + len > text.size()) {
    throw FormatError("truncated UTF-8 sequence at offset " + std::to_string(pos));
  }
  for (std::size_t i = 1; i < len; ++i) {
    if ((static_cast<unsigned char>(text[pos + i]) & 0xC0) != 0x80) {
      throw FormatError("invalid UTF-8 continuation byte at offset " + std::to_string(pos + i));
    }
  }
  return len;
}

std::vector<std::string_view> characters(std::string_view text) {
  std::vector<std::string_view> out;
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t len = sequence_length(text, pos);
    out.push_back(text.substr(pos, len));
    pos += len;
  }
  return out;
}

std::size_t char_count(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < text.size(); ++n) pos += sequence_length(text, pos);
  return n;
}

bool is_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t len = sequence_length(text, pos);
    if (is_space(decode(text, pos, len))) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.append(text.substr(pos, len));
    }
    pos += len;
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string_view trim(std::string_view text) {
  std::size_t begin = 0;
  while (begin < text.size()) {
    const std::size_t len = sequence_length(text, begin);
    if (!is_space(decode(text, begin, len))) break;
    begin += len;
  }
  std::size_t end = begin;
  std::size_t last_non_space = begin;
  while (end < text.size()) {
    const std::size_t len = sequence_length(text, end);
    end += len;
    if (!is_space(decode(text, end - len, len))) last_non_space = end;
  }
  return text.substr(begin, last_non_space - begin);
}

}  // namespace morphtag::utf8
