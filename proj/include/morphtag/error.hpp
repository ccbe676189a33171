#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace morphtag {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file or text input. line() is 1-based, 0 when not tied to a line.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// An Eojeol that no legal sequence of dictionary surfaces covers.
class SegmentationFailure : public Error {
 public:
  SegmentationFailure(std::string eojeol, std::size_t matched_chars,
                      std::optional<std::size_t> eojeol_index = std::nullopt);

  const std::string& eojeol() const { return eojeol_; }
  // Length, in characters, of the longest prefix reachable by a legal partial cover.
  std::size_t matched_chars() const { return matched_chars_; }
  std::optional<std::size_t> eojeol_index() const { return eojeol_index_; }

  SegmentationFailure at_index(std::size_t index) const;

 private:
  std::string eojeol_;
  std::size_t matched_chars_;
  std::optional<std::size_t> eojeol_index_;
};

class DecodeFailure : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace morphtag
