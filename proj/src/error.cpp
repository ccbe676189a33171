#include "morphtag/error.hpp"

#include <utility>

namespace morphtag {
namespace {

std::string with_line(const std::string& what, std::size_t line) {
  if (line == 0) return what;
  return "line " + std::to_string(line) + ": " + what;
}

std::string describe_failure(const std::string& eojeol, std::size_t matched,
                             std::optional<std::size_t> index) {
  std::string msg = "cannot segment eojeol '" + eojeol + "'";
  if (index) msg += " (eojeol #" + std::to_string(*index + 1) + ")";
  msg += ": no legal cover beyond character " + std::to_string(matched);
  return msg;
}

}  // namespace

FormatError::FormatError(const std::string& what, std::size_t line)
    : Error(with_line(what, line)), line_(line) {}

SegmentationFailure::SegmentationFailure(std::string eojeol, std::size_t matched_chars,
                                         std::optional<std::size_t> eojeol_index)
    : Error(describe_failure(eojeol, matched_chars, eojeol_index)),
      eojeol_(std::move(eojeol)),
      matched_chars_(matched_chars),
      eojeol_index_(eojeol_index) {}

SegmentationFailure SegmentationFailure::at_index(std::size_t index) const {
  return SegmentationFailure(eojeol_, matched_chars_, index);
}

}  // namespace morphtag
