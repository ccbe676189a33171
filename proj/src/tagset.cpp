#include "morphtag/tagset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>

#include "morphtag/error.hpp"
#include "morphtag/utf8.hpp"

namespace morphtag {
namespace {

bool valid_segment(std::string_view segment) {
  return !segment.empty() && segment.find(TagPath::kSeparator) == std::string_view::npos &&
         segment.find_first_of("\t\n\r") == std::string_view::npos &&
         utf8::trim(segment).size() == segment.size();
}

}  // namespace

TagPath::TagPath(std::vector<std::string> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("tag path needs at least one segment");
  for (const auto& s : segments_) {
    if (!valid_segment(s)) throw std::invalid_argument("invalid tag path segment '" + s + "'");
  }
}

TagPath TagPath::parse(std::string_view text) {
  const std::string_view trimmed = utf8::trim(text);
  if (trimmed.empty()) throw FormatError("empty tag path");
  std::vector<std::string> segments;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = trimmed.find(kSeparator, start);
    const std::string_view raw =
        trimmed.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start);
    const std::string_view segment = utf8::trim(raw);
    if (segment.empty()) {
      throw FormatError("empty segment #" + std::to_string(segments.size() + 1) +
                        " at offset " + std::to_string(start) + " in tag path '" +
                        std::string(trimmed) + "'");
    }
    if (segment.find_first_of("\t\n\r") != std::string_view::npos) {
      throw FormatError("control character in tag path '" + std::string(trimmed) + "'");
    }
    segments.emplace_back(segment);
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  return TagPath(std::move(segments));
}

bool TagPath::is_prefix_of(const TagPath& other) const {
  return segments_.size() <= other.segments_.size() &&
         std::equal(segments_.begin(), segments_.end(), other.segments_.begin());
}

std::string TagPath::str() const {
  std::string out;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (i) out += kSeparator;
    out += segments_[i];
  }
  return out;
}

bool Tag::valid_label(std::string_view label) {
  if (label.empty() || label.find('/') != std::string_view::npos) return false;
  const auto pieces = utf8::split_whitespace(label);
  return pieces.size() == 1 && pieces.front() == label;
}

Tag::Tag(std::string label) : label_(std::move(label)) {
  if (!valid_label(label_)) throw std::invalid_argument("invalid tag label '" + label_ + "'");
}

TagsetProjection::TagsetProjection(std::vector<Rule> rules, Tag default_label)
    : rules_(std::move(rules)), default_label_(std::move(default_label)) {
  std::set<TagPath> seen;
  for (const auto& rule : rules_) {
    if (!seen.insert(rule.prefix).second) {
      throw std::invalid_argument("duplicate projection prefix '" + rule.prefix.str() + "'");
    }
  }
}

Tag TagsetProjection::project(const TagPath& path) const {
  for (const auto& rule : rules_) {
    if (rule.prefix.is_prefix_of(path)) return rule.label;
  }
  return default_label_;
}

std::vector<Tag> TagsetProjection::labels() const {
  std::vector<Tag> out;
  for (const auto& rule : rules_) {
    if (std::find(out.begin(), out.end(), rule.label) == out.end()) out.push_back(rule.label);
  }
  if (std::find(out.begin(), out.end(), default_label_) == out.end()) out.push_back(default_label_);
  return out;
}

bool TagsetProjection::has_label(const Tag& tag) const {
  if (tag == default_label_) return true;
  return std::any_of(rules_.begin(), rules_.end(), [&](const Rule& r) { return r.label == tag; });
}

TagsetProjection TagsetProjection::parse(std::istream& in) {
  std::vector<Rule> rules;
  std::optional<Tag> default_label;
  std::set<TagPath> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (utf8::trim(line).empty() || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw FormatError("expected '<prefix-path><TAB><label>'", lineno);
    }
    const std::string key = line.substr(0, tab);
    const std::string label = std::string(utf8::trim(std::string_view(line).substr(tab + 1)));
    if (!Tag::valid_label(label)) throw FormatError("invalid label '" + label + "'", lineno);
    if (key == "DEFAULT") {
      if (default_label) throw FormatError("DEFAULT given twice", lineno);
      default_label = Tag(label);
      continue;
    }
    TagPath prefix = [&] {
      try {
        return TagPath::parse(key);
      } catch (const FormatError& e) {
        throw FormatError(e.what(), lineno);
      }
    }();
    if (!seen.insert(prefix).second) {
      throw FormatError("duplicate prefix '" + prefix.str() + "'", lineno);
    }
    rules.push_back({std::move(prefix), Tag(label)});
  }
  if (!default_label) throw FormatError("projection file lacks a DEFAULT line");
  return TagsetProjection(std::move(rules), std::move(*default_label));
}

TagsetProjection TagsetProjection::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open projection file " + file.string());
  return parse(in);
}

void TagsetProjection::write(std::ostream& out) const {
  for (const auto& rule : rules_) out << rule.prefix.str() << '\t' << rule.label.label() << '\n';
  out << "DEFAULT\t" << default_label_.label() << '\n';
}

void TagsetProjection::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw FormatError("cannot write projection file " + file.string());
  write(out);
}

}  // namespace morphtag
