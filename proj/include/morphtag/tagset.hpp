#pragma once

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace morphtag {

// A path name in a POS symbol hierarchy, e.g. "nominal:noun:proper-noun".
class TagPath {
 public:
  static constexpr char kSeparator = ':';

  // Throws std::invalid_argument on an empty list or an invalid segment.
  explicit TagPath(std::vector<std::string> segments);

  // Parses "a:b:c". Whitespace around the text and around each segment is
  // dropped. Throws FormatError naming the offending segment.
  static TagPath parse(std::string_view text);

  const std::vector<std::string>& segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }

  bool is_prefix_of(const TagPath& other) const;
  std::string str() const;

  friend auto operator<=>(const TagPath&, const TagPath&) = default;
  friend bool operator==(const TagPath&, const TagPath&) = default;

 private:
  std::vector<std::string> segments_;
};

inline TagPath parse_tag_path(std::string_view text) { return TagPath::parse(text); }

// A short application tag such as "MC" or "jC".
class Tag {
 public:
  // Throws std::invalid_argument if the label is empty or contains
  // whitespace or '/'.
  explicit Tag(std::string label);

  const std::string& label() const { return label_; }

  friend auto operator<=>(const Tag&, const Tag&) = default;
  friend bool operator==(const Tag&, const Tag&) = default;

  static bool valid_label(std::string_view label);

 private:
  std::string label_;
};

// Maps hierarchical paths onto a short-tag set. The first rule whose prefix
// matches wins; unmatched paths get the default label.
class TagsetProjection {
 public:
  struct Rule {
    TagPath prefix;
    Tag label;
  };

  // Throws std::invalid_argument when two rules share an identical prefix.
  TagsetProjection(std::vector<Rule> rules, Tag default_label);

  Tag project(const TagPath& path) const;

  const std::vector<Rule>& rules() const { return rules_; }
  const Tag& default_label() const { return default_label_; }

  // Label inventory: distinct rule labels in rule order, then the default
  // label if no rule uses it.
  std::vector<Tag> labels() const;
  bool has_label(const Tag& tag) const;

  static TagsetProjection parse(std::istream& in);
  static TagsetProjection load(const std::filesystem::path& file);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& file) const;

 private:
  std::vector<Rule> rules_;
  Tag default_label_;
};

inline Tag project(const TagPath& path, const TagsetProjection& projection) {
  return projection.project(path);
}

inline TagsetProjection projection_from_file(const std::filesystem::path& file) {
  return TagsetProjection::load(file);
}

}  // namespace morphtag
