#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "morphtag/tagset.hpp"

namespace morphtag {

inline constexpr std::size_t kDefaultCandidateCap = 32;

// One dictionary header. Inflected forms are enrolled under their own surface
// with the uninflected lemma.
struct LexEntry {
  std::string surface;
  std::string lemma;
  TagPath tag_path;

  friend bool operator==(const LexEntry&, const LexEntry&) = default;
};

// Pairwise morphotactics over tag-path prefixes: a (left, right) pair permits
// a morpheme whose path starts with `left` to precede one whose path starts
// with `right`.
class ConnectivityTable {
 public:
  enum class Mode { Restrict, AllowAll };
  using Pair = std::pair<TagPath, TagPath>;

  static ConnectivityTable allow_all();
  static ConnectivityTable restrict_to(std::vector<Pair> pairs);

  Mode mode() const { return mode_; }
  const std::vector<Pair>& pairs() const { return pairs_; }
  bool allows(const TagPath& left, const TagPath& right) const;

  static ConnectivityTable parse(std::istream& in);
  static ConnectivityTable load(const std::filesystem::path& file);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& file) const;

 private:
  ConnectivityTable(Mode mode, std::vector<Pair> pairs);

  Mode mode_;
  std::vector<Pair> pairs_;
};

struct Morpheme {
  std::string surface;
  std::string lemma;
  TagPath tag_path;
  Tag tag;  // projection of tag_path

  // "<lemma>/<tag>", the HMM's emission key.
  std::string key() const { return lemma + "/" + tag.label(); }

  friend bool operator==(const Morpheme&, const Morpheme&) = default;
};

using MorphemeSequence = std::vector<Morpheme>;

struct EojeolAnalysis {
  std::string surface;
  std::vector<MorphemeSequence> candidates;
};

struct SentenceLattice {
  std::vector<EojeolAnalysis> eojeols;

  // Size of the cross product of per-Eojeol candidates (saturates at SIZE_MAX).
  std::size_t sentence_candidates() const;
};

class Lexicon {
 public:
  // Throws std::invalid_argument on an empty surface/lemma, whitespace inside
  // a surface or lemma, or a duplicate (surface, lemma, tag_path) triple.
  Lexicon(std::vector<LexEntry> entries, ConnectivityTable connectivity);

  static Lexicon load(const std::filesystem::path& dict_file,
                      const std::filesystem::path& conn_file);
  static std::vector<LexEntry> parse_entries(std::istream& in);
  static void write_entries(std::ostream& out, const std::vector<LexEntry>& entries);
  void save(const std::filesystem::path& dict_file, const std::filesystem::path& conn_file) const;

  const std::vector<LexEntry>& entries() const { return entries_; }
  const ConnectivityTable& connectivity() const { return connectivity_; }

  // Entries whose surface equals `surface`, in file order.
  std::vector<const LexEntry*> lookup(std::string_view surface) const;

  // Calls fn(end, entry_index) for every entry whose surface matches `text`
  // starting at byte offset `pos`, in order of increasing end offset.
  template <typename Fn>
  void for_each_prefix_match(std::string_view text, std::size_t pos, Fn&& fn) const;

  // Projected tags of every entry with this lemma, sorted by label, unique.
  std::vector<Tag> tags_for_lemma(std::string_view lemma, const TagsetProjection& projection) const;

  bool connectable(std::size_t left_entry, std::size_t right_entry) const {
    return paths_connect(path_id_[left_entry], path_id_[right_entry]);
  }

  // Dense ids over the distinct tag paths in the dictionary.
  std::size_t path_count() const { return path_count_; }
  std::size_t path_id(std::size_t entry) const { return path_id_[entry]; }
  bool paths_connect(std::size_t left_path, std::size_t right_path) const {
    return connect_[left_path * path_count_ + right_path] != 0;
  }

 private:
  struct TrieNode {
    std::map<char, std::uint32_t> next;
    std::vector<std::uint32_t> entries;
  };

  std::vector<LexEntry> entries_;
  ConnectivityTable connectivity_;
  std::vector<TrieNode> trie_;
  std::multimap<std::string, std::size_t, std::less<>> by_lemma_;
  std::vector<std::size_t> path_id_;
  std::size_t path_count_ = 0;
  std::vector<char> connect_;
};

template <typename Fn>
void Lexicon::for_each_prefix_match(std::string_view text, std::size_t pos, Fn&& fn) const {
  std::uint32_t node = 0;
  for (std::size_t i = pos; i < text.size(); ++i) {
    const auto it = trie_[node].next.find(text[i]);
    if (it == trie_[node].next.end()) return;
    node = it->second;
    for (const std::uint32_t entry : trie_[node].entries) fn(i + 1, static_cast<std::size_t>(entry));
  }
}

// Every legal cover of `eojeol`, uncapped, in candidate order: fewest
// morphemes first, then by projected tag sequence, then by the full
// (surface, lemma, tag path) sequence. Empty when no cover exists.
std::vector<MorphemeSequence> enumerate_covers(std::string_view eojeol, const Lexicon& lexicon,
                                               const TagsetProjection& projection);

// The first `cap` covers in candidate order. Throws SegmentationFailure when
// there is no cover and std::invalid_argument on an empty eojeol or cap == 0.
EojeolAnalysis segment(std::string_view eojeol, const Lexicon& lexicon,
                       const TagsetProjection& projection, std::size_t cap = kDefaultCandidateCap);

// Throws SegmentationFailure carrying the index of the failing Eojeol.
SentenceLattice analyze_sentence(const std::vector<std::string>& eojeols, const Lexicon& lexicon,
                                 const TagsetProjection& projection,
                                 std::size_t cap = kDefaultCandidateCap);

// Raw text to Eojeols: split on Unicode whitespace.
std::vector<std::string> split_eojeols(std::string_view text);

}  // namespace morphtag
