#include "morphtag/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "morphtag/error.hpp"
#include "morphtag/utf8.hpp"

namespace morphtag {
namespace {

bool is_token(std::string_view text) {
  const auto pieces = utf8::split_whitespace(text);
  return pieces.size() == 1 && pieces.front() == text;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

TagPath parse_path_at(std::string_view text, std::size_t lineno) {
  try {
    return TagPath::parse(text);
  } catch (const FormatError& e) {
    throw FormatError(e.what(), lineno);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ConnectivityTable

ConnectivityTable::ConnectivityTable(Mode mode, std::vector<Pair> pairs)
    : mode_(mode), pairs_(std::move(pairs)) {}

ConnectivityTable ConnectivityTable::allow_all() { return ConnectivityTable(Mode::AllowAll, {}); }

ConnectivityTable ConnectivityTable::restrict_to(std::vector<Pair> pairs) {
  return ConnectivityTable(Mode::Restrict, std::move(pairs));
}

bool ConnectivityTable::allows(const TagPath& left, const TagPath& right) const {
  if (mode_ == Mode::AllowAll) return true;
  return std::any_of(pairs_.begin(), pairs_.end(), [&](const Pair& p) {
    return p.first.is_prefix_of(left) && p.second.is_prefix_of(right);
  });
}

ConnectivityTable ConnectivityTable::parse(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty connectivity file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Mode mode;
  if (line == "MODE=restrict") {
    mode = Mode::Restrict;
  } else if (line == "MODE=allow-all") {
    mode = Mode::AllowAll;
  } else {
    throw FormatError("first line must be MODE=restrict or MODE=allow-all", 1);
  }
  std::vector<Pair> pairs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (mode == Mode::AllowAll) throw FormatError("allow-all table must not list pairs", lineno);
    const auto fields = split_tabs(line);
    if (fields.size() != 2) throw FormatError("expected '<left-prefix><TAB><right-prefix>'", lineno);
    pairs.emplace_back(parse_path_at(fields[0], lineno), parse_path_at(fields[1], lineno));
  }
  return ConnectivityTable(mode, std::move(pairs));
}

ConnectivityTable ConnectivityTable::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open connectivity file " + file.string());
  return parse(in);
}

void ConnectivityTable::write(std::ostream& out) const {
  out << (mode_ == Mode::AllowAll ? "MODE=allow-all" : "MODE=restrict") << '\n';
  for (const auto& [left, right] : pairs_) out << left.str() << '\t' << right.str() << '\n';
}

void ConnectivityTable::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw FormatError("cannot write connectivity file " + file.string());
  write(out);
}

// ---------------------------------------------------------------------------
// Lexicon

std::size_t SentenceLattice::sentence_candidates() const {
  std::size_t total = 1;
  for (const auto& e : eojeols) {
    const std::size_t n = e.candidates.size();
    if (n != 0 && total > std::numeric_limits<std::size_t>::max() / n) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= n;
  }
  return total;
}

Lexicon::Lexicon(std::vector<LexEntry> entries, ConnectivityTable connectivity)
    : entries_(std::move(entries)), connectivity_(std::move(connectivity)) {
  std::set<std::tuple<std::string, std::string, TagPath>> seen;
  std::map<TagPath, std::size_t> path_ids;
  trie_.emplace_back();
  path_id_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const LexEntry& e = entries_[i];
    if (!is_token(e.surface)) throw std::invalid_argument("invalid surface '" + e.surface + "'");
    if (!is_token(e.lemma)) throw std::invalid_argument("invalid lemma '" + e.lemma + "'");
    if (!seen.emplace(e.surface, e.lemma, e.tag_path).second) {
      throw std::invalid_argument("duplicate dictionary entry " + e.surface + "/" + e.lemma + "/" +
                                  e.tag_path.str());
    }
    std::uint32_t node = 0;
    for (const char c : e.surface) {
      auto it = trie_[node].next.find(c);
      if (it == trie_[node].next.end()) {
        trie_.emplace_back();
        it = trie_[node].next.emplace(c, static_cast<std::uint32_t>(trie_.size() - 1)).first;
      }
      node = it->second;
    }
    trie_[node].entries.push_back(static_cast<std::uint32_t>(i));
    by_lemma_.emplace(e.lemma, i);
    path_id_.push_back(path_ids.emplace(e.tag_path, path_ids.size()).first->second);
  }
  path_count_ = path_ids.size();
  connect_.assign(path_count_ * path_count_, 0);
  for (const auto& [left, li] : path_ids) {
    for (const auto& [right, ri] : path_ids) {
      connect_[li * path_count_ + ri] = connectivity_.allows(left, right) ? 1 : 0;
    }
  }
}

std::vector<LexEntry> Lexicon::parse_entries(std::istream& in) {
  std::vector<LexEntry> entries;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3) throw FormatError("expected '<surface><TAB><lemma><TAB><tag-path>'", lineno);
    if (!is_token(fields[0])) throw FormatError("invalid surface '" + std::string(fields[0]) + "'", lineno);
    if (!is_token(fields[1])) throw FormatError("invalid lemma '" + std::string(fields[1]) + "'", lineno);
    TagPath path = parse_path_at(fields[2], lineno);
    if (!seen.emplace(fields[0], fields[1], path.str()).second) {
      throw FormatError("duplicate entry " + std::string(fields[0]) + "/" + std::string(fields[1]) +
                            "/" + path.str(),
                        lineno);
    }
    entries.push_back({std::string(fields[0]), std::string(fields[1]), std::move(path)});
  }
  return entries;
}

void Lexicon::write_entries(std::ostream& out, const std::vector<LexEntry>& entries) {
  for (const auto& e : entries) out << e.surface << '\t' << e.lemma << '\t' << e.tag_path.str() << '\n';
}

Lexicon Lexicon::load(const std::filesystem::path& dict_file, const std::filesystem::path& conn_file) {
  std::ifstream in(dict_file);
  if (!in) throw FormatError("cannot open dictionary file " + dict_file.string());
  auto entries = parse_entries(in);
  return Lexicon(std::move(entries), ConnectivityTable::load(conn_file));
}

void Lexicon::save(const std::filesystem::path& dict_file, const std::filesystem::path& conn_file) const {
  std::ofstream out(dict_file);
  if (!out) throw FormatError("cannot write dictionary file " + dict_file.string());
  write_entries(out, entries_);
  connectivity_.save(conn_file);
}

std::vector<const LexEntry*> Lexicon::lookup(std::string_view surface) const {
  std::vector<const LexEntry*> out;
  for_each_prefix_match(surface, 0, [&](std::size_t end, std::size_t entry) {
    if (end == surface.size()) out.push_back(&entries_[entry]);
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Tag> Lexicon::tags_for_lemma(std::string_view lemma, const TagsetProjection& projection) const {
  std::vector<Tag> tags;
  const auto [first, last] = by_lemma_.equal_range(lemma);
  for (auto it = first; it != last; ++it) tags.push_back(projection.project(entries_[it->second].tag_path));
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  return tags;
}

// ---------------------------------------------------------------------------
// Segmentation

namespace {

// Top-k cover enumeration over states (byte offset, tag path of the previous
// morpheme). Completions from a state are ranked by the candidate order,
// which is preserved under prefixing by a common first morpheme, so the k best
// completions of a state are among the prefixed k best completions of its
// successors.
class CoverSearch {
 public:
  CoverSearch(std::string_view eojeol, const Lexicon& lexicon, const TagsetProjection& projection,
              std::size_t cap)
      : eojeol_(eojeol), lexicon_(lexicon), projection_(projection), cap_(cap) {}

  std::vector<MorphemeSequence> run() {
    const auto& best = completions(0, lexicon_.path_count());
    std::vector<MorphemeSequence> out;
    out.reserve(best.size());
    for (const auto& seq : best) {
      MorphemeSequence morphemes;
      for (const std::uint32_t e : seq) {
        const LexEntry& entry = lexicon_.entries()[e];
        morphemes.push_back({entry.surface, entry.lemma, entry.tag_path, projection_.project(entry.tag_path)});
      }
      out.push_back(std::move(morphemes));
    }
    return out;
  }

  // Longest prefix, in characters, reachable by a legal partial cover.
  std::size_t farthest_reach() const {
    std::set<std::pair<std::size_t, std::size_t>> visited;
    std::queue<std::pair<std::size_t, std::size_t>> todo;
    todo.emplace(0, lexicon_.path_count());
    std::size_t farthest = 0;
    while (!todo.empty()) {
      const auto [pos, prev] = todo.front();
      todo.pop();
      if (!visited.insert({pos, prev}).second) continue;
      farthest = std::max(farthest, pos);
      if (pos == eojeol_.size()) continue;
      lexicon_.for_each_prefix_match(eojeol_, pos, [&](std::size_t end, std::size_t entry) {
        const std::size_t path = lexicon_.path_id(entry);
        if (prev == lexicon_.path_count() || lexicon_.paths_connect(prev, path)) todo.emplace(end, path);
      });
    }
    return utf8::char_count(eojeol_.substr(0, farthest));
  }

 private:
  using Sequence = std::vector<std::uint32_t>;

  // Candidate order: fewer morphemes, then projected labels, then the full
  // entries, each compared position by position. Strings are replaced by
  // dense ranks over the entries that occur.
  void order(std::vector<Sequence>& found) const {
    std::vector<std::uint32_t> used;
    for (const auto& seq : found) used.insert(used.end(), seq.begin(), seq.end());
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    std::vector<std::string> labels, fulls;
    for (const std::uint32_t e : used) {
      const LexEntry& entry = lexicon_.entries()[e];
      labels.push_back(projection_.project(entry.tag_path).label());
      fulls.push_back(entry.surface + '\t' + entry.lemma + '\t' + entry.tag_path.str());
    }
    const auto dense = [](const std::vector<std::string>& keys) {
      std::vector<std::string> sorted = keys;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      std::vector<std::uint32_t> rank;
      for (const auto& k : keys) {
        rank.push_back(static_cast<std::uint32_t>(std::lower_bound(sorted.begin(), sorted.end(), k) - sorted.begin()));
      }
      return rank;
    };
    const auto label_rank = dense(labels), full_rank = dense(fulls);
    const auto index = [&](std::uint32_t e) { return std::lower_bound(used.begin(), used.end(), e) - used.begin(); };
    using Key = std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>;
    std::vector<std::pair<Key, std::size_t>> keyed;
    keyed.reserve(found.size());
    for (std::size_t i = 0; i < found.size(); ++i) {
      Key k;
      k.first.push_back(static_cast<std::uint32_t>(found[i].size()));
      for (const std::uint32_t e : found[i]) {
        const auto j = index(e);
        k.first.push_back(label_rank[j]);
        k.second.push_back(full_rank[j]);
      }
      keyed.emplace_back(std::move(k), i);
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<Sequence> sorted;
    sorted.reserve(found.size());
    for (auto& [k, i] : keyed) sorted.push_back(std::move(found[i]));
    found = std::move(sorted);
  }

  const std::vector<Sequence>& completions(std::size_t pos, std::size_t prev_path) {
    const auto key = std::make_pair(pos, prev_path);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<Sequence> found;
    lexicon_.for_each_prefix_match(eojeol_, pos, [&](std::size_t end, std::size_t entry) {
      const std::size_t path = lexicon_.path_id(entry);
      if (prev_path != lexicon_.path_count() && !lexicon_.paths_connect(prev_path, path)) return;
      if (end == eojeol_.size()) {
        found.push_back({static_cast<std::uint32_t>(entry)});
        return;
      }
      for (const auto& tail : completions(end, path)) {
        Sequence seq;
        seq.reserve(tail.size() + 1);
        seq.push_back(static_cast<std::uint32_t>(entry));
        seq.insert(seq.end(), tail.begin(), tail.end());
        found.push_back(std::move(seq));
      }
    });
    // Without truncation only the root needs ordering.
    if (found.size() > cap_ || (pos == 0 && found.size() > 1)) order(found);
    if (found.size() > cap_) found.resize(cap_);
    return memo_.emplace(key, std::move(found)).first->second;
  }

  std::string_view eojeol_;
  const Lexicon& lexicon_;
  const TagsetProjection& projection_;
  std::size_t cap_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Sequence>> memo_;
};

}  // namespace

std::vector<MorphemeSequence> enumerate_covers(std::string_view eojeol, const Lexicon& lexicon,
                                               const TagsetProjection& projection) {
  if (eojeol.empty()) return {};
  return CoverSearch(eojeol, lexicon, projection, std::numeric_limits<std::size_t>::max()).run();
}

EojeolAnalysis segment(std::string_view eojeol, const Lexicon& lexicon, const TagsetProjection& projection,
                       std::size_t cap) {
  if (eojeol.empty()) throw std::invalid_argument("cannot segment an empty eojeol");
  if (cap == 0) throw std::invalid_argument("candidate cap must be at least 1");
  CoverSearch search(eojeol, lexicon, projection, cap);
  auto candidates = search.run();
  if (candidates.empty()) throw SegmentationFailure(std::string(eojeol), search.farthest_reach());
  return {std::string(eojeol), std::move(candidates)};
}

SentenceLattice analyze_sentence(const std::vector<std::string>& eojeols, const Lexicon& lexicon,
                                 const TagsetProjection& projection, std::size_t cap) {
  if (eojeols.empty()) throw std::invalid_argument("cannot analyze an empty sentence");
  SentenceLattice lattice;
  lattice.eojeols.reserve(eojeols.size());
  for (std::size_t i = 0; i < eojeols.size(); ++i) {
    try {
      lattice.eojeols.push_back(segment(eojeols[i], lexicon, projection, cap));
    } catch (const SegmentationFailure& failure) {
      throw failure.at_index(i);
    }
  }
  return lattice;
}

std::vector<std::string> split_eojeols(std::string_view text) { return utf8::split_whitespace(text); }

}  // namespace morphtag
