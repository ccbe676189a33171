#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphtag/corpus.hpp"
#include "morphtag/lexicon.hpp"
#include "morphtag/tagset.hpp"
#include "morphtag/tbl.hpp"

namespace morphtag {

// A context-triggered override applied to generated gold tags, e.g.
// "ka/F1 | N2FMT=C3 -> F4": morpheme ka tagged F1 becomes F4 when the first
// morpheme two Eojeols ahead is tagged C3. "*" in place of the lemma matches
// any lemma.
struct Perturbation {
  std::optional<std::string> lemma;
  Tag from;
  Condition condition;
  Tag to;

  std::string str() const;
  // Throws FormatError on malformed text.
  static Perturbation parse(std::string_view text);
  friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

// Parameters of the generating model. Content tags are labelled C0.., and
// functional tags F0..; an Eojeol is one content morpheme followed by up to
// two functional ones. Content lemmas are two syllables and functional
// lemmas one syllable from a disjoint syllable pool, so every Eojeol has
// exactly one segmentation.
struct SynthSpec {
  std::uint64_t seed = 1;
  std::size_t content_tags = 6;
  std::size_t functional_tags = 6;  // first half may open a suffix run, second half closes it
  std::size_t content_vocab = 300;
  std::size_t functional_vocab = 12;
  // Fraction of lemmas in each class also listed under a second tag of the
  // same class.
  double ambiguity = 0.0;
  std::size_t branching = 2;  // successors per tag in the generating chain
  double zipf = 1.0;          // emission rank exponent
  std::size_t sentences = 500;
  std::size_t min_eojeols = 3;
  std::size_t max_eojeols = 8;
  std::vector<Perturbation> perturbations;
  // Adds perturbations for this many of the most frequent functional
  // (lemma, tag) pairs, keyed on N2FMT, covering close to auto_fire_rate of
  // each pair's occurrences.
  std::size_t auto_perturbations = 0;
  double auto_fire_rate = 0.45;

  // Throws std::invalid_argument when a parameter is out of range.
  void validate() const;
};

struct SynthCorpus {
  GoldCorpus corpus;
  std::vector<LexEntry> entries;
  ConnectivityTable connectivity = ConnectivityTable::allow_all();
  TagsetProjection projection;
  std::vector<Perturbation> perturbations;  // explicit ones, then automatic ones
  std::size_t perturbed_sites = 0;          // morphemes whose gold tag was overridden

  Lexicon lexicon() const { return Lexicon(entries, connectivity); }
};

// Deterministic in spec (including seed). Throws std::invalid_argument for a
// perturbation naming an unknown tag.
SynthCorpus generate_synthetic(const SynthSpec& spec);

}  // namespace morphtag
