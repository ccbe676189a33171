#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "morphtag/tagset.hpp"

namespace morphtag {

struct TaggedMorpheme {
  std::string lemma;
  Tag tag;
  std::string surface;   // empty when read from a corpus file
  bool unknown = false;  // lemma unseen by the model that tagged it

  friend bool operator==(const TaggedMorpheme&, const TaggedMorpheme&) = default;
};

struct TaggedEojeol {
  std::string surface;
  std::vector<TaggedMorpheme> morphemes;

  friend bool operator==(const TaggedEojeol&, const TaggedEojeol&) = default;
};

struct TaggedSentence {
  std::vector<TaggedEojeol> eojeols;
  double score = 0.0;      // log probability of the chosen analysis
  bool truncated = false;  // sentence-candidate cap was hit

  std::size_t morpheme_count() const;
};

// True when both sentences have the same Eojeol surfaces and, per Eojeol, the
// same lemma sequence. Tags are ignored.
bool same_segmentation(const TaggedSentence& a, const TaggedSentence& b);

}  // namespace morphtag
