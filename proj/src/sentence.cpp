#include "morphtag/sentence.hpp"

namespace morphtag {

std::size_t TaggedSentence::morpheme_count() const {
  std::size_t n = 0;
  for (const auto& e : eojeols) n += e.morphemes.size();
  return n;
}

bool same_segmentation(const TaggedSentence& a, const TaggedSentence& b) {
  if (a.eojeols.size() != b.eojeols.size()) return false;
  for (std::size_t i = 0; i < a.eojeols.size(); ++i) {
    const auto& x = a.eojeols[i];
    const auto& y = b.eojeols[i];
    if (x.surface != y.surface || x.morphemes.size() != y.morphemes.size()) return false;
    for (std::size_t j = 0; j < x.morphemes.size(); ++j) {
      if (x.morphemes[j].lemma != y.morphemes[j].lemma) return false;
    }
  }
  return true;
}

}  // namespace morphtag
