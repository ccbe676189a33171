#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "morphtag/lexicon.hpp"
#include "morphtag/sentence.hpp"
#include "morphtag/tagset.hpp"

namespace morphtag {

// Hand-tagged sentences with Eojeol boundaries. Morpheme surfaces are not
// stored in the file and stay empty.
struct GoldCorpus {
  std::vector<TaggedSentence> sentences;

  std::size_t morpheme_count() const;
  friend bool operator==(const GoldCorpus&, const GoldCorpus&);
};

// One Eojeol per line, "<surface>\t<lemma>/<TAG> + <lemma>/<TAG>", sentences
// separated by a blank line. The tag is everything after the last '/'.
// Throws FormatError with the line number on a malformed line, and, when a
// projection is given, on a tag outside its label inventory.
GoldCorpus parse_corpus(std::istream& in);
GoldCorpus parse_corpus(std::istream& in, const TagsetProjection& projection);
GoldCorpus read_corpus(const std::filesystem::path& file);
GoldCorpus read_corpus(const std::filesystem::path& file, const TagsetProjection& projection);
void write_corpus(std::ostream& out, const std::vector<TaggedSentence>& sentences);
void write_corpus(const std::filesystem::path& file, const std::vector<TaggedSentence>& sentences);
inline void write_corpus(const std::filesystem::path& file, const GoldCorpus& corpus) {
  write_corpus(file, corpus.sentences);
}

struct SplitFractions {
  double train_em = 0.70;
  double train_rules = 0.15;
  double test = 0.15;
};

struct CorpusSplit {
  GoldCorpus train_em;
  GoldCorpus train_rules;
  GoldCorpus test;
};

// Seeded shuffle at sentence granularity, then sizes by largest remainder
// with at least one sentence per part. Each part keeps input order. Throws
// std::invalid_argument for fewer than 3 sentences or fractions that are not
// positive or do not sum to 1 within 1e-9.
CorpusSplit split_corpus(const GoldCorpus& corpus, const SplitFractions& fractions, std::uint64_t seed);

// Part sizes split_corpus would produce for n sentences.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitFractions& fractions);

struct EvalReport {
  std::size_t tagged_count = 0;
  std::size_t incorrect_count = 0;
  std::size_t ambiguous_count = 0;      // gold lemma has more than one dictionary tag
  std::size_t ambiguous_incorrect = 0;
  std::size_t mismatched_sentences = 0;  // system segmentation differs from gold
  std::size_t mismatched_morphemes = 0;  // gold morphemes in those sentences

  // (tagged - incorrect) / tagged; NaN when nothing was tagged.
  double accuracy() const;
  double ambiguous_accuracy() const;
};

// Compares system tags with gold. A sentence whose segmentation differs from
// gold counts all of its gold morphemes as incorrect. Throws
// std::invalid_argument when the sentence counts differ.
EvalReport evaluate(const std::vector<TaggedSentence>& system, const GoldCorpus& gold, const Lexicon& lexicon,
                    const TagsetProjection& projection);

// correct/total as a percentage with one decimal, rounded half up
// ("91.5"); "-" when total is 0.
std::string format_percent(std::size_t correct, std::size_t total);

inline constexpr std::string_view kTableHeader = "corpus | no. morph. | no. ambig. morph. | HMM alone | two-phase";

// "<name> | <tagged> | <ambiguous> | <hmm %> | <two-phase %>". Counts come
// from the HMM-alone report; both reports must cover the same gold corpus.
std::string format_table_row(std::string_view name, const EvalReport& hmm_alone, const EvalReport& two_phase);

}  // namespace morphtag
