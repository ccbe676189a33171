#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "morphtag/corpus.hpp"
#include "morphtag/hmm.hpp"
#include "morphtag/lexicon.hpp"
#include "morphtag/tagset.hpp"
#include "morphtag/tbl.hpp"

namespace morphtag {

enum class TrainMode { Supervised, Em, BootstrapThenEm };

// "supervised", "em" or "bootstrap-then-em"; throws std::invalid_argument otherwise.
TrainMode parse_train_mode(std::string_view name);

struct TrainOptions {
  Smoothing smoothing;
  std::size_t max_iters = 25;
  double tol = 1e-6;
};

struct TrainResult {
  HmmModel model;
  std::vector<double> log_likelihood;  // empty for supervised training
  std::vector<double> objective;
};

// Drops the tags of a segmented corpus; each morpheme may take its
// dictionary tags, or every tag when its lemma is not in the dictionary.
std::vector<UntaggedSentence> untagged_corpus(const std::vector<TaggedSentence>& sentences,
                                              const std::vector<Tag>& tagset, const Lexicon& lexicon,
                                              const TagsetProjection& projection);

// Supervised uses `tagged`; em starts from uniform_model on `untagged`;
// bootstrap-then-em trains on `tagged` and refines on `untagged`. The tag set
// is the projection's label inventory.
TrainResult train_model(TrainMode mode, const GoldCorpus& tagged, const GoldCorpus& untagged,
                        const Lexicon& lexicon, const TagsetProjection& projection, const TrainOptions& options);

// First-phase tagging of sentences whose segmentation is already known.
std::vector<TaggedSentence> tag_segmented(const HmmModel& model, const std::vector<TaggedSentence>& sentences,
                                          const Lexicon& lexicon, const TagsetProjection& projection);

// Analyzes and tags one line of raw text. Throws SegmentationFailure for an
// Eojeol with no cover and std::invalid_argument for a blank line.
TaggedSentence tag_text(const HmmModel& model, std::string_view line, const Lexicon& lexicon,
                        const TagsetProjection& projection, std::size_t candidate_cap = kDefaultCandidateCap,
                        std::size_t sentence_cap = kDefaultSentenceCap);

std::vector<TaggedSentence> correct_all(const RuleList& rules, const std::vector<TaggedSentence>& sentences);

// Non-blank lines of a text stream.
std::vector<std::string> read_lines(std::istream& in);

// One candidate per line: "<eojeol>\t<rank>\t<surface>=<lemma>/<TAG> + ...".
void write_lattice(std::ostream& out, const SentenceLattice& lattice);

}  // namespace morphtag
