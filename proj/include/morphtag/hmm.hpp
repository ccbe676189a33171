#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphtag/lexicon.hpp"
#include "morphtag/sentence.hpp"
#include "morphtag/tagset.hpp"

namespace morphtag {

inline constexpr std::size_t kDefaultSentenceCap = 256;
inline constexpr std::string_view kBosLabel = "<BOS>";

struct Smoothing {
  double lambda_trans = 0.1;  // add-lambda over the tag inventory
  double lambda_emit = 0.1;   // add-lambda over the observed lemma vocabulary
  double unk_mass = 1e-4;     // emission mass reserved per tag for unseen lemmas
  double unk_types = 1000.0;  // virtual number of unseen lemmas sharing unk_mass

  // Throws std::invalid_argument when a constant is out of range.
  void validate() const;
  friend bool operator==(const Smoothing&, const Smoothing&) = default;
};

// Bigram HMM over projected tags. Emissions are indexed by lemma; the model
// file spells an emission key as "<lemma>/<tag>".
class HmmModel {
 public:
  static constexpr std::size_t kBos = std::numeric_limits<std::size_t>::max();

  // trans is (K+1) x K row-major with the BOS row last; emit is K x V
  // row-major over `vocabulary`, which must be sorted and unique. Throws
  // std::invalid_argument naming the tag of any row that is not normalized.
  HmmModel(std::vector<Tag> tags, std::vector<std::string> vocabulary, std::vector<double> trans,
           std::vector<double> emit, Smoothing smoothing, std::vector<Tag> open_class = {});

  std::size_t num_tags() const { return tags_.size(); }
  const std::vector<Tag>& tags() const { return tags_; }
  std::optional<std::size_t> tag_index(const Tag& tag) const;

  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  std::optional<std::size_t> lemma_index(std::string_view lemma) const;

  const Smoothing& smoothing() const { return smoothing_; }
  const std::vector<Tag>& open_class() const { return open_class_; }
  // Tags an out-of-dictionary morpheme may take: open_class, or every tag when empty.
  std::vector<std::size_t> open_class_indices() const;

  double trans(std::size_t prev, std::size_t tag) const { return trans_[row(prev) * tags_.size() + tag]; }
  double log_trans(std::size_t prev, std::size_t tag) const {
    return log_trans_[row(prev) * tags_.size() + tag];
  }
  double emit(std::size_t tag, std::size_t lemma) const { return emit_[tag * vocabulary_.size() + lemma]; }
  double unknown_emit() const { return smoothing_.unk_mass / smoothing_.unk_types; }
  // Emission of a lemma by name; lemmas outside the vocabulary get unknown_emit().
  double emit(std::size_t tag, std::string_view lemma) const;
  double log_emit(std::size_t tag, std::string_view lemma) const;

  const std::vector<double>& trans_table() const { return trans_; }
  const std::vector<double>& emit_table() const { return emit_; }

  static HmmModel parse(std::istream& in);
  static HmmModel load(const std::filesystem::path& file);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& file) const;

 private:
  std::size_t row(std::size_t prev) const { return prev == kBos ? tags_.size() : prev; }

  std::vector<Tag> tags_;
  std::vector<std::string> vocabulary_;
  std::vector<double> trans_;
  std::vector<double> emit_;
  std::vector<double> log_trans_;
  std::vector<double> log_emit_;
  Smoothing smoothing_;
  std::vector<Tag> open_class_;
};

inline void save_model(const HmmModel& model, const std::filesystem::path& file) { model.save(file); }
inline HmmModel load_model(const std::filesystem::path& file) { return HmmModel::load(file); }

// ---------------------------------------------------------------------------
// Decoding

// One morpheme to tag: its lemma and the model tag indices it may take,
// sorted ascending and unique.
struct DecodeSlot {
  std::string lemma;
  std::vector<std::size_t> allowed;
};

struct TagSequence {
  std::vector<std::size_t> tags;
  double log_score = 0.0;
};

// argmax over allowed tag sequences of sum(log trans) + sum(log emit), with a
// BOS transition into the first slot and no final transition. Equal scores
// resolve to the lowest tag index at the latest differing position. Throws
// DecodeFailure when every sequence has probability zero.
TagSequence viterbi(const HmmModel& model, std::span<const DecodeSlot> slots);

// Log score of a fixed tag sequence, summed in the same order as viterbi().
double score_sequence(const HmmModel& model, std::span<const DecodeSlot> slots,
                      std::span<const std::size_t> tags);

// Runs viterbi on each sentence candidate of the lattice (up to
// sentence_cap of them) and keeps the best. Ties go to fewer morphemes, then
// to the lexicographically smaller tag-index sequence.
TaggedSentence tag_lattice(const HmmModel& model, const SentenceLattice& lattice,
                           std::size_t sentence_cap = kDefaultSentenceCap);

// Slots for an already segmented sentence: allowed tags are the dictionary
// tags of each lemma, or the open-class tags when the lemma is not in the
// dictionary.
std::vector<DecodeSlot> slots_for(const TaggedSentence& analyzed, const HmmModel& model,
                                  const Lexicon& lexicon, const TagsetProjection& projection);

// Tags a segmented sentence (tags in the input are ignored).
TaggedSentence tag_analyzed(const HmmModel& model, const TaggedSentence& analyzed, const Lexicon& lexicon,
                            const TagsetProjection& projection);

// ---------------------------------------------------------------------------
// Training

// Smoothed relative frequencies. Every tag in the corpus must be in `tagset`,
// otherwise TrainingError lists the offenders.
HmmModel train_supervised(const std::vector<TaggedSentence>& corpus, const std::vector<Tag>& tagset,
                          const Smoothing& smoothing = {});

// A morphologically analyzed but untagged sentence.
using UntaggedSentence = std::vector<DecodeSlot>;

struct EmResult {
  HmmModel model;
  // Corpus log-likelihood of every model visited, the initial one first.
  std::vector<double> log_likelihood;
  // log_likelihood plus the log Dirichlet prior implied by add-lambda
  // smoothing.
  std::vector<double> objective;
  // Fraction of each re-estimation actually taken: 1 for a plain EM step,
  // less when the full step would have lowered either sequence.
  std::vector<double> steps;
  std::size_t iterations = 0;
};

// Dictionary-constrained Baum-Welch. Neither log_likelihood nor objective
// ever decreases. Stops after max_iters re-estimations, when the objective
// improves by less than tol, or when no step along the update direction
// keeps both sequences from decreasing. Throws TrainingError for a
// sentence with no legal tag sequence.
EmResult baum_welch(const HmmModel& init, const std::vector<UntaggedSentence>& corpus, std::size_t max_iters,
                    double tol);

double corpus_log_likelihood(const HmmModel& model, const std::vector<UntaggedSentence>& corpus);

// Uniform transitions; each tag's emission mass spread evenly over the
// lemmas it may emit in the corpus. A starting point for EM without a
// tagged bootstrap corpus.
HmmModel uniform_model(const std::vector<Tag>& tagset, const std::vector<UntaggedSentence>& corpus,
                       const Smoothing& smoothing = {});

}  // namespace morphtag
