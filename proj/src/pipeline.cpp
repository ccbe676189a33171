#include "morphtag/pipeline.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "morphtag/utf8.hpp"

namespace morphtag {

TrainMode parse_train_mode(std::string_view name) {
  if (name == "supervised") return TrainMode::Supervised;
  if (name == "em") return TrainMode::Em;
  if (name == "bootstrap-then-em") return TrainMode::BootstrapThenEm;
  throw std::invalid_argument("unknown training mode '" + std::string(name) + "'");
}

std::vector<UntaggedSentence> untagged_corpus(const std::vector<TaggedSentence>& sentences,
                                              const std::vector<Tag>& tagset, const Lexicon& lexicon,
                                              const TagsetProjection& projection) {
  std::vector<std::size_t> every(tagset.size());
  for (std::size_t t = 0; t < every.size(); ++t) every[t] = t;
  std::vector<UntaggedSentence> out;
  for (const auto& sentence : sentences) {
    UntaggedSentence slots;
    for (const auto& e : sentence.eojeols) {
      for (const auto& m : e.morphemes) {
        DecodeSlot slot{m.lemma, {}};
        for (const auto& tag : lexicon.tags_for_lemma(m.lemma, projection)) {
          const auto it = std::find(tagset.begin(), tagset.end(), tag);
          if (it != tagset.end()) slot.allowed.push_back(static_cast<std::size_t>(it - tagset.begin()));
        }
        std::sort(slot.allowed.begin(), slot.allowed.end());
        if (slot.allowed.empty()) slot.allowed = every;
        slots.push_back(std::move(slot));
      }
    }
    out.push_back(std::move(slots));
  }
  return out;
}

TrainResult train_model(TrainMode mode, const GoldCorpus& tagged, const GoldCorpus& untagged,
                        const Lexicon& lexicon, const TagsetProjection& projection, const TrainOptions& options) {
  const std::vector<Tag> tagset = projection.labels();
  if (mode == TrainMode::Supervised) {
    return {train_supervised(tagged.sentences, tagset, options.smoothing), {}, {}};
  }
  const auto corpus = untagged_corpus(untagged.sentences, tagset, lexicon, projection);
  const HmmModel init = mode == TrainMode::Em ? uniform_model(tagset, corpus, options.smoothing)
                                              : train_supervised(tagged.sentences, tagset, options.smoothing);
  EmResult em = baum_welch(init, corpus, options.max_iters, options.tol);
  return {std::move(em.model), std::move(em.log_likelihood), std::move(em.objective)};
}

std::vector<TaggedSentence> tag_segmented(const HmmModel& model, const std::vector<TaggedSentence>& sentences,
                                          const Lexicon& lexicon, const TagsetProjection& projection) {
  std::vector<TaggedSentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(tag_analyzed(model, s, lexicon, projection));
  return out;
}

TaggedSentence tag_text(const HmmModel& model, std::string_view line, const Lexicon& lexicon,
                        const TagsetProjection& projection, std::size_t candidate_cap, std::size_t sentence_cap) {
  const auto eojeols = split_eojeols(line);
  if (eojeols.empty()) throw std::invalid_argument("blank sentence");
  return tag_lattice(model, analyze_sentence(eojeols, lexicon, projection, candidate_cap), sentence_cap);
}

std::vector<TaggedSentence> correct_all(const RuleList& rules, const std::vector<TaggedSentence>& sentences) {
  std::vector<TaggedSentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(apply_rules(rules, s));
  return out;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!utf8::trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

void write_lattice(std::ostream& out, const SentenceLattice& lattice) {
  for (const auto& eojeol : lattice.eojeols) {
    for (std::size_t c = 0; c < eojeol.candidates.size(); ++c) {
      out << eojeol.surface << '\t' << c + 1 << '\t';
      const auto& seq = eojeol.candidates[c];
      for (std::size_t m = 0; m < seq.size(); ++m) {
        if (m) out << " + ";
        out << seq[m].surface << '=' << seq[m].lemma << '/' << seq[m].tag.label();
      }
      out << '\n';
    }
  }
}

}  // namespace morphtag
