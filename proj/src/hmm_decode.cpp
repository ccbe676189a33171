#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "morphtag/error.hpp"
#include "morphtag/hmm.hpp"

namespace morphtag {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_slots(const HmmModel& model, std::span<const DecodeSlot> slots) {
  if (slots.empty()) throw std::invalid_argument("cannot decode an empty morpheme sequence");
  for (const auto& slot : slots) {
    if (slot.allowed.empty()) throw std::invalid_argument("morpheme '" + slot.lemma + "' has no allowed tags");
    for (std::size_t i = 0; i < slot.allowed.size(); ++i) {
      if (slot.allowed[i] >= model.num_tags()) throw std::invalid_argument("allowed tag index out of range");
      if (i && slot.allowed[i] <= slot.allowed[i - 1]) {
        throw std::invalid_argument("allowed tags must be sorted and unique");
      }
    }
  }
}

// One way to read an Eojeol: a segmentation plus, per morpheme, a set of
// tags such that every combination is a legal dictionary analysis.
struct EojeolOption {
  std::vector<std::string> surfaces;
  std::vector<std::string> lemmas;
  std::vector<std::vector<std::size_t>> allowed;
};

using TagTuple = std::vector<std::size_t>;

// Splits a set of legal tag tuples into boxes (cartesian products) whose union
// is exactly the set, so per-slot allowed sets never admit an illegal mix.
void decompose(const std::vector<TagTuple>& tuples, std::vector<std::vector<std::vector<std::size_t>>>& boxes) {
  const std::size_t width = tuples.front().size();
  std::vector<std::set<std::size_t>> columns(width);
  for (const auto& t : tuples) {
    for (std::size_t i = 0; i < width; ++i) columns[i].insert(t[i]);
  }
  std::size_t product = 1;
  for (const auto& c : columns) product = std::min<std::size_t>(product * c.size(), tuples.size() + 1);
  if (product == tuples.size()) {
    std::vector<std::vector<std::size_t>> box;
    for (const auto& c : columns) box.emplace_back(c.begin(), c.end());
    boxes.push_back(std::move(box));
    return;
  }
  std::size_t split = 0;
  while (columns[split].size() == 1) ++split;
  for (const std::size_t value : columns[split]) {
    std::vector<TagTuple> part;
    for (const auto& t : tuples) {
      if (t[split] == value) part.push_back(t);
    }
    decompose(part, boxes);
  }
}

std::vector<EojeolOption> options_for(const HmmModel& model, const EojeolAnalysis& analysis) {
  // Group candidates by segmentation, in order of first appearance.
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> shapes;
  std::vector<std::set<TagTuple>> tuples;
  for (const auto& candidate : analysis.candidates) {
    std::vector<std::string> surfaces;
    std::vector<std::string> lemmas;
    TagTuple tags;
    bool usable = true;
    for (const auto& m : candidate) {
      surfaces.push_back(m.surface);
      lemmas.push_back(m.lemma);
      const auto t = model.tag_index(m.tag);
      if (!t) usable = false;
      tags.push_back(t.value_or(0));
    }
    if (!usable) continue;
    auto key = std::make_pair(std::move(surfaces), std::move(lemmas));
    auto it = std::find(shapes.begin(), shapes.end(), key);
    if (it == shapes.end()) {
      shapes.push_back(std::move(key));
      tuples.emplace_back();
      it = shapes.end() - 1;
    }
    tuples[static_cast<std::size_t>(it - shapes.begin())].insert(std::move(tags));
  }

  std::vector<EojeolOption> options;
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    std::vector<std::vector<std::vector<std::size_t>>> boxes;
    decompose(std::vector<TagTuple>(tuples[s].begin(), tuples[s].end()), boxes);
    for (auto& box : boxes) options.push_back({shapes[s].first, shapes[s].second, std::move(box)});
  }
  return options;
}

}  // namespace

TagSequence viterbi(const HmmModel& model, std::span<const DecodeSlot> slots) {
  check_slots(model, slots);
  const std::size_t n = slots.size();
  std::vector<std::vector<double>> delta(n);
  std::vector<std::vector<std::size_t>> back(n);

  const auto& first = slots[0].allowed;
  for (const std::size_t t : first) {
    delta[0].push_back(model.log_trans(HmmModel::kBos, t) + model.log_emit(t, slots[0].lemma));
  }
  for (std::size_t i = 1; i < n; ++i) {
    const auto& prev = slots[i - 1].allowed;
    for (const std::size_t t : slots[i].allowed) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t j = 0; j < prev.size(); ++j) {
        const double cand = delta[i - 1][j] + model.log_trans(prev[j], t);
        if (cand > best) {
          best = cand;
          arg = j;
        }
      }
      delta[i].push_back(best + model.log_emit(t, slots[i].lemma));
      back[i].push_back(arg);
    }
  }

  double best = kNegInf;
  std::size_t arg = 0;
  for (std::size_t j = 0; j < delta[n - 1].size(); ++j) {
    if (delta[n - 1][j] > best) {
      best = delta[n - 1][j];
      arg = j;
    }
  }
  if (best == kNegInf) throw DecodeFailure("every tag sequence has probability zero");

  TagSequence out;
  out.log_score = best;
  out.tags.resize(n);
  for (std::size_t i = n; i-- > 0;) {
    out.tags[i] = slots[i].allowed[arg];
    if (i > 0) arg = back[i][arg];
  }
  return out;
}

double score_sequence(const HmmModel& model, std::span<const DecodeSlot> slots, std::span<const std::size_t> tags) {
  if (slots.size() != tags.size()) throw std::invalid_argument("tag sequence length mismatch");
  double score = 0.0;
  std::size_t prev = HmmModel::kBos;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    score = score + model.log_trans(prev, tags[i]);
    score = score + model.log_emit(tags[i], slots[i].lemma);
    prev = tags[i];
  }
  return score;
}

TaggedSentence tag_lattice(const HmmModel& model, const SentenceLattice& lattice, std::size_t sentence_cap) {
  if (lattice.eojeols.empty()) throw std::invalid_argument("empty lattice");
  if (sentence_cap == 0) throw std::invalid_argument("sentence-candidate cap must be at least 1");

  std::vector<std::vector<EojeolOption>> options;
  std::size_t total = 1;
  for (const auto& eojeol : lattice.eojeols) {
    options.push_back(options_for(model, eojeol));
    if (options.back().empty()) {
      throw DecodeFailure("no analysis of eojeol '" + eojeol.surface + "' uses the model's tags");
    }
    total = total > sentence_cap ? total : total * options.back().size();
  }

  struct Best {
    std::vector<std::size_t> choice;
    TagSequence tags;
  };
  std::optional<Best> best;
  std::vector<std::size_t> choice(options.size(), 0);
  std::size_t visited = 0;
  while (visited < sentence_cap) {
    std::vector<DecodeSlot> slots;
    for (std::size_t e = 0; e < options.size(); ++e) {
      const auto& opt = options[e][choice[e]];
      for (std::size_t m = 0; m < opt.lemmas.size(); ++m) slots.push_back({opt.lemmas[m], opt.allowed[m]});
    }
    ++visited;
    try {
      TagSequence decoded = viterbi(model, slots);
      const bool better = [&] {
        if (!best) return true;
        if (decoded.log_score != best->tags.log_score) return decoded.log_score > best->tags.log_score;
        if (decoded.tags.size() != best->tags.tags.size()) return decoded.tags.size() < best->tags.tags.size();
        return decoded.tags < best->tags.tags;
      }();
      if (better) best = Best{choice, std::move(decoded)};
    } catch (const DecodeFailure&) {
    }
    std::size_t e = options.size();
    while (e-- > 0) {
      if (++choice[e] < options[e].size()) break;
      choice[e] = 0;
    }
    if (e == static_cast<std::size_t>(-1)) break;
  }
  if (!best) throw DecodeFailure("no sentence candidate has a legal tag sequence");

  TaggedSentence out;
  out.score = best->tags.log_score;
  out.truncated = total > sentence_cap;
  std::size_t k = 0;
  for (std::size_t e = 0; e < options.size(); ++e) {
    const auto& opt = options[e][best->choice[e]];
    TaggedEojeol eojeol{lattice.eojeols[e].surface, {}};
    for (std::size_t m = 0; m < opt.lemmas.size(); ++m, ++k) {
      eojeol.morphemes.push_back({opt.lemmas[m], model.tags()[best->tags.tags[k]], opt.surfaces[m],
                                  !model.lemma_index(opt.lemmas[m]).has_value()});
    }
    out.eojeols.push_back(std::move(eojeol));
  }
  return out;
}

std::vector<DecodeSlot> slots_for(const TaggedSentence& analyzed, const HmmModel& model, const Lexicon& lexicon,
                                  const TagsetProjection& projection) {
  std::vector<DecodeSlot> slots;
  for (const auto& eojeol : analyzed.eojeols) {
    for (const auto& m : eojeol.morphemes) {
      DecodeSlot slot{m.lemma, {}};
      for (const auto& tag : lexicon.tags_for_lemma(m.lemma, projection)) {
        if (const auto t = model.tag_index(tag)) slot.allowed.push_back(*t);
      }
      std::sort(slot.allowed.begin(), slot.allowed.end());
      if (slot.allowed.empty()) slot.allowed = model.open_class_indices();
      slots.push_back(std::move(slot));
    }
  }
  return slots;
}

TaggedSentence tag_analyzed(const HmmModel& model, const TaggedSentence& analyzed, const Lexicon& lexicon,
                            const TagsetProjection& projection) {
  const auto slots = slots_for(analyzed, model, lexicon, projection);
  const TagSequence decoded = viterbi(model, slots);
  TaggedSentence out = analyzed;
  out.score = decoded.log_score;
  out.truncated = false;
  std::size_t k = 0;
  for (auto& eojeol : out.eojeols) {
    for (auto& m : eojeol.morphemes) {
      m.tag = model.tags()[decoded.tags[k++]];
      m.unknown = !model.lemma_index(m.lemma).has_value();
    }
  }
  return out;
}

}  // namespace morphtag
