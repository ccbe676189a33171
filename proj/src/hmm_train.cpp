#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>

#include "morphtag/error.hpp"
#include "morphtag/hmm.hpp"

namespace morphtag {
namespace {

struct ExpectedCounts {
  std::vector<double> trans;  // (K+1) x K, BOS row last
  std::vector<double> emit;   // K x V over the corpus vocabulary
  double log_likelihood = 0.0;
};

// Corpus lemmas and, per tag, the lemmas the dictionary lets it emit.
struct CorpusIndex {
  std::vector<std::string> vocabulary;
  std::vector<std::vector<std::size_t>> lemma_ids;  // per sentence, per slot
  std::vector<std::vector<std::size_t>> support;    // per tag, sorted lemma ids

  CorpusIndex(const std::vector<UntaggedSentence>& corpus, std::size_t num_tags) {
    std::set<std::string> lemmas;
    for (const auto& sentence : corpus) {
      for (const auto& slot : sentence) lemmas.insert(slot.lemma);
    }
    vocabulary.assign(lemmas.begin(), lemmas.end());
    std::vector<std::set<std::size_t>> allowed_by_tag(num_tags);
    for (const auto& sentence : corpus) {
      auto& ids = lemma_ids.emplace_back();
      for (const auto& slot : sentence) {
        const auto m = static_cast<std::size_t>(
            std::lower_bound(vocabulary.begin(), vocabulary.end(), slot.lemma) - vocabulary.begin());
        ids.push_back(m);
        for (const std::size_t t : slot.allowed) allowed_by_tag[t].insert(m);
      }
    }
    for (const auto& s : allowed_by_tag) support.emplace_back(s.begin(), s.end());
  }
};

void check_corpus(const HmmModel& model, const std::vector<UntaggedSentence>& corpus) {
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    for (const auto& slot : corpus[s]) {
      if (slot.allowed.empty()) {
        throw std::invalid_argument("sentence #" + std::to_string(s + 1) + ": morpheme '" + slot.lemma +
                                    "' has no allowed tags");
      }
      for (std::size_t i = 0; i < slot.allowed.size(); ++i) {
        if (slot.allowed[i] >= model.num_tags() || (i && slot.allowed[i] <= slot.allowed[i - 1])) {
          throw std::invalid_argument("sentence #" + std::to_string(s + 1) +
                                      ": allowed tags must be sorted, unique model indices");
        }
      }
    }
  }
}

// Scaled forward-backward restricted to each slot's allowed tags.
ExpectedCounts expected_counts(const HmmModel& model, const std::vector<UntaggedSentence>& corpus,
                               const CorpusIndex& index) {
  const std::size_t k = model.num_tags();
  const std::size_t v = index.vocabulary.size();
  ExpectedCounts counts;
  counts.trans.assign((k + 1) * k, 0.0);
  counts.emit.assign(k * v, 0.0);

  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& slots = corpus[s];
    const std::size_t n = slots.size();
    if (n == 0) continue;
    std::vector<std::vector<double>> emit(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (const std::size_t t : slots[i].allowed) emit[i].push_back(model.emit(t, slots[i].lemma));
    }

    std::vector<std::vector<double>> alpha(n);
    std::vector<double> scale(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& allowed = slots[i].allowed;
      alpha[i].assign(allowed.size(), 0.0);
      for (std::size_t j = 0; j < allowed.size(); ++j) {
        double in = 0.0;
        if (i == 0) {
          in = model.trans(HmmModel::kBos, allowed[j]);
        } else {
          const auto& prev = slots[i - 1].allowed;
          for (std::size_t p = 0; p < prev.size(); ++p) in += alpha[i - 1][p] * model.trans(prev[p], allowed[j]);
        }
        alpha[i][j] = in * emit[i][j];
      }
      double c = 0.0;
      for (const double a : alpha[i]) c += a;
      if (!(c > 0.0)) {
        throw TrainingError("sentence #" + std::to_string(s + 1) + " admits no legal tag sequence");
      }
      for (double& a : alpha[i]) a /= c;
      scale[i] = c;
      counts.log_likelihood += std::log(c);
    }

    std::vector<std::vector<double>> beta(n);
    beta[n - 1].assign(slots[n - 1].allowed.size(), 1.0);
    for (std::size_t i = n - 1; i-- > 0;) {
      const auto& cur = slots[i].allowed;
      const auto& next = slots[i + 1].allowed;
      beta[i].assign(cur.size(), 0.0);
      for (std::size_t p = 0; p < cur.size(); ++p) {
        double sum = 0.0;
        for (std::size_t j = 0; j < next.size(); ++j) {
          sum += model.trans(cur[p], next[j]) * emit[i + 1][j] * beta[i + 1][j];
        }
        beta[i][p] = sum / scale[i + 1];
      }
    }

    const auto& lemma_ids = index.lemma_ids[s];
    for (std::size_t i = 0; i < n; ++i) {
      const auto& allowed = slots[i].allowed;
      for (std::size_t j = 0; j < allowed.size(); ++j) {
        const double gamma = alpha[i][j] * beta[i][j];
        counts.emit[allowed[j] * v + lemma_ids[i]] += gamma;
        if (i == 0) counts.trans[k * k + allowed[j]] += gamma;
      }
      if (i + 1 == n) continue;
      const auto& next = slots[i + 1].allowed;
      for (std::size_t p = 0; p < allowed.size(); ++p) {
        for (std::size_t j = 0; j < next.size(); ++j) {
          const double xi =
              alpha[i][p] * model.trans(allowed[p], next[j]) * emit[i + 1][j] * beta[i + 1][j] / scale[i + 1];
          counts.trans[allowed[p] * k + next[j]] += xi;
        }
      }
    }
  }
  return counts;
}

std::vector<double> smoothed_transitions(const std::vector<double>& counts, std::size_t k, double lambda) {
  std::vector<double> trans((k + 1) * k);
  for (std::size_t r = 0; r <= k; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) total += counts[r * k + c];
    const double denom = total + lambda * static_cast<double>(k);
    for (std::size_t c = 0; c < k; ++c) trans[r * k + c] = (counts[r * k + c] + lambda) / denom;
  }
  return trans;
}

HmmModel maximize(const HmmModel& shape, const ExpectedCounts& counts, const CorpusIndex& index) {
  const std::size_t k = shape.num_tags();
  const std::size_t v = index.vocabulary.size();
  const Smoothing& sm = shape.smoothing();
  std::vector<double> emit(k * v, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    const auto& support = index.support[t];
    if (support.empty()) {
      for (std::size_t m = 0; m < v; ++m) emit[t * v + m] = (1.0 - sm.unk_mass) / static_cast<double>(v);
      continue;
    }
    double total = 0.0;
    for (const std::size_t m : support) total += counts.emit[t * v + m];
    const double denom = total + sm.lambda_emit * static_cast<double>(support.size());
    for (const std::size_t m : support) {
      emit[t * v + m] = (1.0 - sm.unk_mass) * (counts.emit[t * v + m] + sm.lambda_emit) / denom;
    }
  }
  return HmmModel(shape.tags(), index.vocabulary, smoothed_transitions(counts.trans, k, sm.lambda_trans),
                  std::move(emit), sm, shape.open_class());
}

// Log density of the Dirichlet prior that add-lambda smoothing corresponds to,
// up to a constant. Emission terms cover only dictionary-admissible pairs.
double log_prior(const HmmModel& model, const CorpusIndex& index) {
  const Smoothing& sm = model.smoothing();
  const std::size_t k = model.num_tags();
  double trans_term = 0.0;
  for (std::size_t r = 0; r <= k; ++r) {
    const std::size_t prev = r == k ? HmmModel::kBos : r;
    for (std::size_t c = 0; c < k; ++c) trans_term += model.log_trans(prev, c);
  }
  double emit_term = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    for (const std::size_t m : index.support[t]) emit_term += model.log_emit(t, index.vocabulary[m]);
  }
  return sm.lambda_trans * trans_term + sm.lambda_emit * emit_term;
}

constexpr int kMaxHalvings = 20;

// (1 - step) * from + step * to, over the corpus vocabulary. Rows of `from`
// are first restricted to that vocabulary and renormalized.
HmmModel blend(const HmmModel& from, const HmmModel& to, double step, const CorpusIndex& index) {
  const std::size_t k = to.num_tags();
  const std::size_t v = index.vocabulary.size();
  const double keep = to.smoothing().unk_mass;
  std::vector<double> trans(to.trans_table());
  for (std::size_t i = 0; i < trans.size(); ++i) trans[i] = (1.0 - step) * from.trans_table()[i] + step * trans[i];
  std::vector<double> emit(to.emit_table());
  for (std::size_t t = 0; t < k; ++t) {
    std::vector<double> row(v);
    double total = 0.0;
    for (std::size_t m = 0; m < v; ++m) total += row[m] = from.emit(t, std::string_view(index.vocabulary[m]));
    for (std::size_t m = 0; m < v; ++m) {
      emit[t * v + m] = (1.0 - step) * row[m] * (1.0 - keep) / total + step * emit[t * v + m];
    }
  }
  return HmmModel(to.tags(), index.vocabulary, std::move(trans), std::move(emit), to.smoothing(), to.open_class());
}

}  // namespace

HmmModel train_supervised(const std::vector<TaggedSentence>& corpus, const std::vector<Tag>& tagset,
                          const Smoothing& smoothing) {
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
  if (tagset.empty()) throw std::invalid_argument("tag set is empty");
  smoothing.validate();
  std::map<Tag, std::size_t> tag_ids;
  for (const auto& t : tagset) tag_ids.emplace(t, tag_ids.size());
  if (tag_ids.size() != tagset.size()) throw std::invalid_argument("duplicate tag in tag set");

  std::set<std::string> lemmas;
  std::set<std::string> offenders;
  for (const auto& sentence : corpus) {
    for (const auto& eojeol : sentence.eojeols) {
      for (const auto& m : eojeol.morphemes) {
        lemmas.insert(m.lemma);
        if (!tag_ids.count(m.tag)) offenders.insert(m.tag.label());
      }
    }
  }
  if (!offenders.empty()) {
    std::string list;
    for (const auto& o : offenders) list += (list.empty() ? "" : ", ") + o;
    throw TrainingError("corpus tags missing from the tag set: " + list);
  }
  if (lemmas.empty()) throw std::invalid_argument("training corpus has no morphemes");

  const std::vector<std::string> vocabulary(lemmas.begin(), lemmas.end());
  const std::size_t k = tagset.size();
  const std::size_t v = vocabulary.size();
  std::vector<double> trans_counts((k + 1) * k, 0.0);
  std::vector<double> emit_counts(k * v, 0.0);
  std::vector<double> tag_totals(k, 0.0);
  for (const auto& sentence : corpus) {
    std::size_t prev = k;
    for (const auto& eojeol : sentence.eojeols) {
      for (const auto& m : eojeol.morphemes) {
        const std::size_t t = tag_ids.at(m.tag);
        const auto lemma = static_cast<std::size_t>(
            std::lower_bound(vocabulary.begin(), vocabulary.end(), m.lemma) - vocabulary.begin());
        trans_counts[prev * k + t] += 1.0;
        emit_counts[t * v + lemma] += 1.0;
        tag_totals[t] += 1.0;
        prev = t;
      }
    }
  }

  std::vector<double> emit(k * v);
  for (std::size_t t = 0; t < k; ++t) {
    const double denom = tag_totals[t] + smoothing.lambda_emit * static_cast<double>(v);
    for (std::size_t m = 0; m < v; ++m) {
      emit[t * v + m] = (1.0 - smoothing.unk_mass) * (emit_counts[t * v + m] + smoothing.lambda_emit) / denom;
    }
  }
  return HmmModel(tagset, vocabulary, smoothed_transitions(trans_counts, k, smoothing.lambda_trans),
                  std::move(emit), smoothing);
}

EmResult baum_welch(const HmmModel& init, const std::vector<UntaggedSentence>& corpus, std::size_t max_iters,
                    double tol) {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (corpus.empty()) throw std::invalid_argument("EM corpus is empty");
  check_corpus(init, corpus);
  const CorpusIndex index(corpus, init.num_tags());
  if (index.vocabulary.empty()) throw std::invalid_argument("EM corpus has no morphemes");

  HmmModel current = init;
  ExpectedCounts counts = expected_counts(current, corpus, index);
  EmResult result{current, {counts.log_likelihood}, {counts.log_likelihood + log_prior(current, index)}, {}, 0};
  for (std::size_t it = 1; it <= max_iters; ++it) {
    const HmmModel target = maximize(current, counts, index);
    // Safeguard: the smoothed update can lower the raw likelihood, so back off
    // toward the current parameters until neither sequence decreases.
    std::optional<HmmModel> accepted;
    ExpectedCounts next_counts;
    double step = 1.0;
    for (int halvings = 0; halvings <= kMaxHalvings; ++halvings, step /= 2.0) {
      HmmModel candidate = step == 1.0 ? target : blend(current, target, step, index);
      next_counts = expected_counts(candidate, corpus, index);
      const double objective = next_counts.log_likelihood + log_prior(candidate, index);
      if (next_counts.log_likelihood >= result.log_likelihood.back() && objective >= result.objective.back()) {
        result.log_likelihood.push_back(next_counts.log_likelihood);
        result.objective.push_back(objective);
        accepted = std::move(candidate);
        break;
      }
    }
    if (!accepted) break;
    current = std::move(*accepted);
    counts = std::move(next_counts);
    result.steps.push_back(step);
    result.iterations = it;
    const double gain = result.objective[it] - result.objective[it - 1];
    if (gain < tol) break;
  }
  result.model = std::move(current);
  return result;
}

double corpus_log_likelihood(const HmmModel& model, const std::vector<UntaggedSentence>& corpus) {
  check_corpus(model, corpus);
  const CorpusIndex index(corpus, model.num_tags());
  return expected_counts(model, corpus, index).log_likelihood;
}

HmmModel uniform_model(const std::vector<Tag>& tagset, const std::vector<UntaggedSentence>& corpus,
                       const Smoothing& smoothing) {
  if (tagset.empty()) throw std::invalid_argument("tag set is empty");
  smoothing.validate();
  const std::size_t k = tagset.size();
  for (const auto& sentence : corpus) {
    for (const auto& slot : sentence) {
      for (const std::size_t t : slot.allowed) {
        if (t >= k) throw std::invalid_argument("allowed tag index out of range");
      }
    }
  }
  const CorpusIndex index(corpus, k);
  const std::size_t v = index.vocabulary.size();
  if (v == 0) throw std::invalid_argument("corpus has no morphemes");
  std::vector<double> trans((k + 1) * k, 1.0 / static_cast<double>(k));
  std::vector<double> emit(k * v, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    const auto& support = index.support[t];
    if (support.empty()) {
      for (std::size_t m = 0; m < v; ++m) emit[t * v + m] = (1.0 - smoothing.unk_mass) / static_cast<double>(v);
    } else {
      for (const std::size_t m : support) {
        emit[t * v + m] = (1.0 - smoothing.unk_mass) / static_cast<double>(support.size());
      }
    }
  }
  return HmmModel(tagset, index.vocabulary, std::move(trans), std::move(emit), smoothing);
}

}  // namespace morphtag
