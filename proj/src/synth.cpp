#include "morphtag/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "morphtag/error.hpp"
#include "rng.hpp"

namespace morphtag {

std::string Perturbation::str() const {
  return (lemma ? *lemma : "*") + "/" + from.label() + " | " + condition.probe.mnemonic() + "=" + condition.value +
         " -> " + to.label();
}

Perturbation Perturbation::parse(std::string_view text) {
  // Same shape as a one-condition rule line.
  const Rule rule = parse_rule(std::string(text) + " # score=0");
  if (rule.conditions.size() != 1) throw FormatError("perturbation needs exactly one condition: " + std::string(text));
  Perturbation p{rule.lexeme == "*" ? std::nullopt : std::optional<std::string>(rule.lexeme), rule.current_tag,
                 rule.conditions[0], rule.corrected_tag};
  return p;
}

void SynthSpec::validate() const {
  const auto fail = [](const std::string& what) { throw std::invalid_argument("synth: " + what); };
  if (content_tags < 1 || content_tags > 50) fail("content_tags must be in [1, 50]");
  if (functional_tags < 1 || functional_tags > 50) fail("functional_tags must be in [1, 50]");
  if (content_vocab < content_tags || content_vocab > 1600) fail("content_vocab must be in [content_tags, 1600]");
  if (functional_vocab < functional_tags || functional_vocab > 100) {
    fail("functional_vocab must be in [functional_tags, 100]");
  }
  if (!(ambiguity >= 0.0 && ambiguity <= 1.0)) fail("ambiguity must be in [0, 1]");
  if (ambiguity > 0.0 && (content_tags < 2 || functional_tags < 2)) fail("ambiguity needs two tags per class");
  if (branching < 1) fail("branching must be at least 1");
  if (!(zipf >= 0.0)) fail("zipf must be non-negative");
  if (sentences < 1) fail("sentences must be at least 1");
  if (min_eojeols < 1 || max_eojeols < min_eojeols) fail("need 1 <= min_eojeols <= max_eojeols");
  if (auto_perturbations > 0 && functional_tags < 2) fail("automatic perturbations need two functional tags");
  if (!(auto_fire_rate > 0.0 && auto_fire_rate < 1.0)) fail("auto_fire_rate must be in (0, 1)");
}

namespace {

using detail::bounded;
using detail::unit;

std::string encode(char32_t cp) {
  std::string out;
  out += static_cast<char>(0xE0 | (cp >> 12));
  out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
  out += static_cast<char>(0x80 | (cp & 0x3F));
  return out;
}

// Open syllables (no final consonant) of the Hangul block.
constexpr char32_t kContentBase = 0xAC00;
constexpr char32_t kFunctionalBase = 0xC544;
constexpr std::size_t kContentSyllables = 40;

struct Distribution {
  std::vector<std::size_t> items;
  std::vector<double> cumulative;

  std::size_t draw(std::mt19937_64& rng) const {
    const double x = unit(rng) * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    return items[std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), items.size() - 1)];
  }
};

Distribution weighted(std::vector<std::size_t> items, const std::vector<double>& weights) {
  Distribution d{std::move(items), {}};
  double sum = 0.0;
  for (const double w : weights) d.cumulative.push_back(sum += w);
  return d;
}

Distribution random_successors(std::vector<std::size_t> pool, std::size_t branching, std::mt19937_64& rng) {
  detail::shuffle(pool, rng);
  pool.resize(std::min(branching, pool.size()));
  std::sort(pool.begin(), pool.end());
  std::vector<double> weights;
  for (std::size_t i = 0; i < pool.size(); ++i) weights.push_back(0.2 + 0.8 * unit(rng));
  return weighted(std::move(pool), weights);
}

bool matches(const Perturbation& p, const TaggedSentence& s, std::size_t e, std::size_t m) {
  const auto& here = s.eojeols[e].morphemes[m];
  if (here.tag != p.from || (p.lemma && here.lemma != *p.lemma)) return false;
  const auto value = probe_value(s, e, m, p.condition.probe);
  return value && *value == p.condition.value;
}

void apply(const Perturbation& p, GoldCorpus& corpus, std::vector<std::vector<std::vector<char>>>& touched) {
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    auto& sentence = corpus.sentences[s];
    for (std::size_t e = 0; e < sentence.eojeols.size(); ++e) {
      for (std::size_t m = 0; m < sentence.eojeols[e].morphemes.size(); ++m) {
        if (!matches(p, sentence, e, m)) continue;
        sentence.eojeols[e].morphemes[m].tag = p.to;
        touched[s][e][m] = 1;
      }
    }
  }
}

}  // namespace

SynthCorpus generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const std::size_t nc = spec.content_tags;
  const std::size_t nf = spec.functional_tags;
  const std::size_t k = nc + nf;
  const std::size_t rank1 = (nf + 1) / 2;

  std::vector<Tag> tags;
  std::vector<TagPath> paths;
  std::vector<TagsetProjection::Rule> rules;
  for (std::size_t t = 0; t < k; ++t) {
    const bool content = t < nc;
    const std::size_t i = content ? t : t - nc;
    tags.emplace_back((content ? "C" : "F") + std::to_string(i));
    paths.push_back(TagPath({content ? "content" : "functional", (content ? "c" : "f") + std::to_string(i)}));
    rules.push_back({paths.back(), tags.back()});
  }
  const auto tag_id = [&](const Tag& tag) -> std::optional<std::size_t> {
    const auto it = std::find(tags.begin(), tags.end(), tag);
    if (it == tags.end()) return std::nullopt;
    return static_cast<std::size_t>(it - tags.begin());
  };
  for (const auto& p : spec.perturbations) {
    for (const Tag* t : {&p.from, &p.to}) {
      if (!tag_id(*t)) throw std::invalid_argument("perturbation references unknown tag '" + t->label() + "'");
    }
    if (p.condition.probe.feature == Feature::Tag && !Tag::valid_label(p.condition.value)) {
      throw std::invalid_argument("perturbation condition has invalid tag '" + p.condition.value + "'");
    }
    if (p.condition.probe.feature == Feature::Tag && !tag_id(Tag(p.condition.value))) {
      throw std::invalid_argument("perturbation references unknown tag '" + p.condition.value + "'");
    }
    if (!p.condition.probe.valid()) throw std::invalid_argument("perturbation has an invalid probe");
  }

  // Generating chain: BOS and content tags lead anywhere allowed, first-rank
  // functional tags lead to second-rank ones or back to content, second-rank
  // ones back to content.
  std::vector<std::size_t> content_ids(nc), all_ids(k), after_rank1;
  std::iota(content_ids.begin(), content_ids.end(), std::size_t{0});
  std::iota(all_ids.begin(), all_ids.end(), std::size_t{0});
  after_rank1 = content_ids;
  for (std::size_t t = nc + rank1; t < k; ++t) after_rank1.push_back(t);
  const Distribution start = random_successors(content_ids, spec.branching, rng);
  std::vector<Distribution> next;
  for (std::size_t t = 0; t < k; ++t) {
    if (t < nc) {
      next.push_back(random_successors(all_ids, spec.branching, rng));
    } else if (t < nc + rank1) {
      next.push_back(random_successors(after_rank1, spec.branching, rng));
    } else {
      next.push_back(random_successors(content_ids, spec.branching, rng));
    }
  }

  // Lemma inventories.
  std::vector<std::string> content_lemmas, functional_lemmas;
  {
    std::vector<std::size_t> combos(kContentSyllables * kContentSyllables);
    std::iota(combos.begin(), combos.end(), std::size_t{0});
    detail::shuffle(combos, rng);
    for (std::size_t i = 0; i < spec.content_vocab; ++i) {
      const auto a = static_cast<char32_t>(combos[i] / kContentSyllables);
      const auto b = static_cast<char32_t>(combos[i] % kContentSyllables);
      content_lemmas.push_back(encode(kContentBase + 28 * a) + encode(kContentBase + 28 * b));
    }
    for (std::size_t i = 0; i < spec.functional_vocab; ++i) {
      functional_lemmas.push_back(encode(kFunctionalBase + 28 * static_cast<char32_t>(i)));
    }
  }
  std::vector<std::vector<std::string>> lemmas_of(k);
  const auto assign = [&](const std::vector<std::string>& lemmas, std::size_t first, std::size_t count) {
    for (std::size_t i = 0; i < lemmas.size(); ++i) lemmas_of[first + i % count].push_back(lemmas[i]);
    std::vector<std::size_t> order(lemmas.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    detail::shuffle(order, rng);
    const auto shared = static_cast<std::size_t>(std::llround(spec.ambiguity * static_cast<double>(lemmas.size())));
    for (std::size_t j = 0; j < shared; ++j) {
      const std::size_t i = order[j];
      const std::size_t own = i % count;
      const std::size_t other = (own + 1 + bounded(rng, count - 1)) % count;
      lemmas_of[first + other].push_back(lemmas[i]);
    }
  };
  assign(content_lemmas, 0, nc);
  assign(functional_lemmas, nc, nf);
  std::vector<Distribution> emit;
  for (std::size_t t = 0; t < k; ++t) {
    std::vector<std::size_t> ranks(lemmas_of[t].size());
    std::iota(ranks.begin(), ranks.end(), std::size_t{0});
    detail::shuffle(ranks, rng);
    std::vector<double> weights;
    for (const std::size_t r : ranks) weights.push_back(1.0 / std::pow(static_cast<double>(r + 1), spec.zipf));
    std::vector<std::size_t> items(lemmas_of[t].size());
    std::iota(items.begin(), items.end(), std::size_t{0});
    emit.push_back(weighted(std::move(items), weights));
  }

  SynthCorpus out{{}, {}, ConnectivityTable::allow_all(), TagsetProjection(rules, tags[0]), {}, 0};
  for (std::size_t s = 0; s < spec.sentences; ++s) {
    const std::size_t n = spec.min_eojeols + bounded(rng, spec.max_eojeols - spec.min_eojeols + 1);
    TaggedSentence sentence;
    std::size_t t = start.draw(rng);
    while (true) {
      if (t < nc) {
        if (sentence.eojeols.size() == n) break;
        sentence.eojeols.emplace_back();
      }
      auto& eojeol = sentence.eojeols.back();
      const std::string& lemma = lemmas_of[t][emit[t].draw(rng)];
      eojeol.surface += lemma;
      eojeol.morphemes.push_back({lemma, tags[t], "", false});
      t = next[t].draw(rng);
    }
    out.corpus.sentences.push_back(std::move(sentence));
  }

  std::vector<std::vector<std::vector<char>>> touched;
  for (const auto& sentence : out.corpus.sentences) {
    auto& flags = touched.emplace_back();
    for (const auto& e : sentence.eojeols) flags.emplace_back(e.morphemes.size(), 0);
  }
  for (const auto& p : spec.perturbations) {
    apply(p, out.corpus, touched);
    out.perturbations.push_back(p);
  }

  if (spec.auto_perturbations > 0) {
    const ContextProbe probe = ContextProbe::parse("N2FMT");
    struct Site {
      std::size_t total = 0;
      std::map<std::string, std::size_t> by_value;
    };
    std::map<std::pair<std::string, std::size_t>, Site> sites;
    for (const auto& sentence : out.corpus.sentences) {
      for (std::size_t e = 0; e < sentence.eojeols.size(); ++e) {
        for (std::size_t m = 0; m < sentence.eojeols[e].morphemes.size(); ++m) {
          const auto& here = sentence.eojeols[e].morphemes[m];
          const std::size_t t = *tag_id(here.tag);
          if (t < nc) continue;
          Site& site = sites[{here.lemma, t}];
          ++site.total;
          if (const auto v = probe_value(sentence, e, m, probe)) ++site.by_value[*v];
        }
      }
    }
    std::vector<std::pair<std::pair<std::string, std::size_t>, const Site*>> ranked;
    for (const auto& [key, site] : sites) ranked.emplace_back(key, &site);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second->total > b.second->total; });
    ranked.resize(std::min(ranked.size(), spec.auto_perturbations));

    std::vector<Perturbation> automatic;
    for (const auto& [key, site] : ranked) {
      const auto& [lemma, from] = key;
      std::vector<std::pair<std::string, std::size_t>> values(site->by_value.begin(), site->by_value.end());
      std::stable_sort(values.begin(), values.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
      const double budget = spec.auto_fire_rate * static_cast<double>(site->total);
      // Prefer a replacement tag of the same rank.
      const bool first_rank = from < nc + rank1;
      std::vector<std::size_t> choices;
      for (std::size_t t = nc; t < k; ++t) {
        if (t != from && (t < nc + rank1) == first_rank) choices.push_back(t);
      }
      if (choices.empty()) {
        for (std::size_t t = nc; t < k; ++t) {
          if (t != from) choices.push_back(t);
        }
      }
      const Tag to = tags[choices[bounded(rng, choices.size())]];
      std::size_t used = 0;
      for (const auto& [value, count] : values) {
        if (used > 0 && static_cast<double>(used + count) > budget) continue;
        used += count;
        automatic.push_back({lemma, tags[from], {probe, value}, to});
      }
    }
    for (const auto& p : automatic) {
      apply(p, out.corpus, touched);
      out.perturbations.push_back(p);
    }
  }
  for (const auto& flags : touched) {
    for (const auto& e : flags) out.perturbed_sites += static_cast<std::size_t>(std::count(e.begin(), e.end(), 1));
  }

  // Dictionary: every lemma under each tag that may emit it, plus every
  // (lemma, tag) the perturbations produced.
  std::set<std::pair<std::size_t, std::string>> listed;
  for (std::size_t t = 0; t < k; ++t) {
    for (const auto& lemma : lemmas_of[t]) listed.insert({t, lemma});
  }
  for (const auto& sentence : out.corpus.sentences) {
    for (const auto& e : sentence.eojeols) {
      for (const auto& m : e.morphemes) listed.insert({*tag_id(m.tag), m.lemma});
    }
  }
  for (const auto& [t, lemma] : listed) out.entries.push_back({lemma, lemma, paths[t]});
  out.connectivity = ConnectivityTable::restrict_to(
      {{TagPath({"content"}), TagPath({"functional"})}, {TagPath({"functional"}), TagPath({"functional"})}});
  return out;
}

}  // namespace morphtag
