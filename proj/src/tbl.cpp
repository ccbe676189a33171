#include "morphtag/tbl.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "morphtag/error.hpp"

namespace morphtag {

// ---------------------------------------------------------------------------
// Probes and schemas

bool ContextProbe::valid() const {
  if (eojeol_offset < -3 || eojeol_offset > 3) return false;
  if (eojeol_offset == 0) {
    return (anchor == Anchor::Previous || anchor == Anchor::Next) && feature == Feature::Tag;
  }
  return anchor == Anchor::First || anchor == Anchor::Last;
}

std::string ContextProbe::mnemonic() const {
  if (eojeol_offset == 0) return anchor == Anchor::Previous ? "WPMT" : "WNMT";
  std::string out;
  out += eojeol_offset < 0 ? 'P' : 'N';
  out += static_cast<char>('0' + std::abs(eojeol_offset));
  out += anchor == Anchor::First ? 'F' : 'L';
  out += 'M';
  out += feature == Feature::Tag ? 'T' : 'O';
  return out;
}

ContextProbe ContextProbe::parse(std::string_view m) {
  const auto bad = [&] { return FormatError("unknown context probe '" + std::string(m) + "'"); };
  if (m == "WPMT") return {0, Anchor::Previous, Feature::Tag};
  if (m == "WNMT") return {0, Anchor::Next, Feature::Tag};
  if (m.size() != 5 || m[3] != 'M') throw bad();
  ContextProbe probe;
  if (m[1] < '1' || m[1] > '3') throw bad();
  const int distance = m[1] - '0';
  if (m[0] == 'P') {
    probe.eojeol_offset = -distance;
  } else if (m[0] == 'N') {
    probe.eojeol_offset = distance;
  } else {
    throw bad();
  }
  if (m[2] == 'F') {
    probe.anchor = Anchor::First;
  } else if (m[2] == 'L') {
    probe.anchor = Anchor::Last;
  } else {
    throw bad();
  }
  if (m[4] == 'T') {
    probe.feature = Feature::Tag;
  } else if (m[4] == 'O') {
    probe.feature = Feature::Lexeme;
  } else {
    throw bad();
  }
  return probe;
}

std::string RuleSchema::name() const {
  std::string out;
  for (const auto& p : probes) out += (out.empty() ? "" : "+") + p.mnemonic();
  return out;
}

std::vector<RuleSchema> enumerate_schemas() {
  std::vector<RuleSchema> schemas;
  for (const int offset : {-3, -2, -1, 1, 2, 3}) {
    for (const Anchor anchor : {Anchor::First, Anchor::Last}) {
      schemas.push_back({{{offset, anchor, Feature::Tag}}});
    }
  }
  schemas.push_back({{{0, Anchor::Previous, Feature::Tag}}});
  schemas.push_back({{{0, Anchor::Next, Feature::Tag}}});
  for (const int offset : {-1, 1}) {
    for (const Anchor anchor : {Anchor::First, Anchor::Last}) {
      schemas.push_back({{{offset, anchor, Feature::Lexeme}}});
    }
  }
  const std::vector<ContextProbe> base = {
      ContextProbe::parse("N1FMT"), ContextProbe::parse("P1LMT"), ContextProbe::parse("N2FMT"),
      ContextProbe::parse("N3FMT"), ContextProbe::parse("P1LMO"), ContextProbe::parse("P1FMO"),
      ContextProbe::parse("N1FMO")};
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t j = i + 1; j < base.size(); ++j) schemas.push_back({{base[i], base[j]}});
  }
  return schemas;
}

// ---------------------------------------------------------------------------
// Application

std::optional<std::string> probe_value(const TaggedSentence& sentence, std::size_t eojeol, std::size_t morpheme,
                                       const ContextProbe& probe) {
  const TaggedMorpheme* target = nullptr;
  if (probe.eojeol_offset == 0) {
    const auto& ms = sentence.eojeols[eojeol].morphemes;
    if (probe.anchor == Anchor::Previous) {
      if (morpheme == 0) return std::nullopt;
      target = &ms[morpheme - 1];
    } else {
      if (morpheme + 1 >= ms.size()) return std::nullopt;
      target = &ms[morpheme + 1];
    }
  } else {
    const auto index = static_cast<long>(eojeol) + probe.eojeol_offset;
    if (index < 0 || index >= static_cast<long>(sentence.eojeols.size())) return std::nullopt;
    const auto& ms = sentence.eojeols[static_cast<std::size_t>(index)].morphemes;
    if (ms.empty()) return std::nullopt;
    target = probe.anchor == Anchor::First ? &ms.front() : &ms.back();
  }
  return probe.feature == Feature::Tag ? target->tag.label() : target->lemma;
}

namespace {

bool rule_matches(const Rule& rule, const TaggedSentence& sentence, std::size_t e, std::size_t m) {
  const auto& morpheme = sentence.eojeols[e].morphemes[m];
  if (morpheme.lemma != rule.lexeme || morpheme.tag != rule.current_tag) return false;
  for (const auto& c : rule.conditions) {
    const auto value = probe_value(sentence, e, m, c.probe);
    if (!value || *value != c.value) return false;
  }
  return true;
}

}  // namespace

void apply_rule(const Rule& rule, TaggedSentence& sentence) {
  for (std::size_t e = 0; e < sentence.eojeols.size(); ++e) {
    for (std::size_t m = 0; m < sentence.eojeols[e].morphemes.size(); ++m) {
      if (rule_matches(rule, sentence, e, m)) sentence.eojeols[e].morphemes[m].tag = rule.corrected_tag;
    }
  }
}

TaggedSentence apply_rules(const RuleList& rules, TaggedSentence sentence) {
  for (const auto& rule : rules) apply_rule(rule, sentence);
  return sentence;
}

// ---------------------------------------------------------------------------
// Learning

namespace {

struct Effect {
  long good = 0;  // wrong -> right
  long bad = 0;   // right -> wrong
  long net() const { return good - bad; }
};

// Applies `rule` to `sentence` and tallies the realized effect against gold.
Effect apply_and_score(const Rule& rule, TaggedSentence& sentence, const TaggedSentence& gold) {
  Effect effect;
  for (std::size_t e = 0; e < sentence.eojeols.size(); ++e) {
    for (std::size_t m = 0; m < sentence.eojeols[e].morphemes.size(); ++m) {
      if (!rule_matches(rule, sentence, e, m)) continue;
      const Tag& truth = gold.eojeols[e].morphemes[m].tag;
      if (rule.current_tag == truth) ++effect.bad;
      if (rule.corrected_tag == truth) ++effect.good;
      sentence.eojeols[e].morphemes[m].tag = rule.corrected_tag;
    }
  }
  return effect;
}

constexpr char kSep = '\x1f';

struct Candidate {
  std::size_t schema = 0;
  std::string lemma;
  std::string current;
  std::vector<std::string> values;
  std::map<std::string, long> by_gold;  // matching positions per gold tag
  std::set<std::string> corrections;    // gold tags seen at error sites
};

class Learner {
 public:
  Learner(const std::vector<TaggedSentence>& first, const std::vector<TaggedSentence>& gold,
          const std::vector<RuleSchema>& schemas)
      : current_(first), gold_(gold), schemas_(schemas) {
    for (std::size_t s = 0; s < current_.size(); ++s) {
      for (const auto& e : current_[s].eojeols) {
        for (const auto& m : e.morphemes) {
          auto& list = sentences_by_lemma_[m.lemma];
          if (list.empty() || list.back() != s) list.push_back(s);
        }
      }
    }
  }

  RuleList run(const LearnOptions& options) {
    RuleList rules;
    while (rules.size() < options.max_rules) {
      auto best = best_rule();
      if (!best || best->effectiveness < options.min_score) break;
      Effect realized;
      for (const std::size_t s : sentences_by_lemma_[best->lexeme]) {
        const Effect e = apply_and_score(*best, current_[s], gold_[s]);
        realized.good += e.good;
        realized.bad += e.bad;
      }
      best->effectiveness = realized.net();
      rules.push_back(std::move(*best));
    }
    return rules;
  }

 private:
  std::string key_of(const std::string& lemma, const std::string& tag, std::size_t schema,
                     const std::vector<std::string>& values) const {
    std::string key = lemma;
    key += kSep;
    key += tag;
    key += kSep;
    key += std::to_string(schema);
    for (const auto& v : values) {
      key += kSep;
      key += v;
    }
    return key;
  }

  bool probe_values(const TaggedSentence& sentence, std::size_t e, std::size_t m, const RuleSchema& schema,
                    std::vector<std::string>& values) const {
    values.clear();
    for (const auto& probe : schema.probes) {
      auto v = probe_value(sentence, e, m, probe);
      if (!v) return false;
      values.push_back(std::move(*v));
    }
    return true;
  }

  // True when a tag probe of `schema` at (e, m) reads an earlier position with
  // the same lemma and tag, i.e. one the rule could rewrite before reaching
  // (e, m) in the same pass.
  bool self_interacting(const TaggedSentence& sentence, std::size_t e, std::size_t m,
                        const RuleSchema& schema) const {
    const auto& here = sentence.eojeols[e].morphemes[m];
    for (const auto& probe : schema.probes) {
      if (probe.feature != Feature::Tag) continue;
      std::size_t te = e;
      std::size_t tm = 0;
      if (probe.eojeol_offset == 0) {
        if (probe.anchor != Anchor::Previous || m == 0) continue;
        tm = m - 1;
      } else {
        if (probe.eojeol_offset > 0 || static_cast<long>(e) + probe.eojeol_offset < 0) continue;
        te = e - static_cast<std::size_t>(-probe.eojeol_offset);
        const auto& ms = sentence.eojeols[te].morphemes;
        tm = probe.anchor == Anchor::First ? 0 : ms.size() - 1;
      }
      const auto& there = sentence.eojeols[te].morphemes[tm];
      if (there.lemma == here.lemma && there.tag == here.tag) return true;
    }
    return false;
  }

  std::optional<Rule> best_rule() {
    // Candidate rules are instantiated at error sites only.
    std::unordered_map<std::string, Candidate> candidates;
    std::unordered_set<std::string> error_pairs;
    std::vector<std::string> values;
    for (std::size_t s = 0; s < current_.size(); ++s) {
      const auto& sentence = current_[s];
      for (std::size_t e = 0; e < sentence.eojeols.size(); ++e) {
        for (std::size_t m = 0; m < sentence.eojeols[e].morphemes.size(); ++m) {
          const auto& here = sentence.eojeols[e].morphemes[m];
          const Tag& truth = gold_[s].eojeols[e].morphemes[m].tag;
          if (here.tag == truth) continue;
          error_pairs.insert(here.lemma + kSep + here.tag.label());
          for (std::size_t k = 0; k < schemas_.size(); ++k) {
            if (!probe_values(sentence, e, m, schemas_[k], values)) continue;
            auto [it, fresh] = candidates.try_emplace(key_of(here.lemma, here.tag.label(), k, values));
            if (fresh) it->second = Candidate{k, here.lemma, here.tag.label(), values, {}, {}};
            it->second.corrections.insert(truth.label());
          }
        }
      }
    }
    if (candidates.empty()) return std::nullopt;

    // Count every matching position, and flag (lemma, tag, schema) groups whose
    // firings can change their own later contexts.
    std::unordered_set<std::string> interacting;
    for (std::size_t s = 0; s < current_.size(); ++s) {
      const auto& sentence = current_[s];
      for (std::size_t e = 0; e < sentence.eojeols.size(); ++e) {
        for (std::size_t m = 0; m < sentence.eojeols[e].morphemes.size(); ++m) {
          const auto& here = sentence.eojeols[e].morphemes[m];
          if (!error_pairs.count(here.lemma + kSep + here.tag.label())) continue;
          const std::string& truth = gold_[s].eojeols[e].morphemes[m].tag.label();
          for (std::size_t k = 0; k < schemas_.size(); ++k) {
            if (self_interacting(sentence, e, m, schemas_[k])) {
              interacting.insert(key_of(here.lemma, here.tag.label(), k, {}));
            }
            if (!probe_values(sentence, e, m, schemas_[k], values)) continue;
            const auto it = candidates.find(key_of(here.lemma, here.tag.label(), k, values));
            if (it != candidates.end()) ++it->second.by_gold[truth];
          }
        }
      }
    }

    std::optional<Rule> best;
    long best_good = 0;
    std::string best_key;
    for (const auto& [key, cand] : candidates) {
      const bool exact = !interacting.count(key_of(cand.lemma, cand.current, cand.schema, {}));
      for (const auto& correction : cand.corrections) {
        Rule rule{cand.lemma, Tag(cand.current), {}, Tag(correction), 0};
        for (std::size_t i = 0; i < cand.values.size(); ++i) {
          rule.conditions.push_back({schemas_[cand.schema].probes[i], cand.values[i]});
        }
        Effect effect;
        if (exact) {
          const auto good = cand.by_gold.find(correction);
          const auto bad = cand.by_gold.find(cand.current);
          effect.good = good == cand.by_gold.end() ? 0 : good->second;
          effect.bad = bad == cand.by_gold.end() ? 0 : bad->second;
        } else {
          effect = simulate(rule);
        }
        rule.effectiveness = effect.net();
        if (best && (rule.effectiveness < best->effectiveness ||
                     (rule.effectiveness == best->effectiveness && effect.good < best_good))) {
          continue;
        }
        std::string rule_key = rule.key();
        if (best && rule.effectiveness == best->effectiveness && effect.good == best_good && rule_key >= best_key) {
          continue;
        }
        best = std::move(rule);
        best_good = effect.good;
        best_key = std::move(rule_key);
      }
    }
    return best;
  }

  Effect simulate(const Rule& rule) const {
    Effect total;
    const auto it = sentences_by_lemma_.find(rule.lexeme);
    if (it == sentences_by_lemma_.end()) return total;
    for (const std::size_t s : it->second) {
      TaggedSentence scratch = current_[s];
      const Effect e = apply_and_score(rule, scratch, gold_[s]);
      total.good += e.good;
      total.bad += e.bad;
    }
    return total;
  }

  std::vector<TaggedSentence> current_;
  const std::vector<TaggedSentence>& gold_;
  const std::vector<RuleSchema>& schemas_;
  std::unordered_map<std::string, std::vector<std::size_t>> sentences_by_lemma_;
};

}  // namespace

RuleList learn_rules(const std::vector<TaggedSentence>& first_tagged, const std::vector<TaggedSentence>& gold,
                     const std::vector<RuleSchema>& schemas, const LearnOptions& options) {
  if (options.min_score < 1) throw std::invalid_argument("min_score must be at least 1");
  if (first_tagged.size() != gold.size()) {
    throw TrainingError("first-tagged corpus has " + std::to_string(first_tagged.size()) +
                        " sentences but gold has " + std::to_string(gold.size()));
  }
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (!same_segmentation(first_tagged[s], gold[s])) {
      throw TrainingError("sentence #" + std::to_string(s + 1) + " is segmented differently from gold");
    }
  }
  for (const auto& schema : schemas) {
    if (schema.probes.empty()) throw std::invalid_argument("schema without probes");
    for (std::size_t i = 0; i < schema.probes.size(); ++i) {
      if (!schema.probes[i].valid()) throw std::invalid_argument("invalid probe in schema " + schema.name());
      for (std::size_t j = 0; j < i; ++j) {
        if (schema.probes[i] == schema.probes[j]) throw std::invalid_argument("duplicate probe in " + schema.name());
      }
    }
  }
  return Learner(first_tagged, gold, schemas).run(options);
}

// ---------------------------------------------------------------------------
// Rules file

std::string Rule::key() const {
  std::string out = lexeme + "/" + current_tag.label() + " |";
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    out += i ? " & " : " ";
    out += conditions[i].probe.mnemonic() + "=" + conditions[i].value;
  }
  out += " -> " + corrected_tag.label();
  return out;
}

std::string format_rule(const Rule& rule) { return rule.key() + " # score=" + std::to_string(rule.effectiveness); }

Rule parse_rule(std::string_view line) {
  const auto bad = [&](const std::string& why) { return FormatError(why + " in rule '" + std::string(line) + "'"); };
  const std::size_t hash = line.rfind(" # score=");
  if (hash == std::string_view::npos) throw bad("missing score");
  const std::string_view score_text = line.substr(hash + 9);
  long score = 0;
  const auto [ptr, ec] = std::from_chars(score_text.data(), score_text.data() + score_text.size(), score);
  if (ec != std::errc() || ptr != score_text.data() + score_text.size()) throw bad("invalid score");

  const std::string_view body = line.substr(0, hash);
  const std::size_t arrow = body.rfind(" -> ");
  if (arrow == std::string_view::npos) throw bad("missing '->'");
  const std::string corrected(body.substr(arrow + 4));
  const std::string_view lhs = body.substr(0, arrow);
  const std::size_t bar = lhs.find(" | ");
  if (bar == std::string_view::npos) throw bad("missing '|'");
  const std::string_view head = lhs.substr(0, bar);
  const std::size_t slash = head.rfind('/');
  if (slash == std::string_view::npos || slash == 0) throw bad("expected '<lexeme>/<tag>'");
  const std::string current(head.substr(slash + 1));
  if (!Tag::valid_label(current) || !Tag::valid_label(corrected)) throw bad("invalid tag");

  Rule rule{std::string(head.substr(0, slash)), Tag(current), {}, Tag(corrected), score};
  std::string_view rest = lhs.substr(bar + 3);
  while (true) {
    const std::size_t amp = rest.find(" & ");
    const std::string_view cond = rest.substr(0, amp);
    const std::size_t eq = cond.find('=');
    if (eq == std::string_view::npos || eq + 1 == cond.size()) throw bad("expected '<probe>=<value>'");
    ContextProbe probe = ContextProbe::parse(cond.substr(0, eq));
    rule.conditions.push_back({probe, std::string(cond.substr(eq + 1))});
    if (amp == std::string_view::npos) break;
    rest = rest.substr(amp + 3);
  }
  if (rule.conditions.size() > 2) throw bad("more than two conditions");
  if (rule.current_tag == rule.corrected_tag) throw bad("corrected tag equals current tag");
  return rule;
}

RuleList parse_rules(std::istream& in) {
  RuleList rules;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      rules.push_back(parse_rule(line));
    } catch (const FormatError& e) {
      throw FormatError(e.what(), lineno);
    }
  }
  return rules;
}

void write_rules(std::ostream& out, const RuleList& rules) {
  for (const auto& r : rules) out << format_rule(r) << '\n';
}

RuleList load_rules(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open rules file " + file.string());
  return parse_rules(in);
}

void save_rules(const std::filesystem::path& file, const RuleList& rules) {
  std::ofstream out(file);
  if (!out) throw FormatError("cannot write rules file " + file.string());
  write_rules(out, rules);
}

}  // namespace morphtag
