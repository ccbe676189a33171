#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphtag/sentence.hpp"
#include "morphtag/tagset.hpp"

namespace morphtag {

// Which morpheme of the probed Eojeol to read. Previous/Next address the
// neighbouring morpheme inside the current Eojeol (eojeol_offset == 0).
enum class Anchor { First, Last, Previous, Next };
enum class Feature { Tag, Lexeme };

// A context position relative to the current morpheme. Spelled with the
// mnemonics {P|N}{1|2|3}{F|L}M{T|O} (e.g. N1FMT, P1LMO) and W{P|N}MT.
struct ContextProbe {
  int eojeol_offset = 1;
  Anchor anchor = Anchor::First;
  Feature feature = Feature::Tag;

  std::string mnemonic() const;
  // Throws FormatError for an unknown mnemonic.
  static ContextProbe parse(std::string_view mnemonic);
  bool valid() const;

  friend auto operator<=>(const ContextProbe&, const ContextProbe&) = default;
};

struct RuleSchema {
  std::vector<ContextProbe> probes;  // 1 or 2, no duplicates

  std::string name() const;  // mnemonics joined by '+'
};

struct Condition {
  ContextProbe probe;
  std::string value;  // a tag label or a lemma, per probe.feature

  friend bool operator==(const Condition&, const Condition&) = default;
};

struct Rule {
  std::string lexeme;  // lemma of the morpheme to correct
  Tag current_tag;
  std::vector<Condition> conditions;
  Tag corrected_tag;
  long effectiveness = 0;  // net corrections when the rule was learned

  // Rule line without the score comment, the learner's tie-break key.
  std::string key() const;
  friend bool operator==(const Rule&, const Rule&) = default;
};

using RuleList = std::vector<Rule>;

// 18 single-probe schemas followed by the 21 pairs of the seven base
// schemas N1FMT, P1LMT, N2FMT, N3FMT, P1LMO, P1FMO, N1FMO.
std::vector<RuleSchema> enumerate_schemas();

struct LearnOptions {
  long min_score = 2;
  std::size_t max_rules = 1000;
};

// Greedy error-driven rule learning. first_tagged and gold must share
// segmentation sentence by sentence; otherwise TrainingError names the
// first mismatching sentence.
RuleList learn_rules(const std::vector<TaggedSentence>& first_tagged, const std::vector<TaggedSentence>& gold,
                     const std::vector<RuleSchema>& schemas, const LearnOptions& options = {});

// Applies rules in order; each rule scans positions left to right and
// rewrites tags in place, so later positions see earlier rewrites.
TaggedSentence apply_rules(const RuleList& rules, TaggedSentence sentence);
void apply_rule(const Rule& rule, TaggedSentence& sentence);

// Value a probe reads at (eojeol, morpheme), or nullopt when out of range.
std::optional<std::string> probe_value(const TaggedSentence& sentence, std::size_t eojeol, std::size_t morpheme,
                                       const ContextProbe& probe);

std::string format_rule(const Rule& rule);
Rule parse_rule(std::string_view line);
RuleList parse_rules(std::istream& in);
void write_rules(std::ostream& out, const RuleList& rules);
RuleList load_rules(const std::filesystem::path& file);
void save_rules(const std::filesystem::path& file, const RuleList& rules);

}  // namespace morphtag
