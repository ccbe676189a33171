#include "morphtag/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "morphtag/error.hpp"
#include "morphtag/utf8.hpp"
#include "rng.hpp"

namespace morphtag {

std::size_t GoldCorpus::morpheme_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.morpheme_count();
  return n;
}

bool operator==(const GoldCorpus& a, const GoldCorpus& b) {
  if (a.sentences.size() != b.sentences.size()) return false;
  for (std::size_t i = 0; i < a.sentences.size(); ++i) {
    if (a.sentences[i].eojeols != b.sentences[i].eojeols) return false;
  }
  return true;
}

namespace {

bool is_token(std::string_view s) {
  const auto pieces = utf8::split_whitespace(s);
  return pieces.size() == 1 && pieces[0].size() == s.size();
}

TaggedEojeol parse_eojeol(const std::string& line, std::size_t lineno, const TagsetProjection* projection) {
  const std::size_t tab = line.find('\t');
  if (tab == std::string::npos) throw FormatError("expected '<eojeol>\\t<analysis>'", lineno);
  TaggedEojeol eojeol;
  eojeol.surface = line.substr(0, tab);
  if (!is_token(eojeol.surface)) throw FormatError("invalid Eojeol surface '" + eojeol.surface + "'", lineno);
  std::string_view rest = std::string_view(line).substr(tab + 1);
  while (true) {
    const std::size_t plus = rest.find(" + ");
    const std::string_view item = rest.substr(0, plus);
    const std::size_t slash = item.rfind('/');
    if (slash == std::string_view::npos) {
      throw FormatError("expected '<lemma>/<TAG>' but found '" + std::string(item) + "'", lineno);
    }
    const std::string lemma(item.substr(0, slash));
    const std::string label(item.substr(slash + 1));
    if (!is_token(lemma)) throw FormatError("invalid lemma '" + lemma + "'", lineno);
    if (!Tag::valid_label(label)) throw FormatError("invalid tag '" + label + "'", lineno);
    Tag tag(label);
    if (projection && !projection->has_label(tag)) {
      throw FormatError("tag '" + label + "' is not in the tag set", lineno);
    }
    eojeol.morphemes.push_back({lemma, std::move(tag), "", false});
    if (plus == std::string_view::npos) break;
    rest = rest.substr(plus + 3);
  }
  return eojeol;
}

GoldCorpus parse_impl(std::istream& in, const TagsetProjection* projection) {
  GoldCorpus corpus;
  TaggedSentence current;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!current.eojeols.empty()) corpus.sentences.push_back(std::move(current));
      current = {};
      continue;
    }
    current.eojeols.push_back(parse_eojeol(line, lineno, projection));
  }
  if (!current.eojeols.empty()) corpus.sentences.push_back(std::move(current));
  return corpus;
}

GoldCorpus read_impl(const std::filesystem::path& file, const TagsetProjection* projection) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open corpus file " + file.string());
  return parse_impl(in, projection);
}

}  // namespace

GoldCorpus parse_corpus(std::istream& in) { return parse_impl(in, nullptr); }
GoldCorpus parse_corpus(std::istream& in, const TagsetProjection& projection) {
  return parse_impl(in, &projection);
}
GoldCorpus read_corpus(const std::filesystem::path& file) { return read_impl(file, nullptr); }
GoldCorpus read_corpus(const std::filesystem::path& file, const TagsetProjection& projection) {
  return read_impl(file, &projection);
}

void write_corpus(std::ostream& out, const std::vector<TaggedSentence>& sentences) {
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (s) out << '\n';
    for (const auto& e : sentences[s].eojeols) {
      out << e.surface << '\t';
      for (std::size_t m = 0; m < e.morphemes.size(); ++m) {
        if (m) out << " + ";
        out << e.morphemes[m].lemma << '/' << e.morphemes[m].tag.label();
      }
      out << '\n';
    }
  }
}

void write_corpus(const std::filesystem::path& file, const std::vector<TaggedSentence>& sentences) {
  std::ofstream out(file);
  if (!out) throw FormatError("cannot write corpus file " + file.string());
  write_corpus(out, sentences);
}

// ---------------------------------------------------------------------------
// Splitting

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitFractions& fractions) {
  const std::array<double, 3> f = {fractions.train_em, fractions.train_rules, fractions.test};
  for (const double x : f) {
    if (!(x > 0.0)) throw std::invalid_argument("split fractions must be positive");
  }
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) throw std::invalid_argument("split fractions must sum to 1");
  if (n < 3) throw std::invalid_argument("cannot split fewer than 3 sentences");

  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = f[i] * static_cast<double>(n);
    sizes[i] = std::min(n, static_cast<std::size_t>(std::floor(quota)));
    remainder[i] = quota - std::floor(quota);
    assigned += sizes[i];
  }
  while (assigned > n) {
    const auto it = std::max_element(sizes.begin(), sizes.end());
    --*it;
    --assigned;
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 3, ++assigned) ++sizes[order[k]];
  for (std::size_t i = 0; i < 3; ++i) {
    if (sizes[i] > 0) continue;
    const auto it = std::max_element(sizes.begin(), sizes.end());
    --*it;
    sizes[i] = 1;
  }
  return sizes;
}

CorpusSplit split_corpus(const GoldCorpus& corpus, const SplitFractions& fractions, std::uint64_t seed) {
  const std::size_t n = corpus.sentences.size();
  const auto sizes = split_sizes(n, fractions);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  detail::shuffle(order, rng);

  CorpusSplit split;
  GoldCorpus* parts[3] = {&split.train_em, &split.train_rules, &split.test};
  std::size_t begin = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    std::vector<std::size_t> chosen(order.begin() + static_cast<long>(begin),
                                    order.begin() + static_cast<long>(begin + sizes[p]));
    std::sort(chosen.begin(), chosen.end());
    for (const std::size_t i : chosen) parts[p]->sentences.push_back(corpus.sentences[i]);
    begin += sizes[p];
  }
  return split;
}

// ---------------------------------------------------------------------------
// Evaluation

double EvalReport::accuracy() const {
  if (tagged_count == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(tagged_count - incorrect_count) / static_cast<double>(tagged_count);
}

double EvalReport::ambiguous_accuracy() const {
  if (ambiguous_count == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(ambiguous_count - ambiguous_incorrect) / static_cast<double>(ambiguous_count);
}

EvalReport evaluate(const std::vector<TaggedSentence>& system, const GoldCorpus& gold, const Lexicon& lexicon,
                    const TagsetProjection& projection) {
  if (system.size() != gold.sentences.size()) {
    throw std::invalid_argument("system output has " + std::to_string(system.size()) + " sentences but gold has " +
                                std::to_string(gold.sentences.size()));
  }
  EvalReport report;
  for (std::size_t s = 0; s < system.size(); ++s) {
    const auto& g = gold.sentences[s];
    const bool aligned = same_segmentation(system[s], g);
    if (!aligned) {
      ++report.mismatched_sentences;
      report.mismatched_morphemes += g.morpheme_count();
    }
    for (std::size_t e = 0; e < g.eojeols.size(); ++e) {
      for (std::size_t m = 0; m < g.eojeols[e].morphemes.size(); ++m) {
        const auto& gm = g.eojeols[e].morphemes[m];
        const bool ambiguous = lexicon.tags_for_lemma(gm.lemma, projection).size() > 1;
        const bool wrong = !aligned || system[s].eojeols[e].morphemes[m].tag != gm.tag;
        ++report.tagged_count;
        report.incorrect_count += wrong;
        report.ambiguous_count += ambiguous;
        report.ambiguous_incorrect += ambiguous && wrong;
      }
    }
  }
  return report;
}

std::string format_percent(std::size_t correct, std::size_t total) {
  if (total == 0) return "-";
  // Permille rounded half up, in integer arithmetic.
  const unsigned long long permille = (2000ULL * correct + total) / (2ULL * total);
  return std::to_string(permille / 10) + "." + std::to_string(permille % 10);
}

std::string format_table_row(std::string_view name, const EvalReport& hmm_alone, const EvalReport& two_phase) {
  std::string row(name);
  row += " | " + std::to_string(hmm_alone.tagged_count);
  row += " | " + std::to_string(hmm_alone.ambiguous_count);
  row += " | " + format_percent(hmm_alone.tagged_count - hmm_alone.incorrect_count, hmm_alone.tagged_count);
  row += " | " + format_percent(two_phase.tagged_count - two_phase.incorrect_count, two_phase.tagged_count);
  return row;
}

}  // namespace morphtag
