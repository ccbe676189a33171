#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "morphtag/error.hpp"
#include "morphtag/hmm.hpp"

namespace morphtag {
namespace {

constexpr double kNormTolerance = 1e-9;
constexpr std::string_view kHeader = "HMM-BIGRAM v1";

std::string format_prob(double p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", p);
  return buf;
}

double parse_number(std::string_view text, std::size_t lineno) {
  const std::string s(text);
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(value)) {
    throw FormatError("invalid number '" + s + "'", lineno);
  }
  return value;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); }

}  // namespace

void Smoothing::validate() const {
  if (!(lambda_trans > 0.0 && lambda_trans <= 1.0)) throw std::invalid_argument("lambda_trans must be in (0, 1]");
  if (!(lambda_emit > 0.0 && lambda_emit <= 1.0)) throw std::invalid_argument("lambda_emit must be in (0, 1]");
  if (!(unk_mass > 0.0 && unk_mass < 1.0)) throw std::invalid_argument("unk_mass must be in (0, 1)");
  if (!(unk_types >= 1.0)) throw std::invalid_argument("unk_types must be at least 1");
}

HmmModel::HmmModel(std::vector<Tag> tags, std::vector<std::string> vocabulary, std::vector<double> trans,
                   std::vector<double> emit, Smoothing smoothing, std::vector<Tag> open_class)
    : tags_(std::move(tags)),
      vocabulary_(std::move(vocabulary)),
      trans_(std::move(trans)),
      emit_(std::move(emit)),
      smoothing_(smoothing),
      open_class_(std::move(open_class)) {
  smoothing_.validate();
  const std::size_t k = tags_.size();
  const std::size_t v = vocabulary_.size();
  if (k == 0) throw std::invalid_argument("model needs at least one tag");
  if (std::set<Tag>(tags_.begin(), tags_.end()).size() != k) throw std::invalid_argument("duplicate model tag");
  for (const auto& t : tags_) {
    if (t.label() == kBosLabel) throw std::invalid_argument("tag label collides with the BOS marker");
  }
  if (!std::is_sorted(vocabulary_.begin(), vocabulary_.end()) ||
      std::adjacent_find(vocabulary_.begin(), vocabulary_.end()) != vocabulary_.end()) {
    throw std::invalid_argument("vocabulary must be sorted and unique");
  }
  if (trans_.size() != (k + 1) * k) throw std::invalid_argument("transition table has the wrong shape");
  if (emit_.size() != k * v) throw std::invalid_argument("emission table has the wrong shape");
  for (const auto& t : open_class_) {
    if (!tag_index(t)) throw std::invalid_argument("open-class tag '" + t.label() + "' is not a model tag");
  }

  for (std::size_t r = 0; r <= k; ++r) {
    const std::string name = r == k ? std::string(kBosLabel) : tags_[r].label();
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double p = trans_[r * k + c];
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("transition out of range in row '" + name + "'");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kNormTolerance) {
      throw std::invalid_argument("transition row for tag '" + name + "' sums to " + std::to_string(sum));
    }
  }
  for (std::size_t t = 0; t < k; ++t) {
    double sum = smoothing_.unk_mass;
    for (std::size_t m = 0; m < v; ++m) {
      const double p = emit_[t * v + m];
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("emission out of range for tag '" + tags_[t].label() + "'");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kNormTolerance) {
      throw std::invalid_argument("emission row for tag '" + tags_[t].label() + "' sums to " +
                                  std::to_string(sum) + " including unknown mass");
    }
  }

  log_trans_.resize(trans_.size());
  std::transform(trans_.begin(), trans_.end(), log_trans_.begin(), safe_log);
  log_emit_.resize(emit_.size());
  std::transform(emit_.begin(), emit_.end(), log_emit_.begin(), safe_log);
}

std::optional<std::size_t> HmmModel::tag_index(const Tag& tag) const {
  const auto it = std::find(tags_.begin(), tags_.end(), tag);
  if (it == tags_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - tags_.begin());
}

std::optional<std::size_t> HmmModel::lemma_index(std::string_view lemma) const {
  const auto it = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), lemma);
  if (it == vocabulary_.end() || *it != lemma) return std::nullopt;
  return static_cast<std::size_t>(it - vocabulary_.begin());
}

std::vector<std::size_t> HmmModel::open_class_indices() const {
  std::vector<std::size_t> out;
  if (open_class_.empty()) {
    for (std::size_t t = 0; t < tags_.size(); ++t) out.push_back(t);
  } else {
    for (const auto& tag : open_class_) out.push_back(*tag_index(tag));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

double HmmModel::emit(std::size_t tag, std::string_view lemma) const {
  const auto m = lemma_index(lemma);
  return m ? emit(tag, *m) : unknown_emit();
}

double HmmModel::log_emit(std::size_t tag, std::string_view lemma) const {
  const auto m = lemma_index(lemma);
  return m ? log_emit_[tag * vocabulary_.size() + *m] : std::log(unknown_emit());
}

// ---------------------------------------------------------------------------
// Model file

void HmmModel::write(std::ostream& out) const {
  const std::size_t k = tags_.size();
  const std::size_t v = vocabulary_.size();
  out << kHeader << '\n';
  out << "CONFIG\n";
  out << "lambda_trans\t" << format_prob(smoothing_.lambda_trans) << '\n';
  out << "lambda_emit\t" << format_prob(smoothing_.lambda_emit) << '\n';
  out << "unk_mass\t" << format_prob(smoothing_.unk_mass) << '\n';
  out << "unk_types\t" << format_prob(smoothing_.unk_types) << '\n';
  if (!open_class_.empty()) {
    out << "open_class\t";
    for (std::size_t i = 0; i < open_class_.size(); ++i) out << (i ? "," : "") << open_class_[i].label();
    out << '\n';
  }
  out << "TAGS\n" << kBosLabel << '\n';
  for (const auto& t : tags_) out << t.label() << '\n';
  out << "TRANS\n";
  for (std::size_t r = 0; r <= k; ++r) {
    const std::string& prev = r == k ? std::string(kBosLabel) : tags_[r].label();
    for (std::size_t c = 0; c < k; ++c) {
      out << prev << '\t' << tags_[c].label() << '\t' << format_prob(trans_[r * k + c]) << '\n';
    }
  }
  out << "EMIT\n";
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t m = 0; m < v; ++m) {
      const double p = emit_[t * v + m];
      if (p == 0.0) continue;
      out << tags_[t].label() << '\t' << vocabulary_[m] << '/' << tags_[t].label() << '\t' << format_prob(p)
          << '\n';
    }
  }
}

void HmmModel::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw FormatError("cannot write model file " + file.string());
  write(out);
}

HmmModel HmmModel::parse(std::istream& in) {
  enum class Section { None, Config, Tags, Trans, Emit };
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line != kHeader) {
    throw FormatError("model file must start with '" + std::string(kHeader) + "'", 1);
  }

  Smoothing smoothing;
  std::vector<Tag> open_class;
  std::vector<Tag> tags;
  std::map<std::string, std::size_t, std::less<>> tag_ids;
  bool saw_bos = false;
  std::map<std::pair<std::size_t, std::size_t>, double> trans_entries;
  std::map<std::pair<std::size_t, std::string>, double> emit_entries;
  std::set<std::string> seen_sections;
  Section section = Section::None;

  auto lookup_tag = [&](std::string_view label, bool allow_bos, std::size_t at) -> std::size_t {
    if (allow_bos && label == kBosLabel) return kBos;
    const auto it = tag_ids.find(label);
    if (it == tag_ids.end()) throw FormatError("unknown tag '" + std::string(label) + "'", at);
    return it->second;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "CONFIG" || line == "TAGS" || line == "TRANS" || line == "EMIT") {
      if (!seen_sections.insert(line).second) throw FormatError("repeated section " + line, lineno);
      const Section next = line == "CONFIG" ? Section::Config
                           : line == "TAGS" ? Section::Tags
                           : line == "TRANS" ? Section::Trans
                                             : Section::Emit;
      if ((next == Section::Trans || next == Section::Emit) && !seen_sections.count("TAGS")) {
        throw FormatError("section " + line + " before TAGS", lineno);
      }
      section = next;
      continue;
    }
    const auto fields = split_tabs(line);
    switch (section) {
      case Section::None:
        throw FormatError("unexpected line outside any section", lineno);
      case Section::Config: {
        if (fields.size() != 2) throw FormatError("expected '<key><TAB><value>'", lineno);
        if (fields[0] == "lambda_trans") {
          smoothing.lambda_trans = parse_number(fields[1], lineno);
        } else if (fields[0] == "lambda_emit") {
          smoothing.lambda_emit = parse_number(fields[1], lineno);
        } else if (fields[0] == "unk_mass") {
          smoothing.unk_mass = parse_number(fields[1], lineno);
        } else if (fields[0] == "unk_types") {
          smoothing.unk_types = parse_number(fields[1], lineno);
        } else if (fields[0] == "open_class") {
          std::string_view rest = fields[1];
          while (!rest.empty()) {
            const std::size_t comma = rest.find(',');
            const std::string_view label = rest.substr(0, comma);
            if (!Tag::valid_label(label)) throw FormatError("invalid open-class tag", lineno);
            open_class.emplace_back(std::string(label));
            rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
          }
        } else {
          throw FormatError("unknown config key '" + std::string(fields[0]) + "'", lineno);
        }
        break;
      }
      case Section::Tags: {
        if (fields.size() != 1) throw FormatError("expected one tag per line", lineno);
        if (!saw_bos) {
          if (fields[0] != kBosLabel) throw FormatError("first tag must be " + std::string(kBosLabel), lineno);
          saw_bos = true;
          break;
        }
        if (!Tag::valid_label(fields[0]) || fields[0] == kBosLabel) {
          throw FormatError("invalid tag '" + std::string(fields[0]) + "'", lineno);
        }
        if (!tag_ids.emplace(std::string(fields[0]), tags.size()).second) {
          throw FormatError("duplicate tag '" + std::string(fields[0]) + "'", lineno);
        }
        tags.emplace_back(std::string(fields[0]));
        break;
      }
      case Section::Trans: {
        if (fields.size() != 3) throw FormatError("expected '<t_prev><TAB><t><TAB><prob>'", lineno);
        const std::size_t prev = lookup_tag(fields[0], true, lineno);
        const std::size_t cur = lookup_tag(fields[1], false, lineno);
        if (!trans_entries.emplace(std::make_pair(prev == kBos ? tags.size() : prev, cur),
                                   parse_number(fields[2], lineno))
                 .second) {
          throw FormatError("duplicate transition", lineno);
        }
        break;
      }
      case Section::Emit: {
        if (fields.size() != 3) throw FormatError("expected '<t><TAB><lemma>/<tag><TAB><prob>'", lineno);
        const std::size_t tag = lookup_tag(fields[0], false, lineno);
        const std::string_view key = fields[1];
        const std::string suffix = "/" + tags[tag].label();
        if (key.size() <= suffix.size() || key.substr(key.size() - suffix.size()) != suffix) {
          throw FormatError("emission key '" + std::string(key) + "' does not end in " + suffix, lineno);
        }
        std::string lemma(key.substr(0, key.size() - suffix.size()));
        if (!emit_entries.emplace(std::make_pair(tag, std::move(lemma)), parse_number(fields[2], lineno)).second) {
          throw FormatError("duplicate emission", lineno);
        }
        break;
      }
    }
  }
  for (const char* required : {"CONFIG", "TAGS", "TRANS", "EMIT"}) {
    if (!seen_sections.count(required)) throw FormatError(std::string("missing section ") + required);
  }
  if (tags.empty()) throw FormatError("model has no tags");

  const std::size_t k = tags.size();
  if (trans_entries.size() != (k + 1) * k) throw FormatError("TRANS section is incomplete");
  std::vector<double> trans((k + 1) * k);
  for (const auto& [rc, p] : trans_entries) trans[rc.first * k + rc.second] = p;

  std::set<std::string> lemmas;
  for (const auto& [key, p] : emit_entries) lemmas.insert(key.second);
  std::vector<std::string> vocabulary(lemmas.begin(), lemmas.end());
  const std::size_t v = vocabulary.size();
  std::vector<double> emit(k * v, 0.0);
  for (const auto& [key, p] : emit_entries) {
    const auto m = std::lower_bound(vocabulary.begin(), vocabulary.end(), key.second) - vocabulary.begin();
    emit[key.first * v + static_cast<std::size_t>(m)] = p;
  }
  try {
    return HmmModel(std::move(tags), std::move(vocabulary), std::move(trans), std::move(emit), smoothing,
                    std::move(open_class));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid model: ") + e.what());
  }
}

HmmModel HmmModel::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open model file " + file.string());
  return parse(in);
}

}  // namespace morphtag
