// Command-line front end. Settings come from built-in defaults, then an
// optional `key = value` config file, then command-line flags.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "morphtag/corpus.hpp"
#include "morphtag/error.hpp"
#include "morphtag/hmm.hpp"
#include "morphtag/lexicon.hpp"
#include "morphtag/pipeline.hpp"
#include "morphtag/synth.hpp"
#include "morphtag/tagset.hpp"
#include "morphtag/tbl.hpp"
#include "morphtag/utf8.hpp"

namespace fs = std::filesystem;
using namespace morphtag;

namespace {

enum Exit { kOk = 0, kUsage = 1, kSegmentation = 2, kDecode = 3, kFormat = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// key -> values; later sources replace earlier ones key by key.
using Settings = std::map<std::string, std::vector<std::string>>;

Settings read_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open config file " + file.string());
  Settings settings;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = utf8::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string_view::npos) throw FormatError("config: expected 'key = value'", lineno);
    const std::string key(utf8::trim(text.substr(0, eq)));
    if (key.empty()) throw FormatError("config: empty key", lineno);
    settings[key].emplace_back(utf8::trim(text.substr(eq + 1)));
  }
  return settings;
}

class Options {
 public:
  explicit Options(Settings s) : s_(std::move(s)) {}

  bool has(const std::string& key) const { return s_.count(key) && !s_.at(key).empty(); }

  std::string str(const std::string& key, const std::string& fallback = "") const {
    return has(key) ? s_.at(key).back() : fallback;
  }
  const std::vector<std::string>& all(const std::string& key) const {
    static const std::vector<std::string> none;
    return has(key) ? s_.at(key) : none;
  }
  std::string required(const std::string& key) const {
    if (!has(key)) throw UsageError("missing setting '" + key + "'");
    return s_.at(key).back();
  }
  fs::path existing(const std::string& key) const {
    const fs::path p = required(key);
    if (!fs::exists(p)) throw UsageError(key + " file not found: " + p.string());
    return p;
  }
  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const std::string v = str(key);
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw UsageError("setting '" + key + "' is not a number: " + v);
  }
  unsigned long long whole(const std::string& key, unsigned long long fallback) const {
    if (!has(key)) return fallback;
    const std::string v = str(key);
    unsigned long long x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw UsageError("setting '" + key + "' is not a non-negative integer: " + v);
    }
    return x;
  }

 private:
  Settings s_;
};

// Declares a flag per key on a subcommand; parsed values land in `flags`.
struct FlagSet {
  CLI::App* app;
  Settings& flags;

  void add(const std::string& key, const std::string& help, bool repeatable = false) {
    auto* opt = app->add_option_function<std::vector<std::string>>(
        "--" + key, [this, key](const std::vector<std::string>& v) { flags[key] = v; }, help);
    if (repeatable) {
      opt->allow_extra_args(false)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    } else {
      opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
  }
};

void add_resources(FlagSet& f) {
  f.add("lexicon", "dictionary file: surface<TAB>lemma<TAB>tag-path per line");
  f.add("connectivity", "connectivity table file");
  f.add("projection", "tag-set projection file");
}

void add_smoothing(FlagSet& f) {
  f.add("lambda_trans", "add-lambda constant for transitions");
  f.add("lambda_emit", "add-lambda constant for emissions");
  f.add("unk_mass", "emission mass reserved for unseen lemmas");
  f.add("unk_types", "virtual number of unseen lemmas");
}

void add_caps(FlagSet& f) {
  f.add("candidate_cap", "analyses kept per Eojeol");
  f.add("sentence_cap", "sentence candidates decoded per sentence");
}

struct Resources {
  TagsetProjection projection;
  Lexicon lexicon;
};

Resources load_resources(const Options& o) {
  TagsetProjection projection = TagsetProjection::load(o.existing("projection"));
  Lexicon lexicon = Lexicon::load(o.existing("lexicon"), o.existing("connectivity"));
  return {std::move(projection), std::move(lexicon)};
}

Smoothing smoothing_from(const Options& o) {
  Smoothing s;
  s.lambda_trans = o.real("lambda_trans", s.lambda_trans);
  s.lambda_emit = o.real("lambda_emit", s.lambda_emit);
  s.unk_mass = o.real("unk_mass", s.unk_mass);
  s.unk_types = o.real("unk_types", s.unk_types);
  s.validate();
  return s;
}

std::size_t positive(const Options& o, const std::string& key, std::size_t fallback) {
  const auto v = static_cast<std::size_t>(o.whole(key, fallback));
  if (v == 0) throw UsageError(key + " must be at least 1");
  return v;
}

// Writes to the file named by `key`, or stdout when it is unset or "-".
template <typename Fn>
void emit_output(const Options& o, const std::string& key, Fn&& fn) {
  const std::string path = o.str(key, "-");
  if (path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  fn(out);
}

std::vector<std::string> input_lines(const Options& o) {
  const std::string path = o.str("input", "-");
  if (path == "-") return read_lines(std::cin);
  std::ifstream in(path);
  if (!in) throw UsageError("input file not found: " + path);
  return read_lines(in);
}

GoldCorpus corpus_at(const Options& o, const std::string& key, const TagsetProjection* projection = nullptr) {
  const fs::path p = o.existing(key);
  return projection ? read_corpus(p, *projection) : read_corpus(p);
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_analyze(const Options& o) {
  const Resources r = load_resources(o);
  const std::size_t cap = positive(o, "candidate_cap", kDefaultCandidateCap);
  const auto lines = input_lines(o);
  std::ostringstream out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out << '\n';
    try {
      write_lattice(out, analyze_sentence(split_eojeols(lines[i]), r.lexicon, r.projection, cap));
    } catch (const SegmentationFailure& e) {
      std::cout << out.str();
      std::cerr << "sentence " << i + 1 << ": cannot segment '" << e.eojeol() << "' (covered " << e.matched_chars()
                << " characters)\n";
      return kSegmentation;
    }
  }
  emit_output(o, "output", [&](std::ostream& os) { os << out.str(); });
  return kOk;
}

int cmd_train(const Options& o) {
  const Resources r = load_resources(o);
  const TrainMode mode = parse_train_mode(o.str("mode", "supervised"));
  TrainOptions options;
  options.smoothing = smoothing_from(o);
  options.max_iters = static_cast<std::size_t>(o.whole("max_iters", options.max_iters));
  options.tol = o.real("tol", options.tol);
  GoldCorpus tagged, untagged;
  if (mode != TrainMode::Em) tagged = corpus_at(o, "tagged", &r.projection);
  if (mode != TrainMode::Supervised) untagged = corpus_at(o, "untagged");
  const TrainResult result = train_model(mode, tagged, untagged, r.lexicon, r.projection, options);
  result.model.save(o.required("model"));
  for (const double ll : result.log_likelihood) std::printf("%.12e\n", ll);
  return kOk;
}

std::vector<TaggedSentence> first_phase(const Options& o, const Resources& r, const HmmModel& model) {
  const std::string format = o.str("format", "text");
  if (format == "corpus") return tag_segmented(model, corpus_at(o, "input").sentences, r.lexicon, r.projection);
  if (format != "text") throw UsageError("format must be 'text' or 'corpus'");
  const std::size_t cap = positive(o, "candidate_cap", kDefaultCandidateCap);
  const std::size_t sentence_cap = positive(o, "sentence_cap", kDefaultSentenceCap);
  std::vector<TaggedSentence> out;
  const auto lines = input_lines(o);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(tag_text(model, lines[i], r.lexicon, r.projection, cap, sentence_cap));
    } catch (const SegmentationFailure&) {
      std::cerr << "in sentence " << i + 1 << ":\n";
      throw;
    }
  }
  return out;
}

int cmd_tag(const Options& o) {
  const Resources r = load_resources(o);
  const HmmModel model = HmmModel::load(o.existing("model"));
  auto tagged = first_phase(o, r, model);
  if (o.has("rules")) tagged = correct_all(load_rules(o.existing("rules")), tagged);
  emit_output(o, "output", [&](std::ostream& os) { write_corpus(os, tagged); });
  return kOk;
}

int cmd_learn_rules(const Options& o) {
  const TagsetProjection projection = TagsetProjection::load(o.existing("projection"));
  const GoldCorpus gold = corpus_at(o, "gold", &projection);
  std::vector<TaggedSentence> first;
  if (o.has("first")) {
    first = corpus_at(o, "first").sentences;
  } else {
    const Lexicon lexicon = Lexicon::load(o.existing("lexicon"), o.existing("connectivity"));
    first = tag_segmented(HmmModel::load(o.existing("model")), gold.sentences, lexicon, projection);
  }
  LearnOptions options;
  options.min_score = static_cast<long>(o.whole("min_score", static_cast<unsigned long long>(options.min_score)));
  options.max_rules = static_cast<std::size_t>(o.whole("max_rules", options.max_rules));
  const RuleList rules = learn_rules(first, gold.sentences, enumerate_schemas(), options);
  emit_output(o, "output", [&](std::ostream& os) { write_rules(os, rules); });
  return kOk;
}

int cmd_eval(const Options& o) {
  const Resources r = load_resources(o);
  const GoldCorpus gold = corpus_at(o, "gold", &r.projection);
  std::vector<TaggedSentence> hmm, corrected;
  if (o.has("hmm")) {
    hmm = corpus_at(o, "hmm").sentences;
  } else {
    hmm = tag_segmented(HmmModel::load(o.existing("model")), gold.sentences, r.lexicon, r.projection);
  }
  if (o.has("two_phase")) {
    corrected = corpus_at(o, "two_phase").sentences;
  } else {
    corrected = o.has("rules") ? correct_all(load_rules(o.existing("rules")), hmm) : hmm;
  }
  const EvalReport first = evaluate(hmm, gold, r.lexicon, r.projection);
  const EvalReport second = evaluate(corrected, gold, r.lexicon, r.projection);
  std::cout << kTableHeader << '\n' << format_table_row(o.str("name", "total"), first, second) << '\n';
  std::cout << "ambiguous accuracy | "
            << format_percent(first.ambiguous_count - first.ambiguous_incorrect, first.ambiguous_count) << " | "
            << format_percent(second.ambiguous_count - second.ambiguous_incorrect, second.ambiguous_count) << '\n';
  std::cout << "segmentation mismatches | " << first.mismatched_sentences << " | " << second.mismatched_sentences
            << '\n';
  return kOk;
}

int cmd_synth(const Options& o) {
  SynthSpec spec;
  spec.seed = o.whole("seed", spec.seed);
  spec.sentences = static_cast<std::size_t>(o.whole("sentences", spec.sentences));
  spec.content_tags = static_cast<std::size_t>(o.whole("content_tags", spec.content_tags));
  spec.functional_tags = static_cast<std::size_t>(o.whole("functional_tags", spec.functional_tags));
  spec.content_vocab = static_cast<std::size_t>(o.whole("content_vocab", spec.content_vocab));
  spec.functional_vocab = static_cast<std::size_t>(o.whole("functional_vocab", spec.functional_vocab));
  spec.ambiguity = o.real("ambiguity", spec.ambiguity);
  spec.branching = static_cast<std::size_t>(o.whole("branching", spec.branching));
  spec.zipf = o.real("zipf", spec.zipf);
  spec.min_eojeols = static_cast<std::size_t>(o.whole("min_eojeols", spec.min_eojeols));
  spec.max_eojeols = static_cast<std::size_t>(o.whole("max_eojeols", spec.max_eojeols));
  spec.auto_perturbations = static_cast<std::size_t>(o.whole("auto_perturbations", spec.auto_perturbations));
  spec.auto_fire_rate = o.real("auto_fire_rate", spec.auto_fire_rate);
  for (const auto& p : o.all("perturb")) spec.perturbations.push_back(Perturbation::parse(p));

  const SynthCorpus synth = generate_synthetic(spec);
  write_corpus(fs::path(o.required("corpus")), synth.corpus);
  const Lexicon lexicon = synth.lexicon();
  lexicon.save(o.required("lexicon"), o.required("connectivity"));
  synth.projection.save(o.required("projection"));
  for (const auto& p : synth.perturbations) std::cout << "perturbation " << p.str() << '\n';
  std::cout << "sentences " << synth.corpus.sentences.size() << '\n';
  std::cout << "morphemes " << synth.corpus.morpheme_count() << '\n';
  std::cout << "perturbed " << synth.perturbed_sites << '\n';
  return kOk;
}

int cmd_split(const Options& o) {
  const GoldCorpus corpus = corpus_at(o, "input");
  SplitFractions f;
  f.train_em = o.real("train_em", f.train_em);
  f.train_rules = o.real("train_rules", f.train_rules);
  f.test = o.real("test", f.test);
  const CorpusSplit split = split_corpus(corpus, f, o.whole("seed", 1));
  const std::string prefix = o.required("prefix");
  write_corpus(fs::path(prefix + ".em.txt"), split.train_em);
  write_corpus(fs::path(prefix + ".rules.txt"), split.train_rules);
  write_corpus(fs::path(prefix + ".test.txt"), split.test);
  std::cout << split.train_em.sentences.size() << ' ' << split.train_rules.sentences.size() << ' '
            << split.test.sentences.size() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morpheme segmentation and two-phase part-of-speech tagging"};
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "key = value settings file; flags take precedence")
      ->check(CLI::ExistingFile);
  Settings flags;

  struct Command {
    CLI::App* app;
    int (*run)(const Options&);
  };
  std::vector<Command> commands;
  const auto command = [&](const std::string& name, const std::string& help, int (*run)(const Options&)) {
    commands.push_back({app.add_subcommand(name, help), run});
    return FlagSet{commands.back().app, flags};
  };

  {
    auto f = command("analyze", "print every analysis of each input sentence", cmd_analyze);
    add_resources(f);
    add_caps(f);
    f.add("input", "raw text, one sentence per line ('-' for stdin)");
    f.add("output", "lattice dump ('-' for stdout)");
  }
  {
    auto f = command("train", "estimate a bigram HMM", cmd_train);
    add_resources(f);
    add_smoothing(f);
    f.add("mode", "supervised | em | bootstrap-then-em");
    f.add("tagged", "tagged corpus (supervised, bootstrap)");
    f.add("untagged", "segmented corpus whose tags are ignored (em)");
    f.add("max_iters", "EM iterations");
    f.add("tol", "EM stops when the objective gains less than this");
    f.add("model", "model file to write");
  }
  {
    auto f = command("tag", "tag text or a segmented corpus", cmd_tag);
    add_resources(f);
    add_caps(f);
    f.add("model", "model file");
    f.add("rules", "correction rules applied after the HMM");
    f.add("input", "input file ('-' for stdin)");
    f.add("format", "text | corpus");
    f.add("output", "tagged corpus ('-' for stdout)");
  }
  {
    auto f = command("learn-rules", "learn correction rules against a gold corpus", cmd_learn_rules);
    add_resources(f);
    f.add("gold", "gold corpus");
    f.add("first", "first-phase output for the gold corpus; tagged with --model when absent");
    f.add("model", "model file");
    f.add("min_score", "smallest net score a rule may have");
    f.add("max_rules", "maximum number of rules");
    f.add("output", "rules file ('-' for stdout)");
  }
  {
    auto f = command("eval", "score tagger output against gold", cmd_eval);
    add_resources(f);
    f.add("gold", "gold corpus");
    f.add("hmm", "first-phase output; tagged with --model when absent");
    f.add("two_phase", "corrected output; --rules applied to the first phase when absent");
    f.add("model", "model file");
    f.add("rules", "rules file");
    f.add("name", "row label");
  }
  {
    auto f = command("synth", "generate a synthetic corpus and dictionary", cmd_synth);
    for (const char* key : {"seed", "sentences", "content_tags", "functional_tags", "content_vocab",
                            "functional_vocab", "ambiguity", "branching", "zipf", "min_eojeols", "max_eojeols",
                            "auto_perturbations", "auto_fire_rate"}) {
      f.add(key, "generator setting");
    }
    f.add("perturb", "override such as 'ka/F1 | N2FMT=C3 -> F4' (repeatable)", true);
    f.add("corpus", "corpus file to write");
    f.add("lexicon", "dictionary file to write");
    f.add("connectivity", "connectivity file to write");
    f.add("projection", "projection file to write");
  }
  {
    auto f = command("split", "seeded three-way corpus split", cmd_split);
    f.add("input", "corpus file");
    f.add("seed", "shuffle seed");
    f.add("train_em", "fraction for EM training");
    f.add("train_rules", "fraction for rule learning");
    f.add("test", "fraction held out");
    f.add("prefix", "writes <prefix>.em.txt, <prefix>.rules.txt, <prefix>.test.txt");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    Settings settings = config.empty() ? Settings{} : read_config(config);
    for (auto& [key, values] : flags) settings[key] = values;
    const Options options(std::move(settings));
    for (const auto& c : commands) {
      if (c.app->parsed()) return c.run(options);
    }
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SegmentationFailure& e) {
    std::cerr << "segmentation failure: cannot segment '" << e.eojeol() << "' (covered " << e.matched_chars()
              << " characters)\n";
    return kSegmentation;
  } catch (const DecodeFailure& e) {
    std::cerr << "decode failure: " << e.what() << '\n';
    return kDecode;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << '\n';
    return kDecode;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kFormat;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFormat;
  }
}
