// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any
// fails. Tolerances and time limits are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "morphtag/corpus.hpp"
#include "morphtag/error.hpp"
#include "morphtag/pipeline.hpp"
#include "morphtag/synth.hpp"
#include "test_support.hpp"

using namespace morphtag;
using namespace testsupport;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> notes;
  double timed = -1.0;  // seconds of system work when the oracle dominates the wall clock

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

Outcome viterbi_equivalence() {
  Outcome o;
  std::mt19937_64 rng(1001);
  const int cases = 600;
  int rounding_ties = 0;
  for (int trial = 0; trial < cases && o.pass; ++trial) {
    const std::size_t k = 1 + pick(rng, 6);
    const std::size_t v = 1 + pick(rng, 6);
    const HmmModel model = random_model(rng, k, v);
    std::vector<DecodeSlot> slots;
    const std::size_t n = 1 + pick(rng, 8);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string lemma = pick(rng, 10) == 0 ? "unseen" : "w" + std::to_string(pick(rng, v));
      slots.push_back({lemma, random_subset(rng, k)});
    }
    const TagSequence got = viterbi(model, slots);
    const auto want = brute_viterbi(model, slots);
    o.require(want.has_value(), "oracle found no path");
    o.require(std::abs(got.log_score - want->log_score) <= 1e-9, "score differs in case " + std::to_string(trial));
    if (got.tags != want->tags) {
      // Only a path that ties the maximum up to rounding may differ.
      o.require(std::abs(path_score(model, slots, got.tags) - want->log_score) <= 1e-12,
                "sequence differs in case " + std::to_string(trial));
      ++rounding_ties;
    }
  }
  if (o.pass) {
    o.detail = std::to_string(cases) + " cases, " + std::to_string(rounding_ties) +
               " exact-arithmetic ties resolved by rounding";
  }
  return o;
}

Outcome lattice_equivalence() {
  Outcome o;
  std::mt19937_64 rng(1002);
  const int cases = 400;
  for (int trial = 0; trial < cases && o.pass; ++trial) {
    const std::size_t k = 1 + pick(rng, 4);
    const HmmModel model = random_model(rng, k, 3);
    const SentenceLattice lattice = random_lattice(rng, k, 3);
    const LatticeChoice got = as_choice(model, tag_lattice(model, lattice));
    const LatticeChoice want = brute_lattice(model, lattice);
    o.require(want.found, "oracle found no candidate");
    o.require(got.score == want.score && got.lemmas == want.lemmas && got.tags == want.tags,
              "lattice " + std::to_string(trial) + " differs");
  }
  if (o.pass) o.detail = std::to_string(cases) + " lattices, exact";
  return o;
}

Outcome baum_welch_monotone() {
  Outcome o;
  std::mt19937_64 rng(1003);
  double worst = 0.0;
  std::size_t fewest = 25;
  for (int c = 0; c < 20; ++c) {
    const auto corpus = random_untagged(rng, 3, 10, 30, 8);
    const EmResult r = baum_welch(random_model(rng, 3, 10), corpus, 25, 1e-300);
    fewest = std::min(fewest, r.iterations);
    for (std::size_t i = 1; i < r.log_likelihood.size(); ++i) {
      worst = std::min(worst, r.log_likelihood[i] - r.log_likelihood[i - 1]);
    }
  }
  o.require(worst >= -1e-9, "log-likelihood fell by " + fmt("%.3e", -worst));

  const TwoStateExample ex = two_state_example();
  const EmResult r = baum_welch(ex.init, ex.corpus, 1, 1e-300);
  double err = std::abs(r.log_likelihood[0] - ex.log_likelihood);
  for (std::size_t a = 0; a < 2; ++a) {
    err = std::max(err, std::abs(r.model.trans(HmmModel::kBos, a) - ex.trans[2][a]));
    for (std::size_t b = 0; b < 2; ++b) err = std::max(err, std::abs(r.model.trans(a, b) - ex.trans[a][b]));
    err = std::max(err, std::abs(r.model.emit(a, std::string_view("x")) - ex.emit[a][0]));
    err = std::max(err, std::abs(r.model.emit(a, std::string_view("y")) - ex.emit[a][1]));
  }
  o.require(err <= 1e-10, "hand example off by " + fmt("%.3e", err));
  if (o.pass) {
    o.detail = "20 corpora, largest drop " + fmt("%.1e", 0.0 - worst) + ", fewest iterations " + std::to_string(fewest) +
               "; hand example error " + fmt("%.1e", err);
  }
  return o;
}

Outcome segmentation_completeness() {
  Outcome o;
  std::mt19937_64 rng(1004);
  const int cases = 400;
  int with_covers = 0;
  std::size_t most = 0;
  double segmenting = 0.0;
  const TagsetProjection proj = letter_projection();
  for (int trial = 0; trial < cases && o.pass; ++trial) {
    const SegmentationCase c = random_segmentation_case(rng);
    const Lexicon lex(c.entries, c.table);
    const auto start = std::chrono::steady_clock::now();
    const auto covers = enumerate_covers(c.eojeol, lex, proj);
    segmenting += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::vector<Cover> got;
    for (const auto& seq : covers) got.push_back(as_cover(seq));
    const auto want = brute_covers(c.eojeol, c.entries, c.table, proj);
    o.require(got == want, "case " + std::to_string(trial) + " (" + c.eojeol + ") differs");
    with_covers += !want.empty();
    most = std::max(most, want.size());
  }
  o.timed = segmenting;
  if (o.pass) {
    o.detail = std::to_string(cases) + " cases, " + std::to_string(with_covers) + " with covers, at most " +
               std::to_string(most) + "; segmenter " + fmt("%.2f", segmenting) + " s";
  }
  return o;
}

Outcome tbl_greedy() {
  Outcome o;
  const auto schemas = enumerate_schemas();
  const RuleCorpus c = three_site_corpus();
  const RuleList first = learn_rules(c.first, c.gold, schemas);
  o.require(!first.empty(), "no rule learned on the three-site corpus");
  if (!o.pass) return o;
  const Rule& r = first[0];
  o.require(r.effectiveness == 3 && r.conditions.size() == 1 &&
                r.conditions[0].probe == ContextProbe::parse("N1FMT") && r.conditions[0].value == "mT",
            "first rule is " + format_rule(r));

  std::mt19937_64 rng(1005);
  std::size_t rules_checked = 0;
  for (int trial = 0; trial < 20 && o.pass; ++trial) {
    const auto pc = random_perturbed_corpus(rng, 30 + pick(rng, 30));
    std::vector<TaggedSentence> current = pc.first;
    for (const Rule& rule : learn_rules(pc.first, pc.gold, schemas)) {
      o.require(rescore(rule, current, pc.gold) == rule.effectiveness, "stored score of " + format_rule(rule));
      for (auto& s : current) apply_rule(rule, s);
      ++rules_checked;
    }
  }
  if (o.pass) o.detail = "first rule " + format_rule(r) + "; " + std::to_string(rules_checked) + " rules re-scored";
  return o;
}

// Synthetic setting for the two-phase comparison.
SynthSpec two_phase_spec(std::uint64_t seed) {
  SynthSpec spec;
  spec.seed = seed;
  spec.sentences = 1500;
  spec.ambiguity = 0.3;
  spec.functional_vocab = 20;
  spec.auto_perturbations = 16;
  spec.auto_fire_rate = 0.5;
  return spec;
}

struct TwoPhaseRun {
  std::size_t morphemes = 0;
  double perturbed_rate = 0.0;
  double ambiguous_rate = 0.0;  // test morphemes whose lemma has several dictionary tags
  double hmm = 0.0;
  double two_phase = 0.0;
  std::size_t rules = 0;
};

// Bootstrap-then-EM: about 2000 tagged morphemes from the rule split, EM on
// the 70% split; rules learned on the rule split; scored on the test split.
TwoPhaseRun run_two_phase(const SynthSpec& spec) {
  const SynthCorpus syn = generate_synthetic(spec);
  const Lexicon lex = syn.lexicon();
  const CorpusSplit split = split_corpus(syn.corpus, {}, spec.seed);
  GoldCorpus bootstrap;
  for (const auto& s : split.train_rules.sentences) {
    if (bootstrap.morpheme_count() >= 2000) break;
    bootstrap.sentences.push_back(s);
  }
  const TrainResult trained =
      train_model(TrainMode::BootstrapThenEm, bootstrap, split.train_em, lex, syn.projection, TrainOptions{});
  const auto first = tag_segmented(trained.model, split.train_rules.sentences, lex, syn.projection);
  const RuleList rules = learn_rules(first, split.train_rules.sentences, enumerate_schemas());
  const auto hmm = tag_segmented(trained.model, split.test.sentences, lex, syn.projection);
  const auto corrected = correct_all(rules, hmm);
  const EvalReport a = evaluate(hmm, split.test, lex, syn.projection);
  const EvalReport b = evaluate(corrected, split.test, lex, syn.projection);
  TwoPhaseRun out;
  out.morphemes = syn.corpus.morpheme_count();
  out.perturbed_rate = static_cast<double>(syn.perturbed_sites) / static_cast<double>(out.morphemes);
  out.ambiguous_rate = static_cast<double>(a.ambiguous_count) / static_cast<double>(a.tagged_count);
  out.hmm = a.accuracy();
  out.two_phase = b.accuracy();
  out.rules = rules.size();
  return out;
}

Outcome two_phase_improvement() {
  Outcome o;
  const SynthSpec spec = two_phase_spec(1);
  const TwoPhaseRun run = run_two_phase(spec);
  SynthSpec control_spec = spec;
  control_spec.auto_perturbations = 0;
  const TwoPhaseRun control = run_two_phase(control_spec);
  const double gain = 100.0 * (run.two_phase - run.hmm);

  o.require(run.morphemes >= 5000, "corpus has only " + std::to_string(run.morphemes) + " morphemes");
  o.require(spec.ambiguity >= 0.3 && run.ambiguous_rate >= 0.3, "ambiguity below 0.3");
  o.require(run.perturbed_rate >= 0.15, "perturbations fire on only " + fmt("%.3f", run.perturbed_rate));
  o.require(gain >= 5.0, "gain is only " + fmt("%.2f", gain) + " points");
  o.require(control.hmm > 0.95, "control HMM accuracy " + fmt("%.4f", control.hmm));
  o.detail = std::to_string(run.morphemes) + " morphemes, perturbed " + fmt("%.3f", run.perturbed_rate) +
             ", ambiguous " + fmt("%.3f", run.ambiguous_rate) + "; HMM " + fmt("%.2f", 100 * run.hmm) +
             "% -> two-phase " + fmt("%.2f", 100 * run.two_phase) + "% (+" + fmt("%.2f", gain) + ", " +
             std::to_string(run.rules) + " rules); control HMM " + fmt("%.2f", 100 * control.hmm) + "%" +
             (o.pass ? "" : " [" + o.detail + "]");

  // Other seeds of the same setting, for the record only.
  for (std::uint64_t seed = 2; seed <= 6; ++seed) {
    const TwoPhaseRun other = run_two_phase(two_phase_spec(seed));
    o.notes.push_back("seed " + std::to_string(seed) + ": perturbed " + fmt("%.3f", other.perturbed_rate) +
                      ", HMM " + fmt("%.2f", 100 * other.hmm) + "% -> two-phase " +
                      fmt("%.2f", 100 * other.two_phase) + "%");
  }
  return o;
}

Outcome accuracy_formula() {
  Outcome o;
  // 200 one-morpheme sentences, 17 of them mistagged.
  GoldCorpus gold;
  std::vector<TaggedSentence> system;
  for (int i = 0; i < 200; ++i) {
    gold.sentences.push_back(sentence_of({{"m" + std::to_string(i) + "/A"}}));
    system.push_back(sentence_of({{"m" + std::to_string(i) + (i < 17 ? "/B" : "/A")}}));
  }
  const EvalReport r = evaluate(system, gold, Lexicon({}, ConnectivityTable::allow_all()), TagsetProjection({}, Tag("A")));
  o.require(r.tagged_count == 200 && r.incorrect_count == 17, "counts are wrong");
  o.require(r.accuracy() == 0.915, "accuracy is " + fmt("%.17g", r.accuracy()));
  EvalReport two = r;
  two.incorrect_count = 9;
  const std::string row = format_table_row("test", r, two);
  o.require(row == "test | 200 | 0 | 91.5 | 95.5", "row is '" + row + "'");
  if (o.pass) o.detail = "accuracy 0.915, row '" + row + "'";
  return o;
}

Outcome round_trips() {
  Outcome o;
  const std::string dir = FIXTURE_DIR;
  const auto check = [&](const std::string& file, const std::function<std::string(std::istream&)>& cycle) {
    const std::string text = slurp(dir + "/" + file);
    std::istringstream in(text);
    o.require(!text.empty() && cycle(in) == text, file + " changed on round trip");
  };
  check("toy.corpus", [](std::istream& in) {
    std::ostringstream out;
    write_corpus(out, parse_corpus(in).sentences);
    return out.str();
  });
  check("toy.hmm", [](std::istream& in) {
    std::ostringstream out;
    HmmModel::parse(in).write(out);
    return out.str();
  });
  check("toy.rules", [](std::istream& in) {
    std::ostringstream out;
    write_rules(out, parse_rules(in));
    return out.str();
  });
  check("korean.proj", [](std::istream& in) {
    std::ostringstream out;
    TagsetProjection::parse(in).write(out);
    return out.str();
  });
  check("toy.dict", [](std::istream& in) {
    std::ostringstream out;
    Lexicon::write_entries(out, Lexicon::parse_entries(in));
    return out.str();
  });
  check("toy.conn", [](std::istream& in) {
    std::ostringstream out;
    ConnectivityTable::parse(in).write(out);
    return out.str();
  });
  if (o.pass) o.detail = "corpus, model, rules, projection, dictionary, connectivity";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_seconds;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria = {
      {"viterbi-oracle", 10, viterbi_equivalence},
      {"lattice-selection", 10, lattice_equivalence},
      {"baum-welch-monotonicity", 30, baum_welch_monotone},
      {"segmentation-completeness", 10, segmentation_completeness},
      {"tbl-greedy", 60, tbl_greedy},
      {"two-phase-improvement", 300, two_phase_improvement},
      {"accuracy-formula", 1e9, accuracy_formula},
      {"round-trips", 1e9, round_trips},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if ((o.timed >= 0 ? o.timed : seconds) >= c.limit_seconds) {
      o.pass = false;
      o.detail += " [over the " + fmt("%.0f", c.limit_seconds) + " s limit]";
    }
    failures += !o.pass;
    std::printf("%s %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), seconds);
    for (const auto& note : o.notes) std::printf("     %s\n", note.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
