#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "morphtag/error.hpp"
#include "morphtag/hmm.hpp"
#include "test_support.hpp"

using namespace morphtag;
using namespace testsupport;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::vector<Tag> kNJ = {Tag("N"), Tag("J")};

std::vector<DecodeSlot> random_slots(std::mt19937_64& rng, std::size_t k, std::size_t v, std::size_t n) {
  std::vector<DecodeSlot> slots;
  for (std::size_t i = 0; i < n; ++i) {
    // An occasional lemma outside the vocabulary exercises the unknown mass.
    const std::string lemma = pick(rng, 10) == 0 ? "unseen" : "w" + std::to_string(pick(rng, v));
    slots.push_back({lemma, random_subset(rng, k)});
  }
  return slots;
}

}  // namespace

// Counts: BOS->N 2; N->J 2; J->J 1; N emits a, c; J emits a, b, b.
TEST(TrainSupervised, HandComputedAddLambda) {
  const std::vector<TaggedSentence> corpus = {sentence_of({{"a/N"}, {"b/J"}}),
                                              sentence_of({{"c/N", "a/J"}, {"b/J"}})};
  const HmmModel m = train_supervised(corpus, kNJ);
  const double u = 1e-4;
  const std::size_t N = 0, J = 1;
  EXPECT_NEAR(m.trans(HmmModel::kBos, N), 2.1 / 2.2, 1e-12);
  EXPECT_NEAR(m.trans(HmmModel::kBos, J), 0.1 / 2.2, 1e-12);
  EXPECT_NEAR(m.trans(N, J), 2.1 / 2.2, 1e-12);
  EXPECT_NEAR(m.trans(N, N), 0.1 / 2.2, 1e-12);
  EXPECT_NEAR(m.trans(J, J), 1.1 / 1.2, 1e-12);
  EXPECT_NEAR(m.trans(J, N), 0.1 / 1.2, 1e-12);
  EXPECT_NEAR(m.emit(N, std::string_view("a")), (1 - u) * 1.1 / 2.3, 1e-12);
  EXPECT_NEAR(m.emit(N, std::string_view("b")), (1 - u) * 0.1 / 2.3, 1e-12);
  EXPECT_NEAR(m.emit(N, std::string_view("c")), (1 - u) * 1.1 / 2.3, 1e-12);
  EXPECT_NEAR(m.emit(J, std::string_view("a")), (1 - u) * 1.1 / 3.3, 1e-12);
  EXPECT_NEAR(m.emit(J, std::string_view("b")), (1 - u) * 2.1 / 3.3, 1e-12);
  EXPECT_NEAR(m.emit(J, std::string_view("c")), (1 - u) * 0.1 / 3.3, 1e-12);
  EXPECT_NEAR(m.emit(J, std::string_view("zzz")), u / 1000.0, 1e-18);
}

TEST(TrainSupervised, VanishingLambdaGivesRelativeFrequencies) {
  Smoothing sm;
  sm.lambda_trans = 1e-9;
  sm.lambda_emit = 1e-9;
  sm.unk_mass = 1e-9;
  const HmmModel m = train_supervised({sentence_of({{"a/N", "b/J"}})}, kNJ, sm);
  EXPECT_NEAR(m.trans(HmmModel::kBos, 0), 1.0, 1e-6);
  EXPECT_NEAR(m.trans(0, 1), 1.0, 1e-6);
  EXPECT_NEAR(m.emit(0, std::string_view("a")), 1.0, 1e-6);
}

TEST(TrainSupervised, UnknownTagsAreListed) {
  try {
    train_supervised({sentence_of({{"a/N", "b/Z", "c/Q"}})}, kNJ);
    FAIL();
  } catch (const TrainingError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("Z"), std::string::npos);
    EXPECT_NE(what.find("Q"), std::string::npos);
  }
  EXPECT_THROW(train_supervised({}, kNJ), std::invalid_argument);
}

// Brute-force argmax over every allowed sequence.
TEST(ViterbiProperty, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(11);
  int rounding_ties = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const std::size_t k = 1 + pick(rng, 6);
    const std::size_t v = 1 + pick(rng, 6);
    const HmmModel model = random_model(rng, k, v);
    const auto slots = random_slots(rng, k, v, 1 + pick(rng, 8));
    const TagSequence got = viterbi(model, slots);
    const auto want = brute_viterbi(model, slots);
    ASSERT_TRUE(want.has_value());
    // Paths that tie in exact arithmetic may round apart in partial sums; the
    // tie-break is only checked when the oracle's margin is above rounding.
    if (got.tags != want->tags) {
      EXPECT_NEAR(path_score(model, slots, got.tags), want->log_score, 1e-12) << "trial " << trial;
      ++rounding_ties;
    }
    EXPECT_NEAR(got.log_score, want->log_score, 1e-9);
    EXPECT_NEAR(score_sequence(model, slots, got.tags), got.log_score, 1e-12);
  }
  EXPECT_LT(rounding_ties, 10);
}

TEST(Viterbi, ForcedPath) {
  std::mt19937_64 rng(1);
  const HmmModel model = random_model(rng, 4, 3);
  const std::vector<DecodeSlot> slots = {{"w0", {3}}, {"w1", {0}}, {"w2", {2}}, {"w0", {2}}};
  EXPECT_EQ(viterbi(model, slots).tags, (std::vector<std::size_t>{3, 0, 2, 2}));
}

TEST(Viterbi, UniformModelPicksSmallestIndices) {
  const std::size_t k = 3;
  std::vector<Tag> tags = {Tag("A"), Tag("B"), Tag("C")};
  std::vector<double> trans((k + 1) * k, 1.0 / 3.0);
  const double e = (1.0 - 1e-4) / 2.0;
  const HmmModel model(tags, {"x", "y"}, trans, std::vector<double>(k * 2, e), Smoothing{});
  const std::vector<DecodeSlot> slots = {{"x", {1, 2}}, {"y", {0, 1, 2}}, {"x", {0, 2}}};
  EXPECT_EQ(viterbi(model, slots).tags, (std::vector<std::size_t>{1, 0, 0}));
}

TEST(Viterbi, StructuralZeroFails) {
  const std::vector<Tag> tags = {Tag("A"), Tag("B")};
  // A never precedes B.
  const std::vector<double> trans = {1.0, 0.0, 0.5, 0.5, 0.5, 0.5};
  const HmmModel model(tags, {"x"}, trans, {1.0 - 1e-4, 1.0 - 1e-4}, Smoothing{});
  EXPECT_THROW(viterbi(model, std::vector<DecodeSlot>{{"x", {0}}, {"x", {1}}}), DecodeFailure);
  EXPECT_EQ(viterbi(model, std::vector<DecodeSlot>{{"x", {0}}, {"x", {0, 1}}}).tags,
            (std::vector<std::size_t>{0, 0}));
}

TEST(Viterbi, Preconditions) {
  std::mt19937_64 rng(1);
  const HmmModel model = random_model(rng, 2, 2);
  EXPECT_THROW(viterbi(model, std::vector<DecodeSlot>{}), std::invalid_argument);
  EXPECT_THROW(viterbi(model, std::vector<DecodeSlot>{{"w0", {}}}), std::invalid_argument);
  EXPECT_THROW(viterbi(model, std::vector<DecodeSlot>{{"w0", {5}}}), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Lattices

namespace {

Morpheme morpheme(const std::string& lemma, const std::string& tag) { return fixed_morpheme(lemma, tag); }

}  // namespace

TEST(TagLattice, SingleCandidateEqualsViterbi) {
  std::mt19937_64 rng(5);
  const HmmModel model = random_model(rng, 3, 4);
  SentenceLattice lattice;
  lattice.eojeols.push_back({"x", {{morpheme("w0", "T1"), morpheme("w2", "T0")}}});
  const auto tagged = tag_lattice(model, lattice);
  const std::vector<DecodeSlot> slots = {{"w0", {1}}, {"w2", {0}}};
  EXPECT_DOUBLE_EQ(tagged.score, viterbi(model, slots).log_score);
  EXPECT_FALSE(tagged.truncated);
}

TEST(TagLattice, HigherScoringCandidateWins) {
  // T0 strongly prefers w0.
  const std::vector<Tag> tags = {Tag("T0"), Tag("T1")};
  const double u = 1e-4;
  const HmmModel model(tags, {"w0", "w1"}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, {0.9 - u, 0.1, 0.1, 0.9 - u},
                       Smoothing{});
  SentenceLattice lattice;
  lattice.eojeols.push_back({"x", {{morpheme("w1", "T0")}, {morpheme("w0", "T0")}}});
  const auto tagged = tag_lattice(model, lattice);
  EXPECT_EQ(tagged.eojeols[0].morphemes[0].lemma, "w0");
  EXPECT_DOUBLE_EQ(tagged.score, std::log(0.5) + std::log(0.9 - u));
}

TEST(TagLattice, TwoByThreeProduct) {
  std::mt19937_64 rng(8);
  const HmmModel model = random_model(rng, 3, 5);
  SentenceLattice lattice;
  lattice.eojeols.push_back({"a", {{morpheme("w0", "T0")}, {morpheme("w1", "T2"), morpheme("w2", "T1")}}});
  lattice.eojeols.push_back({"b", {{morpheme("w3", "T1")}, {morpheme("w3", "T2")}, {morpheme("w4", "T0")}}});
  EXPECT_EQ(lattice.sentence_candidates(), 6u);
  const auto got = as_choice(model, tag_lattice(model, lattice));
  const auto want = brute_lattice(model, lattice);
  EXPECT_EQ(got.score, want.score);
  EXPECT_EQ(got.lemmas, want.lemmas);
  EXPECT_EQ(got.tags, want.tags);
}

TEST(TagLatticeProperty, MatchesPerCandidateScoring) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + pick(rng, 4);
    const HmmModel model = random_model(rng, k, 4);
    const auto lattice = random_lattice(rng, k, 3);
    const auto got = as_choice(model, tag_lattice(model, lattice));
    const auto want = brute_lattice(model, lattice);
    ASSERT_EQ(got.score, want.score);
    EXPECT_EQ(got.lemmas, want.lemmas);
    EXPECT_EQ(got.tags, want.tags);
  }
}

TEST(TagLattice, CapTruncates) {
  std::mt19937_64 rng(2);
  const HmmModel model = random_model(rng, 3, 3);
  SentenceLattice lattice;
  for (int e = 0; e < 3; ++e) {
    lattice.eojeols.push_back({"x", {{morpheme("w0", "T0")}, {morpheme("w1", "T1")}, {morpheme("w2", "T2")}}});
  }
  EXPECT_TRUE(tag_lattice(model, lattice, 5).truncated);
  EXPECT_FALSE(tag_lattice(model, lattice, 27).truncated);
}

TEST(TagAnalyzed, UsesDictionaryTagsOfEachLemma) {
  const auto lex = Lexicon::load(FIXTURE_DIR "/toy.dict", FIXTURE_DIR "/toy.conn");
  const auto proj = TagsetProjection::load(FIXTURE_DIR "/korean.proj");
  const HmmModel model = train_supervised({sentence_of({{"가다/D", "요/mT"}})}, proj.labels());
  const auto slots = slots_for(sentence_of({{"가다/jC", "요/jC"}, {"미지/jC"}}), model, lex, proj);
  ASSERT_EQ(slots.size(), 3u);
  EXPECT_EQ(slots[0].allowed.size(), 1u);  // 가다 is only a verb
  EXPECT_EQ(slots[2].allowed.size(), proj.labels().size());  // unknown lemma: every tag
}

// ---------------------------------------------------------------------------
// Model files

TEST(ModelFile, FixtureRoundTripsByteForByte) {
  const std::string text = slurp(FIXTURE_DIR "/toy.hmm");
  std::istringstream in(text);
  std::ostringstream out;
  HmmModel::parse(in).write(out);
  EXPECT_EQ(out.str(), text);
}

TEST(ModelFile, SaveLoadSaveIsIdempotent) {
  std::mt19937_64 rng(4);
  const HmmModel model = random_model(rng, 4, 6);
  std::ostringstream first;
  model.write(first);
  std::istringstream in(first.str());
  std::ostringstream second;
  HmmModel::parse(in).write(second);
  EXPECT_EQ(first.str(), second.str());
}

TEST(ModelFile, HandWrittenFileDecodesLikeInMemoryModel) {
  const HmmModel loaded = HmmModel::load(FIXTURE_DIR "/toy.hmm");
  const double u = 1e-4;
  const HmmModel built(kNJ, {"a", "b"}, {0.3, 0.7, 0.6, 0.4, 0.8, 0.2}, {0.6, 0.4 - u, 0.1, 0.9 - u}, Smoothing{});
  std::mt19937_64 rng(10);
  for (int i = 0; i < 10; ++i) {
    std::vector<DecodeSlot> slots;
    const std::size_t n = 1 + pick(rng, 6);
    for (std::size_t j = 0; j < n; ++j) slots.push_back({pick(rng, 2) ? "a" : "b", {0, 1}});
    const auto x = viterbi(loaded, slots);
    const auto y = viterbi(built, slots);
    EXPECT_EQ(x.tags, y.tags);
    EXPECT_NEAR(x.log_score, y.log_score, 1e-12);
  }
}

TEST(ModelFile, UnnormalizedRowNamesTheTag) {
  std::string text = slurp(FIXTURE_DIR "/toy.hmm");
  const std::string from = "N\tJ\t7.000000000000e-01";
  text.replace(text.find(from), from.size(), "N\tJ\t5.000000000000e-01");  // N row now sums to 0.8
  std::istringstream in(text);
  try {
    HmmModel::parse(in);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("'N'"), std::string::npos) << e.what();
  }
}

TEST(ModelFile, CorruptSections) {
  std::istringstream no_header("TAGS\n<BOS>\nN\n");
  EXPECT_THROW(HmmModel::parse(no_header), FormatError);
  std::string text = slurp(FIXTURE_DIR "/toy.hmm");
  text.replace(text.find("TRANS"), 5, "TRANZ");
  std::istringstream bad_section(text);
  EXPECT_THROW(HmmModel::parse(bad_section), FormatError);
}
