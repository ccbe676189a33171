#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "morphtag/corpus.hpp"
#include "morphtag/tbl.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kFixtures = FIXTURE_DIR;

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("morphtag_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path at(const std::string& name) const { return dir_ / name; }

  // Runs the tool with stdout and stderr captured; returns the exit code.
  int run(const std::string& args) {
    const std::string cmd = std::string(MORPHTAG_BIN) + " " + args + " >" + at("stdout").string() + " 2>" +
                            at("stderr").string();
    const int status = std::system(cmd.c_str());
    out_ = slurp(at("stdout"));
    err_ = slurp(at("stderr"));
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string resources() {
    return "--lexicon " + kFixtures + "/toy.dict --connectivity " + kFixtures + "/toy.conn --projection " +
           kFixtures + "/korean.proj";
  }

  fs::path dir_;
  std::string out_, err_;
};

}  // namespace

TEST_F(Cli, AnalyzePrintsCandidates) {
  write_file(at("in.txt"), "나는 학교에 가요\n");
  ASSERT_EQ(run("analyze " + resources() + " --input " + at("in.txt").string()), 0) << err_;
  EXPECT_NE(out_.find("학교=학교/MC + 에=에/jC"), std::string::npos) << out_;
  EXPECT_NE(out_.find("가요"), std::string::npos);
}

TEST_F(Cli, AnalyzeUnknownEojeolExitsWithSegmentationCode) {
  write_file(at("in.txt"), "나는 없어\n");
  EXPECT_EQ(run("analyze " + resources() + " --input " + at("in.txt").string()), 2);
  EXPECT_NE(err_.find("없어"), std::string::npos) << err_;
}

TEST_F(Cli, TrainSupervisedThenTag) {
  ASSERT_EQ(run("train " + resources() + " --tagged " + kFixtures + "/toy.corpus --model " + at("m.hmm").string()), 0)
      << err_;
  ASSERT_TRUE(fs::exists(at("m.hmm")));
  write_file(at("in.txt"), "나는 학교에 가요\n학교에 가서\n");
  const std::string tag = "tag " + resources() + " --model " + at("m.hmm").string() + " --input " + at("in.txt").string();
  ASSERT_EQ(run(tag), 0) << err_;
  const std::string plain = out_;
  // The output is itself a corpus.
  std::istringstream in(plain);
  const auto parsed = morphtag::parse_corpus(in);
  EXPECT_EQ(parsed.sentences.size(), 2u);
  EXPECT_EQ(parsed.sentences[0].eojeols[2].morphemes[0].lemma, "가다");

  write_file(at("empty.rules"), "");
  ASSERT_EQ(run(tag + " --rules " + at("empty.rules").string()), 0) << err_;
  EXPECT_EQ(out_, plain);
}

TEST_F(Cli, EmRequiresAtLeastOneIteration) {
  EXPECT_EQ(run("train " + resources() + " --mode em --untagged " + kFixtures + "/toy.corpus --max_iters 0 --model " +
                at("m.hmm").string()),
            1);
  EXPECT_FALSE(fs::exists(at("m.hmm")));
  ASSERT_EQ(run("train " + resources() + " --mode em --untagged " + kFixtures + "/toy.corpus --max_iters 3 --model " +
                at("m.hmm").string()),
            0)
      << err_;
  EXPECT_GE(std::count(out_.begin(), out_.end(), '\n'), 2);
}

TEST_F(Cli, MissingFileAndBadModeAreUsageErrors) {
  EXPECT_EQ(run("train " + resources() + " --tagged " + at("nope").string() + " --model " + at("m").string()), 1);
  EXPECT_EQ(run("train " + resources() + " --mode magic --tagged " + kFixtures + "/toy.corpus --model " +
                at("m").string()),
            1);
  EXPECT_EQ(run("frobnicate"), 1);
}

TEST_F(Cli, MalformedCorpusIsFormatError) {
  write_file(at("bad.corpus"), "학교에\t학교/MC + 에\n");
  EXPECT_EQ(run("train " + resources() + " --tagged " + at("bad.corpus").string() + " --model " + at("m").string()),
            4);
  EXPECT_NE(err_.find("line 1"), std::string::npos) << err_;
}

TEST_F(Cli, LearnRulesOnIdenticalCorporaIsEmpty) {
  ASSERT_EQ(run("learn-rules " + resources() + " --gold " + kFixtures + "/toy.corpus --first " + kFixtures +
                "/toy.corpus --output " + at("r.rules").string()),
            0)
      << err_;
  EXPECT_EQ(slurp(at("r.rules")), "");
}

TEST_F(Cli, EvalPrintsTable) {
  ASSERT_EQ(run("eval " + resources() + " --gold " + kFixtures + "/toy.corpus --hmm " + kFixtures +
                "/toy.corpus --name toy"),
            0)
      << err_;
  std::istringstream lines(out_);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header, std::string(morphtag::kTableHeader));
  EXPECT_EQ(row, "toy | 10 | 0 | 100.0 | 100.0");
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
  write_file(at("run.conf"), "# settings\nlexicon = " + kFixtures + "/toy.dict\nconnectivity = " + kFixtures +
                                 "/toy.conn\nprojection = " + kFixtures + "/korean.proj\nname = fromconfig\n");
  ASSERT_EQ(run("--config " + at("run.conf").string() + " eval --gold " + kFixtures + "/toy.corpus --hmm " +
                kFixtures + "/toy.corpus"),
            0)
      << err_;
  EXPECT_NE(out_.find("fromconfig |"), std::string::npos) << out_;
  ASSERT_EQ(run("--config " + at("run.conf").string() + " eval --gold " + kFixtures + "/toy.corpus --hmm " +
                kFixtures + "/toy.corpus --name fromflag"),
            0);
  EXPECT_NE(out_.find("fromflag |"), std::string::npos) << out_;
}

TEST_F(Cli, SynthIsDeterministicAndSplits) {
  const auto synth = [&](const std::string& tag) {
    return run("synth --seed 7 --sentences 40 --ambiguity 0.3 --auto_perturbations 1 --corpus " +
               at(tag + ".corpus").string() + " --lexicon " + at(tag + ".dict").string() + " --connectivity " +
               at(tag + ".conn").string() + " --projection " + at(tag + ".proj").string());
  };
  ASSERT_EQ(synth("a"), 0) << err_;
  EXPECT_NE(out_.find("sentences 40"), std::string::npos) << out_;
  ASSERT_EQ(synth("b"), 0) << err_;
  EXPECT_EQ(slurp(at("a.corpus")), slurp(at("b.corpus")));
  EXPECT_EQ(slurp(at("a.dict")), slurp(at("b.dict")));

  ASSERT_EQ(run("split --input " + at("a.corpus").string() + " --seed 3 --prefix " + at("part").string()), 0) << err_;
  const auto count = [&](const std::string& suffix) {
    return morphtag::read_corpus(at("part" + suffix)).sentences.size();
  };
  EXPECT_EQ(count(".em.txt"), 28u);
  EXPECT_EQ(count(".rules.txt"), 6u);
  EXPECT_EQ(count(".test.txt"), 6u);
}

// The whole pipeline on synthetic data through the binary.
TEST_F(Cli, EndToEndOnSyntheticData) {
  ASSERT_EQ(run("synth --seed 3 --sentences 300 --ambiguity 0.3 --auto_perturbations 2 --corpus " +
                at("s.corpus").string() + " --lexicon " + at("s.dict").string() + " --connectivity " +
                at("s.conn").string() + " --projection " + at("s.proj").string()),
            0)
      << err_;
  ASSERT_EQ(run("split --input " + at("s.corpus").string() + " --prefix " + at("p").string()), 0) << err_;
  const std::string res = "--lexicon " + at("s.dict").string() + " --connectivity " + at("s.conn").string() +
                          " --projection " + at("s.proj").string();
  ASSERT_EQ(run("train " + res + " --tagged " + at("p.rules.txt").string() + " --untagged " +
                at("p.em.txt").string() + " --mode bootstrap-then-em --model " + at("m.hmm").string()),
            0)
      << err_;
  ASSERT_EQ(run("learn-rules " + res + " --gold " + at("p.rules.txt").string() + " --model " + at("m.hmm").string() +
                " --output " + at("r.rules").string()),
            0)
      << err_;
  EXPECT_NO_THROW(morphtag::load_rules(at("r.rules")));
  ASSERT_EQ(run("tag " + res + " --format corpus --input " + at("p.test.txt").string() + " --model " +
                at("m.hmm").string() + " --rules " + at("r.rules").string() + " --output " + at("t.corpus").string()),
            0)
      << err_;
  ASSERT_EQ(run("eval " + res + " --gold " + at("p.test.txt").string() + " --model " + at("m.hmm").string() +
                " --two_phase " + at("t.corpus").string()),
            0)
      << err_;
  EXPECT_NE(out_.find("total | "), std::string::npos) << out_;
}
