#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "framechange/pipeline.hpp"

#include "oracles.hpp"

using namespace framechange;

namespace {

const fs::path kFixture = fs::path(FRAMECHANGE_TEST_DATA) / "e2e";

class PipelineTest : public ::testing::Test {
protected:
  void SetUp() override {
    tmp_ = oracle::temp_dir("pipeline");
    cfg_ = load_config(kFixture / "config.json");
    cfg_.out_dir = tmp_ / "out";
  }
  void TearDown() override { fs::remove_all(tmp_); }

  fs::path write(const fs::path &rel, const std::string &text) {
    write_text_file(tmp_ / rel, text);
    return tmp_ / rel;
  }

  /// Runs the CLI; returns its exit code and leaves stderr in `err`.
  int run_cli(const std::string &args, std::string *err = nullptr) {
    const auto err_path = tmp_ / "stderr.txt";
    const std::string cmd = std::string(FRAMECHANGE_CLI) + " " + args + " > " +
                            (tmp_ / "stdout.txt").string() + " 2> " + err_path.string();
    const int status = std::system(cmd.c_str());
    if (err) *err = read_text_file(err_path);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path tmp_;
  PipelineConfig cfg_;
};

std::size_t brute_force_hits(const fs::path &lemma_file, const std::string &target) {
  std::ifstream in(lemma_file);
  std::size_t hits = 0;
  for (std::string line; std::getline(in, line);) {
    std::istringstream ss(line);
    for (std::string tok; ss >> tok;)
      if (tok == target) {
        ++hits;
        break;
      }
  }
  return hits;
}

} // namespace

TEST_F(PipelineTest, ConfigResolvesRelativePaths) {
  EXPECT_EQ(cfg_.c1.lemma, kFixture / "corpora/lemma_C1.txt");
  EXPECT_EQ(cfg_.mode, CollectionMode::ftfe);
  EXPECT_DOUBLE_EQ(cfg_.threshold, 0.5);
  EXPECT_EQ(cfg_.jobs, 1u);

  write("bad.json", R"({"mode":"triggers"})");
  EXPECT_THROW(load_config(tmp_ / "bad.json"), ConfigError);
  auto c = cfg_;
  c.group_fraction = 0.6;
  EXPECT_THROW(cmd_score(c), FractionOutOfRange);
  c = cfg_;
  c.threshold = 1.5;
  EXPECT_THROW(cmd_score(c), ConfigError);
}

TEST_F(PipelineTest, ExtractMatchesBruteForceCounts) {
  const auto res = cmd_extract(cfg_);
  EXPECT_TRUE(res.warnings.empty());
  const auto manifest = split_lines(read_text_file(cfg_.out_dir / "subcorpora/manifest.tsv"));
  ASSERT_EQ(manifest.size(), 1u + 3 * 2);
  for (const auto &t : read_target_list(cfg_.targets)) {
    for (const char *period : kPeriods) {
      const auto expected = brute_force_hits(cfg_.corpus(period).lemma, t.surface());
      const auto lemma_lines = split_lines(read_text_file(subcorpus_path(cfg_, t, period, "lemma")));
      const auto raw_lines = split_lines(read_text_file(subcorpus_path(cfg_, t, period, "raw")));
      EXPECT_EQ(lemma_lines.size(), expected);
      EXPECT_EQ(raw_lines.size(), expected);
      for (const auto &l : lemma_lines) EXPECT_TRUE(has_ws_token(l, t.surface()));
      const std::string row = t.surface() + "\t" + period + "\t" + std::to_string(expected);
      EXPECT_NE(std::find(manifest.begin(), manifest.end(), row), manifest.end()) << row;
    }
  }
}

TEST_F(PipelineTest, ExtractFiveSentenceFixtureAndAbsentTarget) {
  cfg_.c1 = {write("l1.txt", "a b\nx plane_nn\nc d\ne f\nplane_nn y\n"),
             write("r1.txt", "A B\nX plane\nC D\nE F\nplanes Y\n")};
  cfg_.c2 = {write("l2.txt", "g h\n"), write("r2.txt", "G H\n")};
  cfg_.targets = write("t.txt", "plane_nn\nabsent_nn\n");
  const auto res = cmd_extract(cfg_);
  const auto raw = split_lines(read_text_file(subcorpus_path(cfg_, TargetWord("plane_nn"), "C1", "raw")));
  EXPECT_EQ(raw, (std::vector<std::string>{"X plane", "planes Y"}));
  EXPECT_EQ(read_text_file(subcorpus_path(cfg_, TargetWord("absent_nn"), "C1", "lemma")), "");
  EXPECT_EQ(res.warnings.size(), 3u);  // plane_nn/C2, absent_nn/C1, absent_nn/C2
}

TEST_F(PipelineTest, ExtractMismatchedCorporaFails) {
  cfg_.c1 = {write("l1.txt", "a\nb\nc\n"), write("r1.txt", "A\nB\n")};
  EXPECT_THROW(cmd_extract(cfg_), LineCountMismatch);

  std::string err;
  EXPECT_EQ(run_cli("extract --config " + (kFixture / "config.json").string() + " --out " +
                        (tmp_ / "cli").string() + " --lemma-c1 " + (tmp_ / "l1.txt").string() +
                        " --raw-c1 " + (tmp_ / "r1.txt").string(),
                    &err),
            1);
  EXPECT_NE(err.find("LineCountMismatch(3,2)"), std::string::npos) << err;
}

TEST_F(PipelineTest, ProfileHandFixtureAndEmptyTargets) {
  // Same 3-sentence fixture as the frame_collect unit tests.
  write("parses/plane_nn/C1.jsonl",
        R"({"sentence_index":0,"text":"A","provenance":"base","frames":[)"
        R"({"frame":"F1","trigger_text":"plane_nn","elements":[{"role":"R","text":"the pilot"}]},)"
        R"({"frame":"F2","trigger_text":"fly","elements":[{"role":"R","text":"the plane_nn"}]}]})"
        "\n"
        R"({"sentence_index":1,"text":"B","provenance":"base","frames":[)"
        R"({"frame":"F2","trigger_text":"land","elements":[{"role":"R","text":"a plane_nn"}]}]})"
        "\n"
        R"({"sentence_index":2,"text":"C","provenance":"small","frames":[)"
        R"({"frame":"F3","trigger_text":"sell","elements":[{"role":"R","text":"the car"}]}]})"
        "\n");
  write("parses/plane_nn/C2.jsonl",
        R"({"sentence_index":0,"text":"A","provenance":"base","frames":[)"
        R"({"frame":"F2","trigger_text":"x","elements":[{"role":"R","text":"plane_nn"}]}]})"
        "\n");
  write("parses/skip_nn/C1.jsonl",
        R"({"sentence_index":0,"text":"A","provenance":"skipped","frames":[]})"
        "\n");
  write("parses/skip_nn/C2.jsonl", "");
  write("parses/broken_nn/C1.jsonl", "{not json}\n");
  cfg_.parses_dir = tmp_ / "parses";
  cfg_.targets = write("t.txt", "broken_nn\nplane_nn\nskip_nn\n");

  const auto res = cmd_profile(cfg_);
  const TargetWord plane("plane_nn");
  auto p = read_profile(profile_path(cfg_, plane, "C1"));
  EXPECT_EQ(p.counts, (std::map<std::string, std::int64_t>{{"F1", 1}, {"F2", 2}}));
  // broken C1 (schema), broken C2 (missing file), skip C1 + C2 (empty)
  ASSERT_EQ(res.failures.size(), 4u);
  EXPECT_EQ(res.failures[0].target, "broken_nn");
  EXPECT_NE(res.failures[0].message.find("SchemaError"), std::string::npos);
  EXPECT_NE(res.failures[2].message.find("EmptyProfile"), std::string::npos);
  EXPECT_EQ(split_lines(read_text_file(cfg_.mode_dir() / "profile_failures.tsv")).size(), 4u);

  cfg_.mode = CollectionMode::fe;
  cmd_profile(cfg_);
  p = read_profile(profile_path(cfg_, plane, "C1"));
  EXPECT_EQ(p.counts, (std::map<std::string, std::int64_t>{{"F2", 2}}));
  EXPECT_EQ(p.mode, CollectionMode::fe);

  // Score continues past the failing targets.
  const auto scored = cmd_score(cfg_);
  EXPECT_EQ(scored.failures.size(), 2u);
  const auto scores = read_scores(scores_path(cfg_));
  ASSERT_EQ(scores.size(), 1u);
  EXPECT_EQ(scores[0].target.surface(), "plane_nn");
  EXPECT_EQ(scores[0].jsd, 0.0);
}

TEST_F(PipelineTest, ScoreFilesEqualInMemoryComposition) {
  cmd_profile(cfg_);
  EXPECT_TRUE(cmd_score(cfg_).failures.empty());

  ProfileMap c1, c2;
  for (const auto &t : read_target_list(cfg_.targets)) {
    c1.emplace(t.surface(), profile_target(cfg_, t, "C1"));
    c2.emplace(t.surface(), profile_target(cfg_, t, "C2"));
  }
  const auto in_memory = score_targets(c1, c2, cfg_.threshold);
  EXPECT_EQ(read_scores(scores_path(cfg_)), sorted_for_report(in_memory));
  EXPECT_EQ(read_text_file(scores_path(cfg_)), scores_to_tsv(in_memory));

  for (const auto &s : in_memory) {
    const auto report = nlohmann::json::parse(
        read_text_file(decomposition_path(cfg_, s.target, "json")));
    double sum = 0;
    for (const auto &row : report["rows"]) sum += row["contribution"].get<double>();
    EXPECT_NEAR(sum, s.jsd, 1e-9);
    EXPECT_EQ(report["jsd"].get<double>(), s.jsd);
  }
}

TEST_F(PipelineTest, ScoreWorkedDivergenceExample) {
  cfg_.targets = write("t.txt", "w_nn\n");
  write_text_file(profile_path(cfg_, TargetWord("w_nn"), "C1"),
                  R"({"target":"w_nn","period":"C1","mode":"ftfe","counts":{"A":4}})");
  write_text_file(profile_path(cfg_, TargetWord("w_nn"), "C2"),
                  R"({"target":"w_nn","period":"C2","mode":"ftfe","counts":{"A":1,"B":1}})");
  cmd_score(cfg_);
  const auto rows = split_lines(read_text_file(decomposition_path(cfg_, TargetWord("w_nn"), "tsv")));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].substr(0, rows[1].find('\t', 7)), "B\t0.25\t0.5");
  const auto a = split_ws(rows[2]);
  ASSERT_EQ(a[0], "A");
  EXPECT_NEAR(std::stod(a[1]), 0.061278, 1e-6);
  EXPECT_EQ(std::stod(a[2]), -0.5);
}

TEST_F(PipelineTest, EvaluatePerfectPrediction) {
  cmd_profile(cfg_);
  cmd_score(cfg_);
  std::string graded, binary;
  for (const auto &s : read_scores(scores_path(cfg_))) {
    graded += s.target.surface() + "\t" + format_double(s.jsd) + "\n";
    binary += s.target.surface() + "\t" + (s.label == ChangeLabel::changed ? "1" : "0") + "\n";
  }
  cfg_.gold_graded = write("graded.txt", graded);
  cfg_.gold_binary = write("binary.txt", binary);
  const auto r = cmd_evaluate(cfg_);
  EXPECT_DOUBLE_EQ(r.spearman_rho, 1.0);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_TRUE(fs::exists(cfg_.mode_dir() / "evaluation.json"));

  cfg_.gold_graded = write("graded_extra.txt", graded + "extra_nn\t0.1\n");
  cfg_.gold_binary = write("binary_extra.txt", binary + "extra_nn\t0\n");
  try {
    cmd_evaluate(cfg_);
    FAIL();
  } catch (const KeyMismatch &e) {
    EXPECT_EQ(e.difference(), std::vector<std::string>{"extra_nn"});
  }
}

TEST_F(PipelineTest, StatsCountsProvenance) {
  const auto s = cmd_stats(cfg_);
  EXPECT_TRUE(s.result.failures.empty());
  EXPECT_EQ(s.rows.size(), 12u);
  // Generator marks index 4 of every subcorpus "small" and one ball_nn/C1
  // sentence "skipped".
  EXPECT_EQ(s.lemma_total.total_sentences, 36u);
  EXPECT_EQ(s.lemma_total.fallback_count, 6u);
  EXPECT_EQ(s.lemma_total.skipped_count, 1u);
  EXPECT_EQ(s.raw_total, s.lemma_total);
  EXPECT_TRUE(fs::exists(cfg_.out_dir / "stats.tsv"));
}

TEST_F(PipelineTest, CompareRawLemmaOnAlignedFixture) {
  cmd_extract(cfg_);
  const auto r = cmd_compare_raw_lemma(cfg_);
  EXPECT_TRUE(r.result.failures.empty());
  ASSERT_EQ(r.rows.size(), 6u);
  // Raw parses mirror the lemma parses with inflected target forms, so the
  // raw-side forms recovered from the aligned subcorpora give identical profiles.
  for (const auto &row : r.rows) EXPECT_EQ(row.jsd, 0.0) << row.target << " " << row.period;
}

TEST_F(PipelineTest, RawTargetForms) {
  const auto forms = raw_target_forms({"the plane_nn fly", "a b plane_nn"},
                                      {"The planes flew", "a plane"}, TargetWord("plane_nn"));
  EXPECT_EQ(forms[0], (std::vector<std::string>{"planes", "plane"}));
  EXPECT_EQ(forms[1], (std::vector<std::string>{"plane"}));
}

TEST_F(PipelineTest, CliRunsAllSubcommands) {
  const std::string base =
      "--config " + (kFixture / "config.json").string() + " --out " + (tmp_ / "cli").string();
  for (const char *sub : {"extract", "profile", "score", "evaluate", "stats", "compare-raw-lemma"})
    EXPECT_EQ(run_cli(std::string(sub) + " " + base), 0) << sub;
  EXPECT_TRUE(fs::exists(tmp_ / "cli/ftfe/evaluation.txt"));
  EXPECT_EQ(run_cli("profile " + base + " --mode fe"), 0);
  EXPECT_TRUE(fs::exists(tmp_ / "cli/fe/profiles/plane_nn.C1.json"));
  EXPECT_EQ(run_cli("score " + base + " --mode bogus"), 1);
  EXPECT_EQ(run_cli("nonsense"), 1);
  EXPECT_EQ(run_cli("score " + base + " --group-fraction 0.9"), 1);
}
