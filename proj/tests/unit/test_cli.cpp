#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support.hpp"

using legalstyle::test_support::TempDir;

namespace {

struct Result {
  int status = -1;
  std::string output;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Result run(const std::string& args) {
  const std::string cmd = quote(LEGALSTYLE_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) r.output += buf.data();
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::filesystem::path& p) {
  const auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// A run directory with a generated corpus, for chaining stages.
struct Workspace {
  TempDir dir;
  std::string run_dir = quote((dir / "run").string());

  std::string path(const std::string& name) const { return quote((dir / name).string()); }
  Result cli(const std::string& args) const { return run("-q --run-dir " + run_dir + " " + args); }

  void corpus(std::size_t docs, const std::string& name = "corpus.jsonl", const std::string& prefix = "doc") const {
    const auto r = run("-q gen-corpus --docs " + std::to_string(docs) + " --prefix " + prefix + " --out " + path(name));
    ASSERT_EQ(r.status, 0) << r.output;
  }
};

}  // namespace

TEST(Cli, HelpAndMissingSubcommand) {
  EXPECT_EQ(run("--help").status, 0);
  EXPECT_NE(run("").status, 0);
}

TEST(Cli, SynthWritesOnePairPerDocument) {
  Workspace w;
  w.corpus(3);
  const auto r = w.cli("synth --corpus " + w.path("corpus.jsonl"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(line_count(w.dir / "run" / "synth" / "pairs.jsonl"), 3u);
  const auto manifest = nlohmann::json::parse(slurp(w.dir / "run" / "manifest.json"));
  EXPECT_TRUE(manifest["stages"].contains("synth"));
  EXPECT_EQ(manifest["backend"]["kind"], "mock");
}

TEST(Cli, UnreadableCorpusNamesThePath) {
  Workspace w;
  const auto missing = (w.dir / "nowhere.jsonl").string();
  const auto r = w.cli("synth --corpus " + quote(missing));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find(missing), std::string::npos) << r.output;
}

TEST(Cli, ZeroSampleWarnsAndWritesNothing) {
  Workspace w;
  w.corpus(2);
  const auto r = run("--run-dir " + w.run_dir + " synth --n 0 --corpus " + w.path("corpus.jsonl"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("warn"), std::string::npos) << r.output;
  EXPECT_EQ(line_count(w.dir / "run" / "synth" / "pairs.jsonl"), 0u);
  EXPECT_NE(w.cli("learn").status, 0);
}

TEST(Cli, TrainIsReproducibleAndHonoursK) {
  Workspace w;
  w.corpus(8);
  ASSERT_EQ(w.cli("synth --corpus " + w.path("corpus.jsonl")).status, 0);
  ASSERT_EQ(w.cli("learn").status, 0);
  ASSERT_EQ(w.cli("train").status, 0);
  const auto model_path = w.dir / "run" / "model" / "model.json";
  const auto first = slurp(model_path);
  ASSERT_EQ(w.cli("train").status, 0);
  EXPECT_EQ(slurp(model_path), first);
  EXPECT_EQ(nlohmann::json::parse(first)["selected_indices"].size(), 25u);

  {
    std::ofstream(w.dir / "k40.json") << R"({"regression": {"k": 40}})";
    std::ofstream(w.dir / "k101.json") << R"({"regression": {"k": 101}})";
  }
  ASSERT_EQ(w.cli("--config " + w.path("k40.json") + " train").status, 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(model_path))["selected_indices"].size(), 40u);
  const auto bad = w.cli("--config " + w.path("k101.json") + " train");
  EXPECT_NE(bad.status, 0);
  EXPECT_NE(bad.output.find("Config"), std::string::npos) << bad.output;
}

TEST(Cli, ScoreAndEvalEndToEnd) {
  Workspace w;
  w.corpus(8);
  w.corpus(2, "test.jsonl", "test");
  ASSERT_EQ(w.cli("synth --corpus " + w.path("corpus.jsonl")).status, 0);
  ASSERT_EQ(w.cli("learn").status, 0);
  ASSERT_EQ(w.cli("train").status, 0);
  ASSERT_EQ(w.cli("variants --corpus " + w.path("test.jsonl")).status, 0);
  const auto variants = w.path("run/variants/variants.jsonl");
  EXPECT_EQ(line_count(w.dir / "run" / "variants" / "variants.jsonl"), 12u);

  const auto scored = w.cli("score --texts " + variants);
  ASSERT_EQ(scored.status, 0) << scored.output;
  EXPECT_TRUE(std::filesystem::exists(w.dir / "run" / "reports" / "test-42-0_gold.json"));
  EXPECT_TRUE(std::filesystem::exists(w.dir / "run" / "reports" / "summary.txt"));
  const auto report = nlohmann::json::parse(slurp(w.dir / "run" / "reports" / "test-42-0_gold.json"));
  EXPECT_EQ(report["dimensions"].size(), 7u);

  ASSERT_EQ(w.cli("simulate-raters --variants " + variants + " --out " + w.path("human.csv")).status, 0);
  const auto evald = w.cli("eval --human " + w.path("human.csv") + " --variants " + variants);
  ASSERT_EQ(evald.status, 0) << evald.output;
  const auto metrics = nlohmann::json::parse(slurp(w.dir / "run" / "eval" / "metrics.json"));
  EXPECT_FALSE(metrics.empty());

  // Ratings for a document with no report cannot be aligned.
  {
    std::ofstream out(w.dir / "human.csv", std::ios::app);
    for (const char* dim : {"noun", "verb", "adjective", "function_words", "coherence", "structure", "collocations"}) {
      out << "ghost,r1," << dim << ",5\n";
    }
  }
  const auto misaligned = w.cli("eval --human " + w.path("human.csv"));
  EXPECT_NE(misaligned.status, 0);
  EXPECT_NE(misaligned.output.find("Alignment"), std::string::npos) << misaligned.output;

  // Pools embedded under one seed do not match a backend with another.
  const auto mismatch = w.cli("--seed 7 score --texts " + variants);
  EXPECT_NE(mismatch.status, 0);
  EXPECT_NE(mismatch.output.find("VersionMismatch"), std::string::npos) << mismatch.output;
}

TEST(Cli, RerunIsIdempotent) {
  Workspace w;
  w.corpus(4);
  ASSERT_EQ(w.cli("synth --corpus " + w.path("corpus.jsonl")).status, 0);
  const auto pairs = slurp(w.dir / "run" / "synth" / "pairs.jsonl");
  const auto manifest = slurp(w.dir / "run" / "manifest.json");
  ASSERT_EQ(w.cli("synth --corpus " + w.path("corpus.jsonl")).status, 0);
  EXPECT_EQ(slurp(w.dir / "run" / "synth" / "pairs.jsonl"), pairs);
  EXPECT_EQ(slurp(w.dir / "run" / "manifest.json"), manifest);
}

TEST(Cli, HeldLockIsRejected) {
  Workspace w;
  w.corpus(2);
  std::filesystem::create_directories(w.dir / "run");
  std::ofstream(w.dir / "run" / ".lock") << "1\n";
  const auto r = w.cli("synth --corpus " + w.path("corpus.jsonl"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("Locked"), std::string::npos) << r.output;
  std::filesystem::remove(w.dir / "run" / ".lock");
  EXPECT_EQ(w.cli("synth --corpus " + w.path("corpus.jsonl")).status, 0);
  EXPECT_FALSE(std::filesystem::exists(w.dir / "run" / ".lock"));
}
