#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "cli.hpp"
#include "fixture_server.hpp"
#include "sisynth/dataset.hpp"
#include "test_support.hpp"

namespace sisynth {
namespace {

using testing::fixture;
using testing::slurp;
using testing::TempDir;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

bool tree_contains(const std::filesystem::path& dir, const std::string& needle) {
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && slurp(e.path()).find(needle) != std::string::npos) return true;
  }
  return false;
}

TEST(Cli, TopicsListPrintsFourteen) {
  const auto r = run({"topics", "list"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t lines = 0;
  for (char c : r.out) lines += c == '\n';
  EXPECT_EQ(lines, 14u);
  EXPECT_NE(r.out.find("Death of closed one"), std::string::npos);
  const auto j = run({"topics", "list", "--json"});
  EXPECT_EQ(nlohmann::json::parse(j.out).size(), 14u);
}

TEST(Cli, UnknownCommandIsUsageError) {
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"dataset", "split"}).code, 2);
  EXPECT_EQ(run({"demo"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, PromptRenderMatchesGolden) {
  const auto r = run({"prompt", "render", "--topics", "default"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(fixture("prompts/zero_shot_topics_binary.txt")));
  const auto four = run({"prompt", "render", "--schema", "fourclass", "--topics", "none", "--count", "10"});
  EXPECT_EQ(four.out, slurp(fixture("prompts/zero_shot_no_topics_fourclass.txt")));
}

TEST(Cli, FewShotPromptFromExemplarDataset) {
  TempDir dir;
  {
    std::ofstream raw(dir / "ex.raw.jsonl");
    for (const auto& e : nlohmann::json::parse(slurp(fixture("prompts/few_shot_exemplars_fourclass.json")))) {
      raw << e.dump() << "\n";
    }
  }
  ASSERT_EQ(run({"dataset", "ingest", "--in", (dir / "ex.raw.jsonl").string(), "--out", (dir / "ex.jsonl").string(),
                 "--schema", "fourclass", "--corpus", "fixture"})
                .code,
            0);
  const auto r = run({"prompt", "render", "--schema", "fourclass", "--topics", "default", "--shots", "2", "--exemplars",
                      (dir / "ex.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  // Two per class out of exactly two per class: every exemplar appears.
  EXPECT_EQ(r.out.size(), slurp(fixture("prompts/few_shot_topics_fourclass.txt")).size());
  EXPECT_NE(r.out.find("Example 8:"), std::string::npos);
}

TEST(Cli, GenerateParseWithMock) {
  TempDir dir;
  const auto job = (dir / "job").string();
  auto r = run({"generate", "--mock", "--requests", "3", "--topics", "default", "--out", job});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"parse", "--job", job, "--out", (dir / "gpt.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ds = read_dataset(dir / "gpt.jsonl");
  EXPECT_GT(ds.size(), 20u);
  EXPECT_TRUE(std::filesystem::exists(dir / "gpt.parse_report.json"));
  // Refuses to overwrite.
  EXPECT_EQ(run({"parse", "--job", job, "--out", (dir / "gpt.jsonl").string()}).code, 1);
}

TEST(Cli, SecretNeverWrittenToArtifacts) {
  const std::string secret = "sk-live-5ecret-value-zz9";
  ::setenv("SISYNTH_SCAN_KEY", secret.c_str(), 1);
  testing::FixtureServer server([](const httplib::Request&, httplib::Response& res, int) {
    res.set_content(testing::FixtureServer::envelope(
                        R"([{"text":"I lost my job and the bills keep piling up every week.","topic":"Unemployment","risk level":"Non Suicidal"}])"),
                    "application/json");
  });
  TempDir dir;
  const nlohmann::json cfg = {
      {"providers",
       {{{"name", "remote"}, {"endpoint", server.url()}, {"model_id", "m"}, {"auth_env_var", "SISYNTH_SCAN_KEY"},
         {"active", true}, {"retry", {{"base_backoff_s", 0.0}}}}}},
      {"prompt_spec", {{"schema", "binary"}, {"topics", "default"}}},
      {"output_dir", "out"},
      {"requests", 2}};
  std::ofstream(dir / "config.json") << cfg.dump(2);
  auto r = run({"generate", "--config", (dir / "config.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(server.auth_headers().at(0), "Bearer " + secret);
  r = run({"parse", "--job", (dir / "out/jobs/remote").string(), "--out", (dir / "out/remote.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(tree_contains(dir.path(), secret));
  EXPECT_EQ(r.out.find(secret), std::string::npos);
  ::unsetenv("SISYNTH_SCAN_KEY");

  const nlohmann::json inline_cfg = {
      {"providers", {{{"name", "bad"}, {"endpoint", server.url()}, {"model_id", "m"}, {"api_key", secret}, {"active", true}}}}};
  std::ofstream(dir / "inline.json") << inline_cfg.dump();
  r = run({"generate", "--config", (dir / "inline.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.find(secret), std::string::npos);
}

TEST(Cli, DatasetPipelineCommands) {
  TempDir dir;
  {
    std::ofstream raw(dir / "raw.jsonl");
    for (int i = 0; i < 60; ++i) {
      const char* labels[] = {"NoRisk", "LowRisk", "ModerateRisk", "HighRisk"};
      raw << nlohmann::json{{"text", "post number " + std::to_string(i) + " about my week"},
                            {"label", labels[i % 4]},
                            {"user_id", "u" + std::to_string(i / 2)}}
                 .dump()
          << "\n";
    }
  }
  const auto d = [&](const std::string& f) { return (dir / f).string(); };
  ASSERT_EQ(run({"dataset", "ingest", "--in", d("raw.jsonl"), "--out", d("umd.jsonl"), "--schema", "fourclass", "--corpus", "umd"}).code, 0);
  auto r = run({"dataset", "split", "--in", d("umd.jsonl"), "--out-dir", d("split"), "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "split/umd-train.jsonl"));
  r = run({"dataset", "binarize", "--in", d("split/umd-train.jsonl"), "--out", d("train-bin.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_dataset(dir / "train-bin.jsonl").schema(), SchemaKind::kBinary);
  r = run({"dataset", "stats", "--in", d("train-bin.jsonl"), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("schema"), "binary");
  EXPECT_EQ(run({"dataset", "binarize", "--in", d("umd.jsonl"), "--out", d("umd.jsonl"), "--force"}).code, 1);
  EXPECT_EQ(run({"dataset", "ingest", "--in", d("missing.jsonl"), "--out", d("x.jsonl"), "--corpus", "x"}).code, 1);
}

TEST(Cli, DemoOfflineIsReproducibleAndMatchesGolden) {
  TempDir a, b;
  auto r = run({"demo", "--offline", "--out", a.path().string(), "--no-sweep"});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"demo", "--offline", "--out", b.path().string(), "--no-sweep"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(a / "eval/matrix.csv");
  EXPECT_EQ(csv, slurp(b / "eval/matrix.csv"));
  EXPECT_EQ(csv, slurp(fixture("demo/matrix.csv")));
  const auto report = nlohmann::json::parse(slurp(a / "report.json"));
  EXPECT_TRUE(report.is_object());
}

}  // namespace
}  // namespace sisynth
