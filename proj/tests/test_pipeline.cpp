#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ews/pipeline.hpp"
#include "test_util.hpp"

using namespace ews;
using testutil::throws_code;
namespace fs = std::filesystem;

namespace {

// Small but complete configuration; every stage runs in about a second.
const char* kTinyConfig = R"({
  // comments are allowed
  "seed": 9,
  "generator": {"n_households": 60},
  "models": {
    "random_forest": {"n_trees": 8},
    "xgboost": {"n_rounds": 15},
    "lightgbm": {"n_rounds": 15},
    "tuning": {"learning_rates": [0.1, 0.3], "max_depths": [2], "max_leaves": [7]}
  },
  "report": {"narratives": 3}
})";

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(EWS_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
  const auto c = parse_config("{}");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.generator.n_households, 750);
  EXPECT_EQ(c.recipe, FeatureRecipe::defaults());
  EXPECT_EQ(c.report.threshold, 0.5);
  EXPECT_EQ(c.models.xgboost, BoostConfig::depth_wise());
}

TEST(Config, SeedDrivesComponentSeeds) {
  const auto c = parse_config(R"({"seed": 100})");
  EXPECT_EQ(c.generator.seed, 100u);
  EXPECT_EQ(c.models.random_forest.seed, 101u);
  EXPECT_EQ(c.models.xgboost.seed, 102u);
  EXPECT_EQ(c.models.lightgbm.seed, 102u);
  EXPECT_EQ(c.shock.seed, 103u);
}

TEST(Config, ResolvedDocumentRoundTrips) {
  const auto c = parse_config(kTinyConfig);
  const auto text = config_to_json(c);
  EXPECT_EQ(config_to_json(parse_config(text)), text);
  EXPECT_EQ(parse_config(text).models.tuning.learning_rates, (std::vector<double>{0.1, 0.3}));
}

TEST(Config, SyntaxErrorsCarryLineContext) {
  const std::string bad = "{\n  \"seed\": 4,\n  \"generator\": {\"n_households\": }\n}";
  EXPECT_TRUE(throws_code([&] { parse_config(bad, "run.json"); }, ErrorCode::kConfig, "run.json:3:"));
  EXPECT_TRUE(throws_code([&] { parse_config(bad, "run.json"); }, ErrorCode::kConfig, "\"n_households\": }"));
}

TEST(Config, UnknownKeysAndWrongTypesNameTheirPath) {
  EXPECT_TRUE(throws_code([] { parse_config(R"({"generator": {"households": 5}})"); }, ErrorCode::kConfig,
                          "generator.households"));
  EXPECT_TRUE(throws_code([] { parse_config(R"({"report": {"threshold": "high"}})"); }, ErrorCode::kConfig,
                          "report.threshold"));
  EXPECT_TRUE(throws_code([] { parse_config(R"({"split": {"train_rounds": [1, 1]}})"); }, ErrorCode::kConfig,
                          "split.train_rounds"));
}

TEST(Config, ValidationRejectsInconsistentSettings) {
  auto expect_invalid = [](const std::string& text, const std::string& needle) {
    return throws_code([&] { parse_config(text).validate(); }, ErrorCode::kConfig, needle);
  };
  EXPECT_TRUE(expect_invalid(R"({"split": {"test_rounds": [4]}})", "round"));
  EXPECT_TRUE(expect_invalid(R"({"split": {"train_rounds": [2], "validation_rounds": [1]}})", ""));
  EXPECT_TRUE(expect_invalid(R"({"shock": {"target_columns": ["nope"]}})", "nope"));
  EXPECT_TRUE(expect_invalid(R"({"models": {"tuning": {"learning_rates": [0.1, 0.2, 0.3, 0.4]}}})", "9"));
  EXPECT_TRUE(expect_invalid(R"({"features": {"rolling_window": 5}})", "rolling_window"));
  EXPECT_TRUE(expect_invalid(R"({"generator": {"n_households": 3}})", "n_households"));
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Roster, FiveBinaryAndFourSeverityModels) {
  int binary = 0, severity = 0;
  for (const auto& m : model_roster()) (m.target == Target::kBinary ? binary : severity)++;
  EXPECT_EQ(binary, 5);
  EXPECT_EQ(severity, 4);
}

TEST(Pipeline, StagesRequireEarlierArtifacts) {
  testutil::TempDir dir;
  Pipeline p(parse_config(kTinyConfig), dir.path());
  EXPECT_TRUE(throws_code([&] { p.evaluate(); }, ErrorCode::kDependency, "models/registry.json"));
  EXPECT_TRUE(throws_code([&] { p.featurize(); }, ErrorCode::kDependency, "panel.csv"));
  p.generate();
  p.featurize();
  EXPECT_TRUE(throws_code([&] { p.evaluate(); }, ErrorCode::kDependency, "models/registry.json"));
  EXPECT_TRUE(throws_code([&] { p.report(); }, ErrorCode::kDependency));
}

TEST(Pipeline, TinyRunProducesEveryArtifactAndIsDeterministic) {
  testutil::TempDir a, b;
  const auto config = parse_config(kTinyConfig);
  Pipeline(config, a.path()).run("run-all");
  Pipeline(config, b.path()).run("run-all");

  for (const char* rel : {"panel.csv", "eda.json", "transform_state.json", "features/train.csv",
                          "models/registry.json", "evaluation.json", "explain/summary.json",
                          "stress/stress_report.json", "stress/drift_report.json", "report/index.html",
                          "report/tables/binary_models.csv", "report/tables/severity_models.csv",
                          "manifest.json"}) {
    EXPECT_TRUE(fs::exists(a / rel)) << rel;
  }

  const auto manifest = nlohmann::json::parse(testutil::slurp(a / "manifest.json"));
  EXPECT_EQ(manifest["format"], std::string(kManifestFormat));
  std::size_t listed = 0;
  for (const auto& entry : manifest["artifacts"]) {
    const auto path = a.path() / entry["path"].get<std::string>();
    ASSERT_TRUE(fs::exists(path)) << path;
    EXPECT_EQ(entry["sha256"].get<std::string>(), sha256_hex(testutil::slurp(path)));
    const auto other = b.path() / entry["path"].get<std::string>();
    EXPECT_EQ(testutil::slurp(path), testutil::slurp(other)) << entry["path"];
    ++listed;
  }
  EXPECT_GT(listed, 30u);
  EXPECT_EQ(manifest["config_sha256"],
            nlohmann::json::parse(testutil::slurp(b / "manifest.json"))["config_sha256"]);

  // Report tables mirror the five-model binary and four-model severity layout.
  const auto binary = testutil::slurp(a / "report/tables/binary_models.csv");
  EXPECT_EQ(std::count(binary.begin(), binary.end(), '\n'), 6);
  EXPECT_EQ(binary.substr(0, binary.find('\n')), "model,label,roc_auc,pr_auc");
  const auto severity = testutil::slurp(a / "report/tables/severity_models.csv");
  EXPECT_EQ(std::count(severity.begin(), severity.end(), '\n'), 5);

  // Registry filenames carry a content hash.
  const auto registry = nlohmann::json::parse(testutil::slurp(a / "models/registry.json"));
  ASSERT_EQ(registry["models"].size(), 9u);
  for (const auto& m : registry["models"]) {
    const auto file = m["file"].get<std::string>();
    const auto digest = sha256_hex(testutil::slurp(a / file));
    EXPECT_EQ(m["sha256"].get<std::string>(), digest);
    EXPECT_NE(file.find(digest.substr(0, 12)), std::string::npos) << file;
  }
}

TEST(Pipeline, ReportIsRebuiltFromArtifactsAlone) {
  testutil::TempDir dir;
  Pipeline p(parse_config(kTinyConfig), dir.path());
  p.run("run-all");
  const auto html = testutil::slurp(dir / "report/index.html");
  fs::remove_all(dir / "report");
  p.run("report");
  EXPECT_EQ(testutil::slurp(dir / "report/index.html"), html);
}

TEST(Cli, ExitCodesFollowTheErrorClass) {
  testutil::TempDir dir;
  const auto log = dir / "log.txt";
  testutil::spit(dir / "tiny.json", kTinyConfig);
  testutil::spit(dir / "broken.json", "{\"seed\": }");
  testutil::spit(dir / "invalid.json", R"({"split": {"test_rounds": [7]}})");
  const auto out = (dir / "out").string();

  EXPECT_EQ(run_cli("--help", log), 0);
  EXPECT_EQ(run_cli("frobnicate", log), 2);
  EXPECT_EQ(run_cli("generate --config " + (dir / "broken.json").string() + " --out " + out, log), 2);
  EXPECT_NE(testutil::slurp(log).find("broken.json:1:"), std::string::npos) << testutil::slurp(log);
  EXPECT_EQ(run_cli("generate --config " + (dir / "invalid.json").string() + " --out " + out, log), 2);
  EXPECT_EQ(run_cli("evaluate --quiet --config " + (dir / "tiny.json").string() + " --out " + out, log), 3);
  EXPECT_NE(testutil::slurp(log).find("registry.json"), std::string::npos);

  EXPECT_EQ(run_cli("generate --quiet --config " + (dir / "tiny.json").string() + " --out " + out, log), 0);
  EXPECT_TRUE(testutil::slurp(log).empty());
  EXPECT_TRUE(fs::exists(dir / "out/manifest.json"));
  // A corrupted panel is a data-integrity failure.
  testutil::spit(dir / "out/panel.csv", "household_id,round\n1,1\n");
  EXPECT_EQ(run_cli("featurize --quiet --config " + (dir / "tiny.json").string() + " --out " + out, log), 4);
}

TEST(Cli, SeedFlagOverridesTheConfig) {
  testutil::TempDir dir;
  const auto log = dir / "log.txt";
  testutil::spit(dir / "tiny.json", kTinyConfig);
  ASSERT_EQ(run_cli("print-config --config " + (dir / "tiny.json").string() + " --seed 77", log), 0);
  const auto printed = nlohmann::json::parse(testutil::slurp(log));
  EXPECT_EQ(printed["seed"], 77);
}
