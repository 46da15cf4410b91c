#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "partadvisor/commands.hpp"
#include "support.hpp"

namespace partadvisor {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("partadvisor_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write("config.json", R"({"train": {"episodes": 6, "t_max": 5, "hidden_layers": [16, 8], "seed": 3},
                             "sim_profile": {"sampling_rate": 0.5, "noise_fraction": 0.02},
                             "committee": {"expert_episodes": 3, "extension_episodes": 4, "expert_refresh_episodes": 2}})");
    write("mix.json", "[1, 0.5, 0.2]");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) { std::ofstream(dir_ / name) << text; }
  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(Cli, OfflineTrainingThenRecommendation) {
  ASSERT_EQ(run({"train-offline", "--schema", testing::data_path("star3.json"), "--config", path("config.json"), "--out",
                 path("b")}),
            kExitOk)
      << err_.str();
  auto summary = json::parse(out_.str());
  EXPECT_EQ(summary["transitions"], 30);
  for (const char* f : {"b/manifest.json", "b/schema.json", "b/config.json", "b/naive.ckpt", "b/train_log.jsonl"})
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  ASSERT_EQ(run({"recommend", "--bundle", path("b"), "--mix", path("mix.json")}), kExitOk) << err_.str();
  auto rec = json::parse(out_.str());
  EXPECT_TRUE(rec["designs"].contains("sales"));
  EXPECT_EQ(rec["trajectory_length"], 5);
  EXPECT_LE(rec["expected_reward"].get<double>(), 0.0);
  ASSERT_EQ(run({"recommend", "--bundle", path("b"), "--mix", path("mix.json"), "--format", "table"}), kExitOk);
  EXPECT_NE(out_.str().find("customer"), std::string::npos);
}

TEST_F(Cli, SameSeedGivesIdenticalLogs) {
  for (const char* out : {"a", "b"})
    ASSERT_EQ(run({"train-offline", "--schema", testing::data_path("star3.json"), "--config", path("config.json"), "--out",
                   path(out), "--seed", "9"}),
              kExitOk);
  EXPECT_EQ(read("a/train_log.jsonl"), read("b/train_log.jsonl"));
  EXPECT_EQ(read("a/naive.ckpt"), read("b/naive.ckpt"));
  ASSERT_EQ(run({"train-offline", "--schema", testing::data_path("star3.json"), "--config", path("config.json"), "--out",
                 path("c"), "--seed", "10"}),
            kExitOk);
  EXPECT_NE(read("a/train_log.jsonl"), read("c/train_log.jsonl"));
}

TEST_F(Cli, OnlineWarmStartCommitteeAndExtension) {
  auto prefix = testing::load_data("star3.json").with_query_prefix(2);
  write("prefix.json", schema_to_json(prefix).dump());
  write("mix2.json", R"({"frequencies": [1, 0.3]})");
  ASSERT_EQ(run({"train-offline", "--schema", path("prefix.json"), "--config", path("config.json"), "--out", path("off")}), kExitOk)
      << err_.str();
  ASSERT_EQ(run({"train-online", "--schema", path("prefix.json"), "--config", path("config.json"), "--warm", path("off"),
                 "--out", path("on"), "--trace", path("trace.jsonl")}),
            kExitOk)
      << err_.str();
  auto online = json::parse(out_.str());
  EXPECT_TRUE(online["warm_start"].get<bool>());
  EXPECT_NEAR(online["initial_epsilon"].get<double>(), 0.1648522909833782, 1e-12);
  EXPECT_EQ(online["scale_factor_measurements"], 2);
  EXPECT_GT(online["executed_queries"].get<int>(), 0);
  EXPECT_TRUE(fs::exists(dir_ / "on/cache.json"));
  EXPECT_FALSE(read("trace.jsonl").empty());

  ASSERT_EQ(run({"derive-committee", "--bundle", path("on")}), kExitOk) << err_.str();
  auto committee = json::parse(out_.str());
  EXPECT_GE(committee["experts"].get<int>(), 1);
  EXPECT_EQ(committee["experts"], committee["references"].size());
  ASSERT_EQ(run({"recommend", "--bundle", path("on"), "--mix", path("mix2.json")}), kExitOk) << err_.str();
  EXPECT_TRUE(json::parse(out_.str())["expert"].is_number_integer());

  ASSERT_EQ(run({"extend-workload", "--bundle", path("on"), "--schema", testing::data_path("star3.json"), "--out", path("ext")}),
            kExitOk)
      << err_.str();
  auto ext = json::parse(out_.str());
  EXPECT_EQ(ext["queries"], 3);
  EXPECT_EQ(ext["refreshed_experts"], committee["experts"]);
  EXPECT_EQ(ext["experts"].get<int>(), committee["experts"].get<int>() + static_cast<int>(ext["new_references"].size()));
  ASSERT_EQ(run({"recommend", "--bundle", path("ext"), "--mix", path("mix.json")}), kExitOk) << err_.str();
  // The old bundle still expects two frequencies.
  EXPECT_EQ(run({"recommend", "--bundle", path("on"), "--mix", path("mix.json")}), kExitInput);
}

TEST_F(Cli, InputErrorsExitWithTwo) {
  EXPECT_EQ(run({"train-offline", "--schema", path("missing.json"), "--out", path("x")}), kExitInput);
  EXPECT_FALSE(err_.str().empty());
  write("bad_config.json", R"({"train": {"episodes": 5, "epsilon": 0.3}})");
  EXPECT_EQ(run({"train-offline", "--schema", testing::data_path("star3.json"), "--config", path("bad_config.json"), "--out",
                 path("x")}),
            kExitInput);
  EXPECT_NE(err_.str().find("train.epsilon"), std::string::npos) << err_.str();
  EXPECT_EQ(run({"no-such-command"}), kExitInput);
  EXPECT_EQ(run({"recommend", "--bundle", path("nowhere"), "--mix", path("mix.json")}), kExitInput);
  write("empty.json", R"({"scenarios": []})");
  EXPECT_EQ(run({"benchmark", "--scenario", path("empty.json")}), kExitInput);
  EXPECT_EQ(run({"--help"}), kExitOk);
}

TEST_F(Cli, BenchmarkReportsEveryApproach) {
  write("scenario.json", json{{"scenarios",
                               {{{"name", "micro"},
                                 {"schema", testing::data_path("microbenchmark.json")},
                                 {"config", {{"train", {{"episodes", 8}, {"t_max", 4}, {"hidden_layers", {16}}}},
                                             {"deploy", {{"network_bandwidth", 7.5e7}}}}},
                                 {"phase", "offline"}}}}}
                             .dump());
  ASSERT_EQ(run({"benchmark", "--scenario", path("scenario.json")}), kExitOk) << err_.str();
  auto report = json::parse(out_.str());
  const auto& rows = report["scenarios"][0]["approaches"];
  bool oracle_seen = false;
  for (const auto& r : rows) {
    if (!r["available"].get<bool>()) continue;
    EXPECT_GE(r["speedup_vs_slowest"].get<double>(), 1.0);
    if (r["approach"] == "oracle") {
      oracle_seen = true;
      EXPECT_TRUE(r["matches_oracle"].get<bool>());
      EXPECT_EQ(r["designs"]["B"]["replicated"], true);
    }
  }
  EXPECT_TRUE(oracle_seen);
}

TEST_F(Cli, ValidateSamplingReportsAgreement) {
  ASSERT_EQ(run({"validate-sampling", "--schema", testing::data_path("star3.json"), "--rate", "1"}), kExitOk) << err_.str();
  auto r = json::parse(out_.str());
  EXPECT_EQ(r["pair_agreement"], 1.0);
  EXPECT_TRUE(r["same_best"].get<bool>());
  EXPECT_EQ(run({"validate-sampling", "--schema", testing::data_path("star3.json"), "--rate", "1.5"}), kExitInput);
}

TEST(CliProcess, ExitCodesReachTheShell) {
  const std::string cli = PARTADVISOR_CLI_PATH;
  int status = std::system((cli + " recommend --bundle /nonexistent/bundle --mix /nonexistent/mix.json >/dev/null 2>&1").c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
  status = std::system((cli + " --help >/dev/null 2>&1").c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}

}  // namespace
}  // namespace partadvisor
