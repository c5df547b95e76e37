#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "tempdir.hpp"
#include "tsaug/data_io.hpp"
#include "tsaug/error.hpp"
#include "tsaug_cli/app.hpp"
#include "tsaug_cli/run_config.hpp"

namespace {

using fixture::slurp;
using fixture::spit;
using fixture::TempDir;
using tsaug::cli::run;

const char* kSmallConfig = R"({
  "version": 1, "seed": 3, "repeats": 2,
  "dataset": {"synthetic": {"kind": "sine-vs-frequency", "length": 24, "samples_per_class": 20, "noise": 0.3}},
  "train": {"epochs": 2, "batch_size": 10},
  "grid": {"augmentations": ["none", "identity", "jitter", "randaugment", "auto"]},
  "randaugment": {"J": 0, "M": 12},
  "policy": {"K": 3, "J": 1},
  "metrics": {"augmentations": [{"op": "identity"}, {"op": "jitter", "level": 9}, {"op": "scale", "params": {"sigma": 0.3}}]},
  "sweep": {"J_values": [0, 2], "M_values": [6]}
})";

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    config_ = dir_ / "cfg.json";
    spit(config_, kSmallConfig);
    setenv("TSAUG_LOG", "off", 1);
  }

  int cmd(const std::string& name, const std::string& out, const std::vector<std::string>& extra = {}) {
    std::vector<std::string> args{name, "--config", config_.string(), "--out", (dir_ / out).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  }

  TempDir dir_;
  std::filesystem::path config_;
};

TEST_F(CliTest, ParseErrorsExitTwo) {
  EXPECT_EQ(run(std::vector<std::string>{}), 2);
  EXPECT_EQ(run({"grid"}), 2);
  EXPECT_EQ(run({"no-such-command"}), 2);
  EXPECT_EQ(run({"grid", "--config", (dir_ / "missing.json").string()}), 2);
  EXPECT_EQ(run({"grid", "--config", config_.string(), "--threads", "0"}), 2);
}

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(run({"--help"}), 0); }

TEST_F(CliTest, BadConfigsExitTwo) {
  const auto bad = dir_ / "bad.json";
  spit(bad, R"({"version": 1, "sead": 3})");
  EXPECT_EQ(run({"grid", "--config", bad.string()}), 2);
  spit(bad, R"({"seed": 3})");
  EXPECT_EQ(run({"grid", "--config", bad.string()}), 2);
  spit(bad, R"({"version": 1, "grid": {"augmentations": ["jiggle"]}})");
  EXPECT_EQ(run({"grid", "--config", bad.string()}), 2);
  spit(bad, R"({"version": 1, "randaugment": {"J": 2, "M": 31}})");
  EXPECT_EQ(run({"grid", "--config", bad.string()}), 2);
  spit(bad, R"({"version": 1, "train": {"batch_size": 0}})");
  EXPECT_EQ(run({"grid", "--config", bad.string()}), 2);
  spit(bad, R"({"version": 1, "dataset": {"manifest": "nowhere.json"}})");
  EXPECT_EQ(run({"grid", "--config", bad.string(), "--out", (dir_ / "o").string()}), 2);
  spit(bad, "{ not json");
  EXPECT_EQ(run({"grid", "--config", bad.string()}), 2);
}

TEST_F(CliTest, NonFiniteTrainingExitsThree) {
  const auto cfg = dir_ / "nan.json";
  spit(cfg, R"({"version": 1, "repeats": 1, "dataset": {"synthetic": {"length": 16, "samples_per_class": 10}},
               "train": {"lr0": 1e300, "epochs": 2, "batch_size": 4}, "backbones": ["mlp"],
               "policy": {"K": 2, "J": 1}})");
  EXPECT_EQ(run({"search", "--config", cfg.string(), "--out", (dir_ / "o").string()}), 3);
}

TEST_F(CliTest, GridCellFailuresAreRecordedAndTheGridContinues) {
  const auto cfg = dir_ / "nan.json";
  spit(cfg, R"({"version": 1, "repeats": 1, "dataset": {"synthetic": {"length": 16, "samples_per_class": 10}},
               "train": {"lr0": 1e300, "epochs": 2, "batch_size": 4}, "backbones": ["mlp"],
               "grid": {"augmentations": ["none", "rotate"]}})");
  ASSERT_EQ(run({"grid", "--config", cfg.string(), "--out", (dir_ / "o").string()}), 0);
  const auto rows = csv_rows(slurp(dir_ / "o" / "grid_seed0.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][2], "nan");
  EXPECT_EQ(csv_rows(slurp(dir_ / "o" / "grid_failures_seed0.csv")).size(), 3u);
}

TEST_F(CliTest, GridIsThreadIndependentAndRerunsAreByteIdentical) {
  ASSERT_EQ(cmd("grid", "a", {"--threads", "1"}), 0);
  ASSERT_EQ(cmd("grid", "b", {"--threads", "8"}), 0);
  ASSERT_EQ(cmd("grid", "c", {"--threads", "1"}), 0);
  const auto a = slurp(dir_ / "a" / "grid_seed3.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir_ / "b" / "grid_seed3.csv"));
  EXPECT_EQ(a, slurp(dir_ / "c" / "grid_seed3.csv"));
}

TEST_F(CliTest, GridRowsAndBaselines) {
  ASSERT_EQ(cmd("grid", "g"), 0);
  const auto text = slurp(dir_ / "g" / "grid_seed3.csv");
  EXPECT_EQ(text.rfind("# config_hash=", 0), 0u);
  const auto rows = csv_rows(text);
  ASSERT_EQ(rows.size(), 1u + 2 * 5);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"backbone", "augmentation", "mean_acc", "std_acc", "seeds"}));
  for (std::size_t b = 0; b < 2; ++b) {
    const auto& none = rows[1 + 5 * b];
    const auto& identity = rows[2 + 5 * b];
    const auto& rand_j0 = rows[4 + 5 * b];
    EXPECT_EQ(none[1], "none");
    EXPECT_EQ(identity[1], "identity");
    EXPECT_EQ(rand_j0[1], "randaugment");
    EXPECT_EQ(none[2], identity[2]);
    EXPECT_EQ(none[3], identity[3]);
    EXPECT_EQ(none[2], rand_j0[2]);
    EXPECT_EQ(none[4], "3;4");
  }
}

TEST_F(CliTest, DefaultGridHasEighteenRows) {
  const auto cfg = dir_ / "default.json";
  spit(cfg, R"({"version": 1, "repeats": 1,
               "dataset": {"synthetic": {"length": 16, "samples_per_class": 10}},
               "train": {"epochs": 1, "batch_size": 6}})");
  ASSERT_EQ(run({"grid", "--config", cfg.string(), "--out", (dir_ / "d").string()}), 0);
  const auto rows = csv_rows(slurp(dir_ / "d" / "grid_seed0.csv"));
  ASSERT_EQ(rows.size(), 19u);
  EXPECT_EQ(rows[1][0], "mlp");
  EXPECT_EQ(rows[10][0], "conv1d");
}

TEST_F(CliTest, SweepJZeroMatchesNoAugmentation) {
  ASSERT_EQ(cmd("grid", "g"), 0);
  ASSERT_EQ(cmd("sweep-jm", "s", {"--threads", "3"}), 0);
  const auto grid = csv_rows(slurp(dir_ / "g" / "grid_seed3.csv"));
  const auto sweep = csv_rows(slurp(dir_ / "s" / "sweep_jm_seed3.csv"));
  ASSERT_EQ(sweep.size(), 1u + 2 * 3);
  EXPECT_EQ(sweep[0], (std::vector<std::string>{"sweep", "backbone", "J", "M", "mean_acc", "std_acc", "seeds"}));
  EXPECT_EQ(sweep[1][2], "0");
  EXPECT_EQ(sweep[1][4], grid[1][2]);
  EXPECT_EQ(sweep[4][2], "0");
  EXPECT_EQ(sweep[4][4], grid[6][2]);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "s" / "sweep_J_seed3.svg"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "s" / "sweep_M_seed3.svg"));
}

TEST_F(CliTest, MetricsThreadIndependentWithIdentityAnchor) {
  ASSERT_EQ(cmd("metrics", "a", {"--threads", "1"}), 0);
  ASSERT_EQ(cmd("metrics", "b", {"--threads", "8"}), 0);
  const auto a = slurp(dir_ / "a" / "metrics_seed3.csv");
  EXPECT_EQ(a, slurp(dir_ / "b" / "metrics_seed3.csv"));
  const auto rows = csv_rows(a);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"aug_name", "params", "affinity", "diversity", "acc_delta", "seed"}));
  EXPECT_EQ(rows[1], (std::vector<std::string>{"identity", "", "1", "1", "0", "3;4"}));
  EXPECT_EQ(rows[2][1], "level=9");
  EXPECT_EQ(rows[3][1], "sigma=0.3");
  EXPECT_TRUE(std::filesystem::exists(dir_ / "a" / "metrics_seed3.svg"));
}

TEST_F(CliTest, SearchWritesPolicyAndTrajectoryPerSeed) {
  ASSERT_EQ(cmd("search", "a"), 0);
  ASSERT_EQ(cmd("search", "b", {"--threads", "4"}), 0);
  for (const char* seed : {"3", "4"}) {
    const auto policy = dir_ / "a" / ("policy_seed" + std::string(seed) + ".json");
    ASSERT_TRUE(std::filesystem::exists(policy));
    EXPECT_EQ(slurp(policy), slurp(dir_ / "b" / policy.filename()));
    const auto j = nlohmann::json::parse(slurp(policy));
    EXPECT_EQ(j.at("seed").get<int>(), std::stoi(seed));
    EXPECT_EQ(j.at("config_hash").get<std::string>().size(), 16u);
    const auto p = tsaug::Policy::from_json(j.at("policy"));
    EXPECT_EQ(p.size(), 3u);
    const auto traj = csv_rows(slurp(dir_ / "a" / ("trajectory_seed" + std::string(seed) + ".csv")));
    EXPECT_EQ(traj.size(), 1u + 3 * 3);
    EXPECT_TRUE(std::filesystem::exists(dir_ / "a" / ("trajectory_seed" + std::string(seed) + ".svg")));
  }
}

TEST_F(CliTest, SeedOverrideChangesHashAndFileNames) {
  ASSERT_EQ(cmd("metrics", "a", {"--seed", "11", "--repeats", "1"}), 0);
  const auto text = slurp(dir_ / "a" / "metrics_seed11.csv");
  EXPECT_NE(text.find("seed=11"), std::string::npos);
  EXPECT_EQ(csv_rows(text)[1].back(), "11");
}

TEST(RunConfig, HashIgnoresOutAndThreads) {
  auto j = nlohmann::json::parse(kSmallConfig);
  const auto base = tsaug::cli::RunConfig::from_json(j).hash();
  j["out"] = "elsewhere";
  j["threads"] = 8;
  EXPECT_EQ(tsaug::cli::RunConfig::from_json(j).hash(), base);
  j["seed"] = 4;
  EXPECT_NE(tsaug::cli::RunConfig::from_json(j).hash(), base);
  j["seed"] = 3;
  j["train"]["epochs"] = 3;
  EXPECT_NE(tsaug::cli::RunConfig::from_json(j).hash(), base);
}

TEST(RunConfig, DefaultsAndSeeds) {
  const auto c = tsaug::cli::RunConfig::from_json({{"version", 1}, {"seed", 10}});
  EXPECT_EQ(c.repeats, 3);
  EXPECT_EQ(c.seeds(), (std::vector<std::uint64_t>{10, 11, 12}));
  EXPECT_EQ(c.grid_augmentations.size(), 9u);
  EXPECT_EQ(c.backbones.size(), 2u);
  EXPECT_EQ(c.policy.search.policy_lr, 0.05);
  EXPECT_EQ(c.metric_augmentations(tsaug::MagnitudeTable::builtin()).size(), 65u);
}

TEST(RunConfig, RejectsUnknownNestedKeys) {
  for (const char* text : {R"({"version": 1, "train": {"lr": 0.1}})", R"({"version": 1, "policy": {"k": 2}})",
                           R"({"version": 1, "sweep": {"J": [1]}})",
                           R"({"version": 1, "metrics": {"augmentations": [{"op": "jitter", "lvl": 3}]}})",
                           R"({"version": 1, "dataset": {"synthetic": {"kind": "sine-vs-frequency", "len": 8}}})",
                           R"({"version": 2})"}) {
    EXPECT_THROW(tsaug::cli::RunConfig::from_json(nlohmann::json::parse(text)), tsaug::ValidationError) << text;
  }
}

class AugmentCommand : public ::testing::Test {
 protected:
  void SetUp() override {
    setenv("TSAUG_LOG", "off", 1);
    std::mt19937_64 gen(5);
    std::vector<tsaug::TimeSeries> xs;
    for (int i = 0; i < 6; ++i) xs.push_back(fixture::random_series(gen, 20, 2, i % 2));
    input_ = tsaug::Dataset(xs, 2);
    tsaug::save_csv(input_, dir_ / "in.csv");
  }

  tsaug::Dataset output(const std::string& name) { return tsaug::load_csv(dir_ / name, {}); }

  TempDir dir_;
  tsaug::Dataset input_{{}, 1};
};

TEST_F(AugmentCommand, RotateNegatesEverySample) {
  ASSERT_EQ(run({"augment", "--input", (dir_ / "in.csv").string(), "--output", (dir_ / "out.csv").string(), "--op",
                 "rotate", "--seed", "1", "--svg", (dir_ / "o.svg").string()}),
            0);
  const auto out = output("out.csv");
  ASSERT_EQ(out.size(), input_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].label(), input_[i].label());
    for (std::size_t k = 0; k < out[i].values().size(); ++k) EXPECT_EQ(out[i].values()[k], -input_[i].values()[k]);
  }
  EXPECT_NE(slurp(dir_ / "o.svg").find("<svg"), std::string::npos);
}

TEST_F(AugmentCommand, JitterAtLevelZeroIsIdentity) {
  ASSERT_EQ(run({"augment", "--input", (dir_ / "in.csv").string(), "--output", (dir_ / "out.csv").string(), "--op",
                 "jitter", "--level", "0", "--seed", "9"}),
            0);
  EXPECT_EQ(output("out.csv"), input_);
}

TEST_F(AugmentCommand, SameSeedSameBytes) {
  for (const char* name : {"a.csv", "b.csv"}) {
    ASSERT_EQ(run({"augment", "--input", (dir_ / "in.csv").string(), "--output", (dir_ / name).string(), "--op",
                   "timewarp", "--sigma", "0.3", "--knots", "5", "--seed", "4"}),
              0);
  }
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  EXPECT_NE(output("a.csv"), input_);
}

TEST_F(AugmentCommand, RandAugmentWithZeroOpsIsIdentity) {
  ASSERT_EQ(run({"randaug", "--input", (dir_ / "in.csv").string(), "--output", (dir_ / "out.csv").string(), "-J", "0",
                 "-M", "20", "--seed", "2"}),
            0);
  EXPECT_EQ(output("out.csv"), input_);
}

TEST_F(AugmentCommand, InvalidArgumentsExitTwo) {
  const auto in = (dir_ / "in.csv").string();
  const auto out = (dir_ / "out.csv").string();
  EXPECT_EQ(run({"augment", "--input", in, "--output", out, "--op", "shuffle"}), 2);
  EXPECT_EQ(run({"augment", "--input", in, "--output", out, "--op", "jitter", "--level", "31"}), 2);
  EXPECT_EQ(run({"augment", "--input", in, "--output", out, "--op", "jitter", "--level", "3", "--sigma", "1"}), 2);
  EXPECT_EQ(run({"augment", "--input", in, "--output", out, "--op", "jitter", "--sigma", "-1", "--seed", "1"}), 2);
  EXPECT_EQ(run({"augment", "--input", (dir_ / "none.csv").string(), "--output", out, "--op", "rotate"}), 2);
  EXPECT_EQ(run({"randaug", "--input", in, "--output", out, "-J", "11"}), 2);
}

TEST(GenSynthetic, WritesLoadableManifest) {
  setenv("TSAUG_LOG", "off", 1);
  TempDir dir;
  ASSERT_EQ(run({"gen-synthetic", "--kind", "trend-vs-flat", "--length", "12", "--channels", "2",
                 "--samples-per-class", "10", "--seed", "3", "--out", dir.path().string(), "--name", "tf"}),
            0);
  const auto splits = tsaug::load_dataset(tsaug::DatasetManifest::load(dir / "tf.json"));
  EXPECT_EQ(splits.train.size() + splits.val.size() + splits.test.size(), 20u);
  EXPECT_EQ(splits.train.length(), 12u);
  EXPECT_EQ(splits.train.channels(), 2u);
  EXPECT_EQ(run({"gen-synthetic", "--kind", "square", "--out", dir.path().string()}), 2);
}

}  // namespace
