#include <gtest/gtest.h>

#include <fstream>

#include "jamloc/config.hpp"
#include "test_util.hpp"

using namespace jamloc;
using nlohmann::json;
using jamloc::testing::scratch_dir;

TEST(Config, DefaultsRoundTrip) {
  const PipelineConfig d;
  const auto back = config_from_json(default_config_json());
  EXPECT_EQ(config_to_json(back), default_config_json());
  EXPECT_EQ(config_hash(back), config_hash(d));
  EXPECT_EQ(back.pretrain.epochs, 30);
  EXPECT_EQ(back.align.epochs, 40);
  EXPECT_EQ(back.finetune.epochs, 200);
  EXPECT_EQ(back.holdout_size, 3000u);
  EXPECT_EQ(back.tabular.knn_k, 5);
  EXPECT_EQ(back.cir_scaling, CirScaling::per_tap);
}

TEST(Config, PartialOverrideKeepsDefaults) {
  const auto c = config_from_json(json{{"seed", 4}, {"finetune", {{"epochs", 20}}}});
  EXPECT_EQ(c.seed, 4u);
  EXPECT_EQ(c.finetune.epochs, 20);
  EXPECT_EQ(c.finetune.weights.alpha.total_epochs, 20);
  EXPECT_DOUBLE_EQ(schedule_value(c.finetune.weights.alpha, 20), 0.1);
  EXPECT_EQ(c.pretrain.epochs, 30);
}

TEST(Config, ScheduleForms) {
  const auto c = config_from_json(
      json{{"align", {{"lambda", 0.3}, {"early_stop", nullptr}}},
           {"finetune", {{"alpha", {{"kind", "cosine_anneal"}, {"start", 1.0}, {"end", 0.0}}}}}});
  EXPECT_DOUBLE_EQ(schedule_value(c.align.weights.lambda, 10), 0.3);
  EXPECT_FALSE(c.align.early_stop.has_value());
  EXPECT_EQ(c.finetune.weights.alpha.kind, ScheduleKind::cosine_anneal);
}

TEST(Config, HashChangesWithContent) {
  PipelineConfig a, b;
  b.seed = 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, InvalidContentRejected) {
  EXPECT_THROW(config_from_json(json::array()), std::invalid_argument);
  EXPECT_THROW(config_from_json(json{{"pretrain", {{"epochs", 0}}}}), std::invalid_argument);
  EXPECT_THROW(config_from_json(json{{"cir_scaling", "global"}}), std::invalid_argument);
  EXPECT_THROW(config_from_json(json{{"seed", "seven"}}), std::invalid_argument);
  EXPECT_THROW(config_from_json(json{{"align", {{"early_stop", {{"metric", "loss"}}}}}}),
               std::invalid_argument);
}

TEST(Config, LoadFile) {
  const auto dir = scratch_dir("config");
  std::ofstream(dir / "run.json") << R"({"seed": 12, "mi_bins": 8})";
  const auto c = load_config(dir / "run.json");
  EXPECT_EQ(c.seed, 12u);
  EXPECT_EQ(c.mi_bins, 8);
  std::ofstream(dir / "bad.json") << "{seed: 12";
  EXPECT_THROW(load_config(dir / "bad.json"), std::invalid_argument);
  EXPECT_THROW(load_config(dir / "missing.json"), std::invalid_argument);
  EXPECT_EQ(config_hash(load_config({})), config_hash(PipelineConfig{}));
}

TEST(Config, BenchmarkSettings) {
  const auto c = benchmark_config(3, 640);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.holdout_size, 160u);
  EXPECT_EQ(c.cir_scaling, CirScaling::per_channel);
  EXPECT_EQ(c.finetune.weights.alpha.total_epochs, c.finetune.epochs);
  EXPECT_NO_THROW(c.pretrain.validate());
  EXPECT_NO_THROW(c.align.validate());
  EXPECT_NO_THROW(c.finetune.validate());
}
