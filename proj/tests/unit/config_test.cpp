#include <gtest/gtest.h>

#include "eapo/config.hpp"
#include "eapo/errors.hpp"
#include "fixtures.hpp"

namespace eapo {
namespace {

using nlohmann::json;

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsRoundTrip) {
  const RunConfig d;
  const auto doc = config_to_json(d);
  const auto back = config_from_json(json::parse(doc.dump()));
  EXPECT_EQ(config_to_json(back).dump(), doc.dump());
  EXPECT_EQ(doc["strategy"], "grpo");
  EXPECT_EQ(doc["train"]["steps"], nullptr);
  EXPECT_EQ(doc["reward"]["alpha"]["judge"], 0.25);
}

TEST(Config, PartialDocumentMergesOntoDefaults) {
  const auto c = config_from_json(json::parse(R"({"strategy":"eapo","train":{"steps":40},"eapo":{"w0":0.3}})"));
  EXPECT_EQ(c.train.strategy.kind, StrategyKind::kEapo);
  EXPECT_DOUBLE_EQ(c.train.strategy.eapo.w0, 0.3);
  EXPECT_EQ(*c.train.steps, 40u);
  EXPECT_EQ(c.train.batch_prompts, 32u);
}

TEST(Config, FixedWeightsAndWReinforce) {
  auto c = config_from_json(json::parse(R"({"strategy":"fixed","weights":{"w_pos":0.2,"w_neg":1}})"));
  EXPECT_EQ(c.train.strategy.kind, StrategyKind::kFixed);
  EXPECT_DOUBLE_EQ(c.train.strategy.fixed.w_pos, 0.2);
  c = config_from_json(json::parse(R"({"strategy":"w-reinforce"})"));
  EXPECT_EQ(c.train.strategy.kind, StrategyKind::kFixed);
  EXPECT_DOUBLE_EQ(c.train.strategy.fixed.w_pos, 0.1);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(error_of([] { config_from_json(json::parse(R"({"train":{"lr":1}})")); }).find("train.lr"),
            std::string::npos);
  EXPECT_NE(error_of([] { config_from_json(json::parse(R"({"train":{"batch_prompts":"x"}})")); })
                .find("train.batch_prompts"),
            std::string::npos);
  EXPECT_NE(error_of([] { config_from_json(json::parse(R"({"train":{"rollouts_per_prompt":1}})")); }),
            "");
  EXPECT_NE(error_of([] { config_from_json(json::parse(R"({"strategy":"ppo"})")); }), "");
}

TEST(Config, Overrides) {
  auto doc = config_to_json(RunConfig{});
  apply_override(doc, "train.learning_rate=0.1");
  apply_override(doc, "strategy=nsr");
  apply_override(doc, "eval.ks=[1,2]");
  const auto c = config_from_json(doc);
  EXPECT_DOUBLE_EQ(c.train.learning_rate, 0.1);
  EXPECT_EQ(c.train.strategy.kind, StrategyKind::kNsr);
  EXPECT_EQ(c.eval.ks, (std::vector<std::size_t>{1, 2}));
  EXPECT_THROW(apply_override(doc, "train.nope=1"), ConfigError);
  EXPECT_THROW(apply_override(doc, "no-equals-sign"), ConfigError);
}

TEST(Config, ApiKeysRedacted) {
  RunConfig c;
  c.train.reward.judge_endpoint.api_key = "topsecret";
  EXPECT_EQ(config_to_json(c)["reward"]["judge_endpoint"]["api_key"], "topsecret");
  EXPECT_EQ(config_to_json(c, true).dump().find("topsecret"), std::string::npos);
}

TEST(Grid, Parse) {
  const auto g = parse_grid("(1,0),(0.5, 2)");
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[1].w_pos, 0.5);
  EXPECT_EQ(g[1].w_neg, 2.0);
  EXPECT_EQ(parse_grid("(1,1)").size(), 1u);
  for (const char* bad : {"", "(1,)", "(1,1),", "1,1", "(-1,1)", "(a,b)", "(1,1)(2,2)"}) {
    EXPECT_THROW(parse_grid(bad), ConfigError) << bad;
  }
}

TEST(Grid, PaperGrid) {
  const auto& g = paper_grid();
  ASSERT_EQ(g.size(), 11u);
  EXPECT_EQ(parse_grid("paper-grid").size(), 11u);
  bool has_02_1 = false, has_1_5 = false;
  for (const auto& c : g) {
    has_02_1 |= c.w_pos == 0.2 && c.w_neg == 1.0;
    has_1_5 |= c.w_pos == 1.0 && c.w_neg == 5.0;
  }
  EXPECT_TRUE(has_02_1);
  EXPECT_TRUE(has_1_5);
}

TEST(Data, SyntheticOrFile) {
  DataConfig d;
  d.synthetic.count = 5;
  EXPECT_EQ(load_dataset(d).size(), 5u);
  d.dataset = "/nonexistent.jsonl";
  EXPECT_THROW(load_dataset(d), InputError);
}

}  // namespace
}  // namespace eapo
