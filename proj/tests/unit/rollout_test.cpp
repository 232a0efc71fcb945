#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "eapo/advantage.hpp"
#include "eapo/dataset.hpp"
#include "eapo/errors.hpp"
#include "eapo/vocab.hpp"
#include "fixtures.hpp"

namespace eapo {
namespace {

using testing::group_with_rewards;
using testing::noisy_policy;
using testing::toy_prompt;

TEST(Vocab, EmptyDecodesToEmpty) {
  EXPECT_EQ(vocab().decode({}), "");
}

TEST(Vocab, TagsConcatenate) {
  const std::vector<TokenId> ids{tok::kThinkOpen, Vocabulary::symbol(0), tok::kThinkClose};
  EXPECT_EQ(vocab().decode(ids), "<think>a</think>");
}

TEST(Vocab, RandomSequencesRoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(0, tok::kEos - 1);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<TokenId> ids;
    for (int i = 0; i < 10; ++i) ids.push_back(static_cast<TokenId>(pick(rng)));
    EXPECT_EQ(vocab().encode(vocab().decode(ids)), ids);
  }
}

TEST(Vocab, OutOfRangeIdIsInputError) {
  const std::vector<TokenId> ids{static_cast<TokenId>(kVocabSize)};
  EXPECT_THROW(vocab().decode(ids), InputError);
}

TEST(Vocab, Layout) {
  EXPECT_EQ(vocab().size(), 36u);
  EXPECT_TRUE(Vocabulary::is_symbol(Vocabulary::symbol(29)));
  EXPECT_FALSE(Vocabulary::is_symbol(tok::kEos));
  EXPECT_FALSE(Vocabulary::is_symbol(tok::kAdviceClose));
}

TEST(Rollout, RejectsMismatchedBookkeeping) {
  EXPECT_THROW(Rollout({}, {4, 5}, {-0.1}, {0.1, 0.1}), InputError);
  EXPECT_THROW(Rollout({}, {4}, {0.5}, {0.1}), InputError);
  EXPECT_THROW(Rollout({}, {4}, {-0.5}, {9.0}), InputError);
}

TEST(Rollout, TextDropsEndOfSequence) {
  Rollout r({}, {tok::kThinkOpen, Vocabulary::symbol(1), tok::kEos}, {-1, -1, -1}, {1, 1, 1});
  EXPECT_EQ(r.text(), "<think>b");
  EXPECT_EQ(r.length(), 3u);
}

TEST(RolloutGroup, NeedsTwoRollouts) {
  const auto policy = noisy_policy(2, 1.0, 3);
  auto one = sample_responses(policy, toy_prompt(), 1, 8, 5);
  std::vector<RewardBreakdown> b{testing::scalar_reward(0.5)};
  EXPECT_THROW(assemble_group(toy_prompt(), one, b, 1e-8, {}), ConfigError);
}

TEST(RolloutGroup, RandomRewardsPartitionAndSign) {
  const auto policy = noisy_policy(2, 1.0, 3);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rep % 7;
    std::vector<double> rewards(n);
    for (auto& r : rewards) r = u(rng);
    auto g = group_with_rewards(toy_prompt(), sample_rollouts(policy, toy_prompt(), n, 6, rep),
                                rewards, {1.0, 1.0});
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (g.labels()[i] == Label::kPositive) {
        ++pos;
        EXPECT_GE(g.advantages()[i], 0.0);
      } else {
        EXPECT_LT(g.advantages()[i], 0.0);
      }
    }
    EXPECT_GE(pos, 1u);
  }
}

TEST(RolloutGroup, EqualRewardsAreFlatAndPositive) {
  const auto policy = noisy_policy(2, 1.0, 3);
  std::vector<RewardBreakdown> b(4, testing::scalar_reward(0.3));
  auto a = assemble_group(toy_prompt(), sample_rollouts(policy, toy_prompt(), 4, 6, 1), b, 1e-8,
                          {1.0, 1.0});
  EXPECT_TRUE(a.flat);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a.group.labels()[i], Label::kPositive);
    EXPECT_EQ(a.group.advantages()[i], 0.0);
  }
}

TEST(Dataset, ReadsAndIgnoresUnknownFields) {
  std::istringstream in(
      "{\"id\":\"a\",\"question\":\"q1\",\"answer\":\"r1\",\"extra\":3}\n"
      "\n"
      "{\"id\":\"b\",\"question\":\"q2\",\"answer\":\"r2\"}\n");
  const auto p = read_jsonl(in);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[1].id, "b");
  EXPECT_EQ(p[1].reference, "r2");
}

void expect_line_error(const std::string& text, const std::string& needle) {
  std::istringstream in(text);
  try {
    read_jsonl(in);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

TEST(Dataset, ErrorsNameTheLine) {
  const std::string ok = "{\"id\":\"a\",\"question\":\"q\",\"answer\":\"r\"}\n";
  expect_line_error(ok + "{\"id\":\"b\",\"question\":\"q\"}\n", "line 2");
  expect_line_error(ok + "\n{\"id\":\"b\",\"question\":\"q\",\"answer\":5}\n", "line 3");
  expect_line_error("not json\n", "line 1");
  expect_line_error(ok + ok, "duplicate");
}

TEST(Dataset, WriteReadRoundTrip) {
  std::vector<Prompt> p{{"x", "reverse: ab", "<think>ab</think><advice>ba</advice>"},
                        {"y", "q \"quoted\"", "r\nmultiline"}};
  std::stringstream ss;
  write_jsonl(ss, p);
  const auto back = read_jsonl(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].question, p[1].question);
  EXPECT_EQ(back[1].reference, p[1].reference);
}

TEST(Dataset, MissingFileIsInputError) {
  EXPECT_THROW(load_jsonl("/nonexistent/eapo.jsonl"), InputError);
}

}  // namespace
}  // namespace eapo
