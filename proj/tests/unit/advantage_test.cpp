#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "eapo/advantage.hpp"
#include "eapo/errors.hpp"

namespace eapo {
namespace {

TEST(Advantage, EqualRewardsGiveZero) {
  const std::vector<double> r(5, 0.37);
  for (double a : normalize_advantages(r, 1e-8)) EXPECT_EQ(a, 0.0);
  const auto s = group_statistics(r);
  EXPECT_EQ(s.mean, 0.37);
  EXPECT_EQ(s.std, 0.0);
}

TEST(Advantage, TwoRewards) {
  const auto a = normalize_advantages(std::vector<double>{0.0, 1.0}, 0.0);
  EXPECT_DOUBLE_EQ(a[0], -1.0);
  EXPECT_DOUBLE_EQ(a[1], 1.0);
  const auto b = normalize_advantages(std::vector<double>{0.0, 1.0}, 1e-8);
  EXPECT_NEAR(b[1], 1.0, 1e-7);
}

TEST(Advantage, FourRewards) {
  const std::vector<double> r{0.2, 0.4, 0.6, 0.8};
  const double sigma = std::sqrt((0.09 + 0.01 + 0.01 + 0.09) / 4.0);
  EXPECT_NEAR(sigma, std::sqrt(0.05), 1e-15);
  const auto a = normalize_advantages(r, 1e-8);
  const std::vector<double> expect{-0.3 / sigma, -0.1 / sigma, 0.1 / sigma, 0.3 / sigma};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(a[i], expect[i], 1e-6);
  EXPECT_NEAR(a[0], -1.3416, 1e-4);
  EXPECT_NEAR(a[1], -0.4472, 1e-4);
}

TEST(Advantage, Errors) {
  EXPECT_THROW(normalize_advantages(std::vector<double>{1.0}, 1e-8), ConfigError);
  EXPECT_THROW(normalize_advantages(std::vector<double>{1.0, 2.0}, -1.0), ConfigError);
}

TEST(Advantage, MeanZeroWithoutEps) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> r(2 + rep % 15);
    for (auto& x : r) x = u(rng);
    const auto a = normalize_advantages(r, 0.0);
    EXPECT_NEAR(std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size()), 0.0, 1e-12);
  }
}

TEST(Partition, Examples) {
  const auto p = partition(std::vector<double>{0.2, 0.4, 0.6, 0.8});
  EXPECT_EQ(p.positive(), (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(p.negative(), (std::vector<std::size_t>{0, 1}));
  const auto q = partition(std::vector<double>{0.0, 0.0, 1.0});
  EXPECT_EQ(q.positive(), (std::vector<std::size_t>{2}));
  EXPECT_EQ(q.negative(), (std::vector<std::size_t>{0, 1}));
  const auto e = partition(std::vector<double>{0.5, 0.5, 0.5});
  EXPECT_EQ(e.positive().size(), 3u);
  EXPECT_TRUE(e.negative().empty());
}

TEST(Partition, TiesAtMeanArePositive) {
  const auto p = partition(std::vector<double>{0.0, 0.5, 1.0});
  EXPECT_EQ(p.labels[1], Label::kPositive);
}

TEST(Partition, ExtremeMagnitudesKeepMaxPositive) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 2000; ++rep) {
    std::vector<double> r(2 + rep % 15);
    const double scale = std::pow(10.0, (rep % 30) - 15);
    for (auto& x : r) x = 1e6 + scale * u(rng);
    const auto p = partition(r);
    const auto top = std::max_element(r.begin(), r.end()) - r.begin();
    EXPECT_EQ(p.labels[top], Label::kPositive);
  }
}

TEST(Shape, Examples) {
  const std::vector<double> a{-1.0, 1.0};
  const auto part = partition(std::vector<double>{0.0, 1.0});
  EXPECT_EQ(shape(a, part, 1.0, 1.0), a);
  const auto psr = shape(a, part, 1.0, 0.0);
  EXPECT_EQ(psr[0], 0.0);
  EXPECT_EQ(psr[1], 1.0);

  const std::vector<double> b{-1.5, 0.5, 1.0};
  Partition p3{{Label::kNegative, Label::kPositive, Label::kPositive}};
  const auto s = shape(b, p3, 0.2, 1.0);
  EXPECT_DOUBLE_EQ(s[0], -1.5);
  EXPECT_DOUBLE_EQ(s[1], 0.1);
  EXPECT_DOUBLE_EQ(s[2], 0.2);
}

TEST(Shape, ScaleAndSignProperties) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> r(2 + rep % 10);
    for (auto& x : r) x = u(rng);
    const auto a = normalize_advantages(r, 1e-8);
    const auto p = partition(r);
    const double wp = 3 * u(rng), wn = 3 * u(rng), c = 4 * u(rng);
    const auto base = shape(a, p, wp, wn);
    const auto scaled = shape(a, p, c * wp, c * wn);
    const auto psr = shape(a, p, 1.0, 0.0);
    const auto nsr = shape(a, p, 0.0, 1.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(scaled[i], c * base[i], 1e-12 * (1 + std::abs(c * base[i])));
      EXPECT_GE(psr[i], 0.0);
      EXPECT_LE(nsr[i], 0.0);
      if (base[i] != 0.0) { EXPECT_EQ(std::signbit(base[i]), std::signbit(a[i])); }
    }
  }
}

TEST(Shape, RejectsNegativeWeights) {
  const auto p = partition(std::vector<double>{0.0, 1.0});
  EXPECT_THROW(shape(std::vector<double>{-1, 1}, p, -0.1, 1.0), ConfigError);
}

TEST(Strategy, PresetsAndNames) {
  EXPECT_EQ(ShapingStrategy::psr().resolve(1, 1).w_neg, 0.0);
  EXPECT_EQ(ShapingStrategy::nsr().resolve(1, 1).w_pos, 0.0);
  const auto wr = ShapingStrategy::w_reinforce().resolve(1, 1);
  EXPECT_DOUBLE_EQ(wr.w_pos, 0.1);
  EXPECT_DOUBLE_EQ(wr.w_neg, 1.0);
  const auto e = ShapingStrategy::adaptive({}).resolve(2.0, 1.0);
  EXPECT_DOUBLE_EQ(e.w_pos, 0.1);
  EXPECT_DOUBLE_EQ(e.w_neg, 1.0);
  for (auto k : {StrategyKind::kGrpo, StrategyKind::kPsr, StrategyKind::kNsr, StrategyKind::kFixed,
                 StrategyKind::kEapo}) {
    EXPECT_EQ(parse_strategy_kind(strategy_name(k)), k);
  }
  EXPECT_THROW(parse_strategy_kind("ppo"), ConfigError);
}

}  // namespace
}  // namespace eapo
