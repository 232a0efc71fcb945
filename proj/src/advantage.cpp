#include "eapo/advantage.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "eapo/errors.hpp"

namespace eapo {

GroupStats group_statistics(std::span<const double> rewards) {
  if (rewards.empty()) throw ConfigError("group statistics of an empty group");
  const auto n = static_cast<double>(rewards.size());
  double sum = 0.0;
  for (double r : rewards) sum += r;
  double mean = sum / n;
  double correction = 0.0;
  for (double r : rewards) correction += r - mean;
  mean += correction / n;
  const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  mean = std::clamp(mean, *lo, *hi);
  double sq = 0.0;
  for (double r : rewards) sq += (r - mean) * (r - mean);
  return {mean, std::sqrt(sq / n)};
}

std::vector<double> normalize_advantages(std::span<const double> rewards, double eps) {
  if (rewards.size() < 2) {
    throw ConfigError(fmt::format("advantages need a group of N >= 2, got {}", rewards.size()));
  }
  if (!(eps >= 0.0)) throw ConfigError(fmt::format("advantage eps must be >= 0, got {}", eps));
  const auto stats = group_statistics(rewards);
  std::vector<double> adv(rewards.size(), 0.0);
  if (stats.std == 0.0) return adv;
  const double denom = stats.std + eps;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - stats.mean) / denom;
  return adv;
}

std::vector<std::size_t> Partition::positive() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::kPositive) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Partition::negative() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::kNegative) out.push_back(i);
  }
  return out;
}

Partition partition(std::span<const double> rewards) {
  const auto stats = group_statistics(rewards);
  Partition p;
  p.labels.reserve(rewards.size());
  for (double r : rewards) p.labels.push_back(r >= stats.mean ? Label::kPositive : Label::kNegative);
  return p;
}

std::vector<double> shape(std::span<const double> advantages, const Partition& part, double w_pos,
                          double w_neg) {
  if (advantages.size() != part.labels.size()) {
    throw ConfigError("shape: advantages and partition differ in length");
  }
  if (!(w_pos >= 0.0) || !(w_neg >= 0.0)) {
    throw ConfigError(fmt::format("shape: weights must be >= 0, got ({}, {})", w_pos, w_neg));
  }
  std::vector<double> out(advantages.size());
  for (std::size_t i = 0; i < advantages.size(); ++i) {
    out[i] = (part.labels[i] == Label::kPositive ? w_pos : w_neg) * advantages[i];
  }
  return out;
}

void ShapingStrategy::validate() const {
  switch (kind) {
    case StrategyKind::kFixed:
      if (!(fixed.w_pos >= 0.0) || !(fixed.w_neg >= 0.0) || !std::isfinite(fixed.w_pos) ||
          !std::isfinite(fixed.w_neg)) {
        throw ConfigError(fmt::format("strategy fixed: weights must be finite and >= 0, got ({}, {})",
                                      fixed.w_pos, fixed.w_neg));
      }
      break;
    case StrategyKind::kEapo:
      eapo.validate();
      break;
    default:
      break;
  }
}

ShapingWeights ShapingStrategy::resolve(double h0, double ht) const {
  switch (kind) {
    case StrategyKind::kGrpo:
      return {1.0, 1.0};
    case StrategyKind::kPsr:
      return {1.0, 0.0};
    case StrategyKind::kNsr:
      return {0.0, 1.0};
    case StrategyKind::kFixed:
      return fixed;
    case StrategyKind::kEapo:
      return {dynamic_weight(h0, ht, eapo), eapo.w_neg};
  }
  throw ConfigError("unknown strategy");
}

std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kGrpo:
      return "grpo";
    case StrategyKind::kPsr:
      return "psr";
    case StrategyKind::kNsr:
      return "nsr";
    case StrategyKind::kFixed:
      return "fixed";
    case StrategyKind::kEapo:
      return "eapo";
  }
  return "?";
}

StrategyKind parse_strategy_kind(std::string_view name) {
  if (name == "grpo") return StrategyKind::kGrpo;
  if (name == "psr") return StrategyKind::kPsr;
  if (name == "nsr") return StrategyKind::kNsr;
  if (name == "fixed" || name == "w-reinforce") return StrategyKind::kFixed;
  if (name == "eapo") return StrategyKind::kEapo;
  throw ConfigError(
      fmt::format("unknown strategy '{}' (expected grpo|psr|nsr|fixed|w-reinforce|eapo)", name));
}

AssembledGroup assemble_group(Prompt prompt, std::vector<Rollout> rollouts,
                              std::vector<RewardBreakdown> rewards, double eps,
                              const ShapingWeights& weights) {
  if (rollouts.size() != rewards.size()) {
    throw ConfigError("assemble_group: rollouts and rewards differ in length");
  }
  std::vector<double> totals;
  totals.reserve(rewards.size());
  for (const auto& r : rewards) totals.push_back(r.total);
  const auto adv = normalize_advantages(totals, eps);
  const auto stats = group_statistics(totals);
  auto part = partition(totals);
  auto shaped = shape(adv, part, weights.w_pos, weights.w_neg);
  const bool flat = stats.std == 0.0;
  return {RolloutGroup(std::move(prompt), std::move(rollouts), std::move(rewards), stats.mean,
                       stats.std, std::move(part.labels), adv, std::move(shaped)),
          flat};
}

}  // namespace eapo
