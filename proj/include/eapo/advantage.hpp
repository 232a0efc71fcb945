#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eapo/eapo.hpp"
#include "eapo/rollout.hpp"

namespace eapo {

struct GroupStats {
  double mean = 0.0;
  double std = 0.0;  // population (1/N)
};

// Two-pass mean with a correction term, clamped to [min, max] so the largest
// reward is always >= the mean and equal rewards reproduce their value exactly.
GroupStats group_statistics(std::span<const double> rewards);

// A_i = (r_i - mean) / (std + eps). All zeros for a flat group.
// Throws ConfigError for N < 2 or eps < 0.
std::vector<double> normalize_advantages(std::span<const double> rewards, double eps);

struct Partition {
  std::vector<Label> labels;

  std::vector<std::size_t> positive() const;
  std::vector<std::size_t> negative() const;
};

// Index i is positive iff r_i >= mean (ties count as positive).
Partition partition(std::span<const double> rewards);

// w_pos * A_i on positives, w_neg * A_i on negatives.
std::vector<double> shape(std::span<const double> advantages, const Partition& part, double w_pos,
                          double w_neg);

enum class StrategyKind { kGrpo, kPsr, kNsr, kFixed, kEapo };

struct ShapingWeights {
  double w_pos = 1.0;
  double w_neg = 1.0;
};

struct ShapingStrategy {
  StrategyKind kind = StrategyKind::kGrpo;
  ShapingWeights fixed;  // used by kFixed
  EapoConfig eapo;       // used by kEapo

  static ShapingStrategy grpo() { return {StrategyKind::kGrpo, {1.0, 1.0}, {}}; }
  static ShapingStrategy psr() { return {StrategyKind::kPsr, {1.0, 0.0}, {}}; }
  static ShapingStrategy nsr() { return {StrategyKind::kNsr, {0.0, 1.0}, {}}; }
  static ShapingStrategy fixed_weights(double w_pos, double w_neg) {
    return {StrategyKind::kFixed, {w_pos, w_neg}, {}};
  }
  static ShapingStrategy w_reinforce() { return fixed_weights(0.1, 1.0); }
  static ShapingStrategy adaptive(EapoConfig cfg) { return {StrategyKind::kEapo, {}, cfg}; }

  void validate() const;

  // Weights for a step. EAPO needs h0 > 0 and this step's entropy.
  ShapingWeights resolve(double h0, double ht) const;
};

std::string_view strategy_name(StrategyKind kind);
StrategyKind parse_strategy_kind(std::string_view name);

struct AssembledGroup {
  RolloutGroup group;
  bool flat;  // std == 0: no policy gradient from this prompt
};

AssembledGroup assemble_group(Prompt prompt, std::vector<Rollout> rollouts,
                              std::vector<RewardBreakdown> rewards, double eps,
                              const ShapingWeights& weights);

}  // namespace eapo
