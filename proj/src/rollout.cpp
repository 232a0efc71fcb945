#include "eapo/rollout.hpp"

#include <cmath>

#include <fmt/format.h>

#include "eapo/errors.hpp"

namespace eapo {

void validate(const Prompt& prompt) {
  if (prompt.question.empty()) {
    throw ConfigError(fmt::format("prompt '{}': empty question", prompt.id));
  }
  if (prompt.reference.empty()) {
    throw ConfigError(fmt::format("prompt '{}': empty reference", prompt.id));
  }
}

std::string response_text(const std::vector<TokenId>& tokens) {
  std::span<const TokenId> body(tokens);
  if (!body.empty() && body.back() == tok::kEos) body = body.first(body.size() - 1);
  return vocab().decode(body);
}

Rollout::Rollout(std::vector<TokenId> prefix, std::vector<TokenId> tokens,
                 std::vector<double> old_logprobs, std::vector<double> step_entropies)
    : prefix_(std::move(prefix)),
      tokens_(std::move(tokens)),
      old_logprobs_(std::move(old_logprobs)),
      step_entropies_(std::move(step_entropies)) {
  if (old_logprobs_.size() != tokens_.size() || step_entropies_.size() != tokens_.size()) {
    throw InputError(fmt::format("rollout: {} tokens but {} logprobs and {} entropies",
                                 tokens_.size(), old_logprobs_.size(), step_entropies_.size()));
  }
  const double max_entropy = std::log(static_cast<double>(kVocabSize)) + 1e-9;
  for (std::size_t t = 0; t < tokens_.size(); ++t) {
    if (!(old_logprobs_[t] <= 0.0)) {
      throw InputError(fmt::format("rollout: logprob {} at position {} is not <= 0",
                                   old_logprobs_[t], t));
    }
    if (!(step_entropies_[t] >= 0.0 && step_entropies_[t] <= max_entropy)) {
      throw InputError(fmt::format("rollout: entropy {} at position {} outside [0, ln V]",
                                   step_entropies_[t], t));
    }
  }
  text_ = response_text(tokens_);
}

RewardBreakdown make_breakdown(double fmt, double rouge, double rerank, double judge,
                               const RewardWeights& weights) {
  RewardBreakdown b{fmt, rouge, rerank, judge, weights, 0.0};
  b.total = b.weighted_sum();
  return b;
}

RolloutGroup::RolloutGroup(Prompt prompt, std::vector<Rollout> rollouts,
                           std::vector<RewardBreakdown> rewards, double mean_reward,
                           double std_reward, std::vector<Label> labels,
                           std::vector<double> advantages, std::vector<double> shaped_advantages)
    : prompt_(std::move(prompt)),
      rollouts_(std::move(rollouts)),
      rewards_(std::move(rewards)),
      mean_reward_(mean_reward),
      std_reward_(std_reward),
      labels_(std::move(labels)),
      advantages_(std::move(advantages)),
      shaped_advantages_(std::move(shaped_advantages)) {
  const std::size_t n = rollouts_.size();
  if (n < 2) throw ConfigError(fmt::format("rollout group needs N >= 2, got {}", n));
  if (rewards_.size() != n || labels_.size() != n || advantages_.size() != n ||
      shaped_advantages_.size() != n) {
    throw ConfigError("rollout group: per-rollout vectors differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = rewards_[i].total >= mean_reward_;
    if (positive != (labels_[i] == Label::kPositive)) {
      throw ConfigError(fmt::format("rollout group: label {} disagrees with reward-mean partition", i));
    }
  }
}

}  // namespace eapo
