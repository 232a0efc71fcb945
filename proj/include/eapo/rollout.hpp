#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "eapo/vocab.hpp"

namespace eapo {

struct Prompt {
  std::string id;
  std::string question;
  std::string reference;  // ground-truth response
};

// Throws ConfigError when question or reference is empty.
void validate(const Prompt& prompt);

// One sampled response. `prefix` is the context window the policy was
// conditioned on before the first generated token. When the response ended
// with end-of-sequence, that token is the last element of `tokens` and is
// excluded from `text`.
class Rollout {
 public:
  Rollout() = default;
  Rollout(std::vector<TokenId> prefix, std::vector<TokenId> tokens,
          std::vector<double> old_logprobs, std::vector<double> step_entropies);

  const std::vector<TokenId>& prefix() const { return prefix_; }
  const std::vector<TokenId>& tokens() const { return tokens_; }
  const std::string& text() const { return text_; }
  const std::vector<double>& old_logprobs() const { return old_logprobs_; }
  const std::vector<double>& step_entropies() const { return step_entropies_; }
  std::size_t length() const { return tokens_.size(); }

 private:
  std::vector<TokenId> prefix_;
  std::vector<TokenId> tokens_;
  std::string text_;
  std::vector<double> old_logprobs_;
  std::vector<double> step_entropies_;
};

// Decodes a generated token sequence to response text, dropping a trailing
// end-of-sequence token.
std::string response_text(const std::vector<TokenId>& tokens);

struct RewardWeights {
  std::array<double, 4> alpha{0.25, 0.25, 0.25, 0.25};  // fmt, rouge, rerank, judge
  double sum() const { return alpha[0] + alpha[1] + alpha[2] + alpha[3]; }
};

struct RewardBreakdown {
  double fmt = 0.0;
  double rouge = 0.0;
  double rerank = 0.0;
  double judge = 0.0;
  RewardWeights weights;
  double total = 0.0;

  double weighted_sum() const {
    return weights.alpha[0] * fmt + weights.alpha[1] * rouge + weights.alpha[2] * rerank +
           weights.alpha[3] * judge;
  }
};

RewardBreakdown make_breakdown(double fmt, double rouge, double rerank, double judge,
                               const RewardWeights& weights);

enum class Label { kPositive, kNegative };

// A prompt with its N >= 2 scored rollouts and derived advantages. Built by
// assemble_group() in advantage.hpp; the constructor checks every invariant.
class RolloutGroup {
 public:
  RolloutGroup(Prompt prompt, std::vector<Rollout> rollouts, std::vector<RewardBreakdown> rewards,
               double mean_reward, double std_reward, std::vector<Label> labels,
               std::vector<double> advantages, std::vector<double> shaped_advantages);

  const Prompt& prompt() const { return prompt_; }
  const std::vector<Rollout>& rollouts() const { return rollouts_; }
  const std::vector<RewardBreakdown>& rewards() const { return rewards_; }
  double mean_reward() const { return mean_reward_; }
  double std_reward() const { return std_reward_; }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<double>& advantages() const { return advantages_; }
  const std::vector<double>& shaped_advantages() const { return shaped_advantages_; }
  std::size_t size() const { return rollouts_.size(); }

 private:
  Prompt prompt_;
  std::vector<Rollout> rollouts_;
  std::vector<RewardBreakdown> rewards_;
  double mean_reward_;
  double std_reward_;
  std::vector<Label> labels_;
  std::vector<double> advantages_;
  std::vector<double> shaped_advantages_;
};

}  // namespace eapo
