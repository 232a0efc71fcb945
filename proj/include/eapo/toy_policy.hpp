#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "eapo/rollout.hpp"

namespace eapo {

struct PolicyInit {
  std::size_t order = 2;
  double temperature = 1.0;
  double init_scale = 1.0;  // std-dev of the random initial logits
  double tag_bias = 2.5;    // added to the four tag logits
  double eos_bias = 0.0;    // added to the end-of-sequence logit
  double pad_bias = 0.0;    // added to the padding logit
  std::uint64_t seed = 0;
};

// Order-k autoregressive categorical policy over the fixed vocabulary: one
// row of logits per context of k token ids. The next-token distribution is
// softmax(logits / temperature); temperature 0 means greedy argmax.
class ToyPolicy {
 public:
  ToyPolicy(std::size_t order, double temperature);
  ToyPolicy(std::size_t order, double temperature, std::vector<double> logits);

  static ToyPolicy random(const PolicyInit& init);

  std::size_t order() const { return order_; }
  std::size_t vocab_size() const { return kVocabSize; }
  std::size_t context_count() const { return contexts_; }
  double temperature() const { return temperature_; }

  // Window of exactly order() token ids, oldest first.
  std::size_t context_index(std::span<const TokenId> window) const;

  std::span<const double> logits(std::size_t context) const {
    return {logits_.data() + context * kVocabSize, kVocabSize};
  }
  std::span<double> logits(std::size_t context) {
    return {logits_.data() + context * kVocabSize, kVocabSize};
  }
  const std::vector<double>& parameters() const { return logits_; }
  std::vector<double>& parameters() { return logits_; }

  // Log-probabilities of the next token at `context`; -inf off the argmax
  // when the temperature is 0.
  void log_probs(std::size_t context, std::span<double> out) const;
  double entropy(std::size_t context) const;

  ToyPolicy with_temperature(double temperature) const;

 private:
  std::size_t order_;
  std::size_t contexts_;
  double temperature_;
  std::vector<double> logits_;
};

// Shannon entropy (nats) of a distribution given by log-probabilities,
// clamped to [0, ln size].
double entropy_from_log_probs(std::span<const double> log_probs);

// Initial context window for a prompt: padding followed by symbols drawn
// from a hash of the question.
std::vector<TokenId> prompt_prefix(const Prompt& prompt, std::size_t order);

// Draws n >= 1 responses with one RNG stream seeded by `seed`. Each stops at
// end-of-sequence (included as the final token) or after max_len tokens.
std::vector<Rollout> sample_responses(const ToyPolicy& policy, const Prompt& prompt, std::size_t n,
                                      std::size_t max_len, std::uint64_t seed);

// Group sampling for training: n >= 2 and max_len >= 1 (ConfigError otherwise).
std::vector<Rollout> sample_rollouts(const ToyPolicy& policy, const Prompt& prompt, std::size_t n,
                                     std::size_t max_len, std::uint64_t seed);

struct Rescored {
  std::vector<double> logprobs;
  std::vector<double> entropies;
};

// Exact per-token log-probabilities and entropies under `policy`.
Rescored rescore(const ToyPolicy& policy, const Rollout& rollout);

// Visits every generation step of a rollout: fn(t, context_index, token).
template <typename Fn>
void for_each_step(const ToyPolicy& policy, const Rollout& rollout, Fn&& fn) {
  std::vector<TokenId> window = rollout.prefix();
  const auto& tokens = rollout.tokens();
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto ctx = policy.context_index(window);
    fn(t, ctx, tokens[t]);
    if (!window.empty()) {
      window.erase(window.begin());
      window.push_back(tokens[t]);
    }
  }
}

// JSON snapshot: {"format": "eapo-toy-policy", "version": 1, "order",
// "vocab_size", "temperature", "logits": [...]}. load_policy throws
// ArtifactError on a missing file or any schema mismatch.
void save_policy(const std::filesystem::path& path, const ToyPolicy& policy);
ToyPolicy load_policy(const std::filesystem::path& path);

}  // namespace eapo
