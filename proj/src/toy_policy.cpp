#include "eapo/toy_policy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "eapo/errors.hpp"
#include "eapo/seeding.hpp"

namespace eapo {

namespace {

std::size_t checked_context_count(std::size_t order) {
  if (order < 1 || order > 4) {
    throw ConfigError(fmt::format("policy order must be in [1, 4], got {}", order));
  }
  std::size_t n = 1;
  for (std::size_t i = 0; i < order; ++i) n *= kVocabSize;
  return n;
}

void check_temperature(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw ConfigError(fmt::format("policy temperature must be finite and >= 0, got {}", t));
  }
}

}  // namespace

ToyPolicy::ToyPolicy(std::size_t order, double temperature)
    : order_(order),
      contexts_(checked_context_count(order)),
      temperature_(temperature),
      logits_(contexts_ * kVocabSize, 0.0) {
  check_temperature(temperature);
}

ToyPolicy::ToyPolicy(std::size_t order, double temperature, std::vector<double> logits)
    : order_(order),
      contexts_(checked_context_count(order)),
      temperature_(temperature),
      logits_(std::move(logits)) {
  check_temperature(temperature);
  if (logits_.size() != contexts_ * kVocabSize) {
    throw ConfigError(fmt::format("policy of order {} needs {} logits, got {}", order,
                                  contexts_ * kVocabSize, logits_.size()));
  }
}

ToyPolicy ToyPolicy::random(const PolicyInit& init) {
  ToyPolicy p(init.order, init.temperature);
  std::mt19937_64 rng(mix_seed(init.seed, {0x706f6c696379ull}));
  for (std::size_t c = 0; c < p.contexts_; ++c) {
    auto row = p.logits(c);
    for (auto& x : row) x = init.init_scale * standard_normal(rng);
    for (TokenId t = tok::kThinkOpen; t <= tok::kAdviceClose; ++t) row[t] += init.tag_bias;
    row[tok::kEos] += init.eos_bias;
    row[tok::kPad] += init.pad_bias;
  }
  return p;
}

std::size_t ToyPolicy::context_index(std::span<const TokenId> window) const {
  if (window.size() != order_) {
    throw InputError(fmt::format("context window has {} tokens, policy order is {}", window.size(),
                                 order_));
  }
  std::size_t idx = 0;
  for (TokenId id : window) {
    if (id >= kVocabSize) throw InputError(fmt::format("token id {} out of range", id));
    idx = idx * kVocabSize + id;
  }
  return idx;
}

void ToyPolicy::log_probs(std::size_t context, std::span<double> out) const {
  const auto row = logits(context);
  if (temperature_ == 0.0) {
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    std::fill(out.begin(), out.end(), -std::numeric_limits<double>::infinity());
    out[best] = 0.0;
    return;
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < kVocabSize; ++v) {
    out[v] = row[v] / temperature_;
    mx = std::max(mx, out[v]);
  }
  double sum = 0.0;
  for (std::size_t v = 0; v < kVocabSize; ++v) sum += std::exp(out[v] - mx);
  const double lse = mx + std::log(sum);
  for (std::size_t v = 0; v < kVocabSize; ++v) out[v] -= lse;
}

double ToyPolicy::entropy(std::size_t context) const {
  std::array<double, kVocabSize> lp;
  log_probs(context, lp);
  return entropy_from_log_probs(lp);
}

ToyPolicy ToyPolicy::with_temperature(double temperature) const {
  return ToyPolicy(order_, temperature, logits_);
}

double entropy_from_log_probs(std::span<const double> log_probs) {
  double h = 0.0;
  for (double lp : log_probs) {
    if (lp > -std::numeric_limits<double>::infinity()) h -= std::exp(lp) * lp;
  }
  return std::clamp(h, 0.0, std::log(static_cast<double>(log_probs.size())));
}

std::vector<TokenId> prompt_prefix(const Prompt& prompt, std::size_t order) {
  std::vector<TokenId> prefix(order, tok::kPad);
  std::uint64_t h = fnv1a(prompt.question);
  for (std::size_t j = 1; j < order; ++j) {
    prefix[j] = Vocabulary::symbol(h % tok::kSymbolCount);
    h = splitmix64(h);
  }
  return prefix;
}

std::vector<Rollout> sample_responses(const ToyPolicy& policy, const Prompt& prompt, std::size_t n,
                                      std::size_t max_len, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample_responses: n must be >= 1");
  if (max_len < 1) throw ConfigError("sample_responses: max_len must be >= 1");
  std::mt19937_64 rng(seed);
  const auto prefix = prompt_prefix(prompt, policy.order());
  std::vector<Rollout> out;
  out.reserve(n);
  std::array<double, kVocabSize> lp;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<TokenId> window = prefix;
    std::vector<TokenId> tokens;
    std::vector<double> logprobs, entropies;
    while (tokens.size() < max_len) {
      policy.log_probs(policy.context_index(window), lp);
      const double u = uniform01(rng);
      std::size_t pick = kVocabSize;
      double acc = 0.0;
      for (std::size_t v = 0; v < kVocabSize; ++v) {
        if (lp[v] == -std::numeric_limits<double>::infinity()) continue;
        acc += std::exp(lp[v]);
        pick = v;
        if (u < acc) break;
      }
      const auto token = static_cast<TokenId>(pick);
      tokens.push_back(token);
      logprobs.push_back(lp[pick]);
      entropies.push_back(entropy_from_log_probs(lp));
      if (token == tok::kEos) break;
      window.erase(window.begin());
      window.push_back(token);
    }
    out.emplace_back(prefix, std::move(tokens), std::move(logprobs), std::move(entropies));
  }
  return out;
}

std::vector<Rollout> sample_rollouts(const ToyPolicy& policy, const Prompt& prompt, std::size_t n,
                                     std::size_t max_len, std::uint64_t seed) {
  if (n < 2) throw ConfigError(fmt::format("a rollout group needs n >= 2, got {}", n));
  return sample_responses(policy, prompt, n, max_len, seed);
}

Rescored rescore(const ToyPolicy& policy, const Rollout& rollout) {
  Rescored out;
  out.logprobs.reserve(rollout.length());
  out.entropies.reserve(rollout.length());
  std::array<double, kVocabSize> lp;
  for_each_step(policy, rollout, [&](std::size_t, std::size_t ctx, TokenId token) {
    policy.log_probs(ctx, lp);
    out.logprobs.push_back(lp[token]);
    out.entropies.push_back(entropy_from_log_probs(lp));
  });
  return out;
}

void save_policy(const std::filesystem::path& path, const ToyPolicy& policy) {
  nlohmann::json j{{"format", "eapo-toy-policy"},
                   {"version", 1},
                   {"order", policy.order()},
                   {"vocab_size", policy.vocab_size()},
                   {"temperature", policy.temperature()},
                   {"logits", policy.parameters()}};
  std::ofstream out(path);
  if (!out) throw ArtifactError(fmt::format("cannot write policy snapshot {}", path.string()));
  out << j.dump() << '\n';
}

ToyPolicy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError(fmt::format("cannot open policy snapshot {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(fmt::format("{}: not valid JSON ({})", path.string(), e.what()));
  }
  try {
    if (j.at("format").get<std::string>() != "eapo-toy-policy" || j.at("version").get<int>() != 1) {
      throw ArtifactError(fmt::format("{}: not an eapo-toy-policy v1 snapshot", path.string()));
    }
    if (j.at("vocab_size").get<std::size_t>() != kVocabSize) {
      throw ArtifactError(fmt::format("{}: vocabulary size {} does not match {}", path.string(),
                                      j.at("vocab_size").get<std::size_t>(), kVocabSize));
    }
    return ToyPolicy(j.at("order").get<std::size_t>(), j.at("temperature").get<double>(),
                     j.at("logits").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(fmt::format("{}: schema mismatch ({})", path.string(), e.what()));
  } catch (const ConfigError& e) {
    throw ArtifactError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace eapo
