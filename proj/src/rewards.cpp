#include "eapo/rewards.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "eapo/errors.hpp"

namespace eapo {

std::string_view scorer_name(ScorerKind kind) {
  return kind == ScorerKind::kMock ? "mock" : "remote";
}

ScorerKind parse_scorer(std::string_view name) {
  if (name == "mock") return ScorerKind::kMock;
  if (name == "remote") return ScorerKind::kRemote;
  throw ConfigError(fmt::format("unknown scorer '{}' (expected mock|remote)", name));
}

void RewardConfig::validate() const {
  bool any_positive = false;
  for (double a : weights.alpha) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw ConfigError(fmt::format("reward.alphas: {} is not a finite non-negative weight", a));
    }
    any_positive = any_positive || a > 0.0;
  }
  if (!any_positive) throw ConfigError("reward.alphas: at least one weight must be positive");
  for (const auto& [open, close] : required_tags) {
    if (open.empty() || close.empty() || open == close) {
      throw ConfigError("reward.required_tags: tag pairs need distinct non-empty tags");
    }
  }
  if (rerank == ScorerKind::kRemote && rerank_endpoint.url.empty()) {
    throw ConfigError("reward.rerank: remote scorer needs a url (config or EAPO_RERANK_URL)");
  }
  if (judge == ScorerKind::kRemote && judge_endpoint.url.empty()) {
    throw ConfigError("reward.judge: remote scorer needs a url (config or EAPO_JUDGE_URL)");
  }
}

void RewardConfig::apply_environment() {
  auto fill = [](std::string& field, const char* var) {
    if (!field.empty()) return;
    if (const char* v = std::getenv(var)) field = v;
  };
  fill(rerank_endpoint.url, "EAPO_RERANK_URL");
  fill(judge_endpoint.url, "EAPO_JUDGE_URL");
  fill(rerank_endpoint.api_key, "EAPO_API_KEY");
  fill(judge_endpoint.api_key, "EAPO_API_KEY");
}

double judge_score(const std::string& question, const std::string& response,
                   const std::string& reference, Rubric rubric, const JudgeClient& client) {
  return client.judge(make_judge_request(question, response, reference, rubric)).overall;
}

namespace {

std::shared_ptr<const Reranker> make_reranker(const RewardConfig& cfg) {
  if (cfg.rerank == ScorerKind::kRemote) return std::make_shared<RemoteReranker>(cfg.rerank_endpoint);
  return std::make_shared<MockReranker>();
}

std::shared_ptr<const JudgeClient> make_judge(const RewardConfig& cfg) {
  if (cfg.judge == ScorerKind::kRemote) return std::make_shared<RemoteJudge>(cfg.judge_endpoint);
  return std::make_shared<MockJudge>();
}

}  // namespace

RewardPipeline::RewardPipeline(RewardConfig config)
    : RewardPipeline(config, make_reranker(config), make_judge(config)) {}

RewardPipeline::RewardPipeline(RewardConfig config, std::shared_ptr<const Reranker> reranker,
                               std::shared_ptr<const JudgeClient> judge)
    : config_(std::move(config)), reranker_(std::move(reranker)), judge_(std::move(judge)) {
  config_.validate();
  if (!reranker_ || !judge_) throw ConfigError("reward pipeline needs both scorers");
}

RewardBreakdown RewardPipeline::score(const Prompt& prompt, const std::string& response) const {
  const double fmt = format_reward(response, config_.required_tags);
  const double rouge = rouge_l_f1(response, prompt.reference);
  // The reference is the query, the response the document.
  const double rerank = reranker_->score(prompt.reference, response);
  const double judge =
      judge_score(prompt.question, response, prompt.reference, config_.judge_rubric, *judge_);
  return make_breakdown(fmt, rouge, rerank, judge, config_.weights);
}

RewardBreakdown composite_reward(const Prompt& prompt, const Rollout& rollout,
                                 const RewardPipeline& pipeline) {
  return pipeline.score(prompt, rollout.text());
}

}  // namespace eapo
