#pragma once

#include <memory>
#include <string>
#include <vector>

#include "eapo/judge.hpp"
#include "eapo/remote.hpp"
#include "eapo/rollout.hpp"
#include "eapo/text_metrics.hpp"

namespace eapo {

enum class ScorerKind { kMock, kRemote };

std::string_view scorer_name(ScorerKind kind);
ScorerKind parse_scorer(std::string_view name);

struct RewardConfig {
  RewardWeights weights;
  std::vector<TagPair> required_tags = default_required_tags();
  ScorerKind rerank = ScorerKind::kMock;
  ScorerKind judge = ScorerKind::kMock;
  Rubric judge_rubric = Rubric::kThink;
  RemoteEndpoint rerank_endpoint;
  RemoteEndpoint judge_endpoint;

  // Throws ConfigError: negative alpha, all alphas zero, remote scorer
  // without a url, malformed tag pairs.
  void validate() const;

  // Fills empty endpoint urls and keys from EAPO_RERANK_URL, EAPO_JUDGE_URL
  // and EAPO_API_KEY.
  void apply_environment();
};

double judge_score(const std::string& question, const std::string& response,
                   const std::string& reference, Rubric rubric, const JudgeClient& client);

// The four reward signals and their weighted combination. Stateless; safe to
// call from several threads.
class RewardPipeline {
 public:
  explicit RewardPipeline(RewardConfig config);
  RewardPipeline(RewardConfig config, std::shared_ptr<const Reranker> reranker,
                 std::shared_ptr<const JudgeClient> judge);

  RewardBreakdown score(const Prompt& prompt, const std::string& response) const;

  const RewardConfig& config() const { return config_; }
  const Reranker& reranker() const { return *reranker_; }
  const JudgeClient& judge() const { return *judge_; }

 private:
  RewardConfig config_;
  std::shared_ptr<const Reranker> reranker_;
  std::shared_ptr<const JudgeClient> judge_;
};

RewardBreakdown composite_reward(const Prompt& prompt, const Rollout& rollout,
                                 const RewardPipeline& pipeline);

}  // namespace eapo
