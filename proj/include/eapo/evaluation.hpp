#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eapo/rewards.hpp"
#include "eapo/toy_policy.hpp"

namespace eapo {

struct EvalConfig {
  std::vector<std::size_t> ks{1, 4, 8};
  std::uint64_t seed = 0;
  double temperature = 1.0;
  std::size_t max_len = 24;
  bool judge = false;  // score the first sample with the response rubric

  void validate() const;
  std::size_t max_k() const;
};

struct EvalRow {
  std::string id;
  bool ok = true;
  std::string error;
  double rouge = 0.0;   // first sample
  double rerank = 0.0;  // first sample
  std::optional<double> judge;
  std::vector<double> best_rouge;   // RL@k, one per configured k
  std::vector<double> best_rerank;  // RR@k
};

struct EvalReport {
  std::vector<std::size_t> ks;
  std::vector<EvalRow> rows;
  std::size_t failures = 0;
  double mean_rouge = 0.0;
  double mean_rerank = 0.0;
  std::optional<double> mean_judge;
  std::vector<double> rl_at;  // aligned with ks
  std::vector<double> rr_at;
  std::vector<std::string> avg_columns;
  double avg = 0.0;

  // Value of an aggregate column by name ("Rouge-L", "RL@8", ...).
  double column(const std::string& name) const;
};

// Samples max(ks) responses per prompt (the first doubles as the single
// sample). Per-prompt scoring failures are recorded and excluded from the
// aggregates. Never modifies the policy.
EvalReport evaluate(const ToyPolicy& policy, std::span<const Prompt> dataset, const EvalConfig& cfg,
                    const RewardPipeline& rewards);

// Fills the aggregate fields from rows and ks. Avg is the mean of Rouge-L,
// Reranker, LAAJ (when judged) and RL@k / RR@k for the largest k > 1.
void aggregate(EvalReport& report);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
std::string report_table(const EvalReport& report);
void write_rows_csv(std::ostream& out, const EvalReport& report);

}  // namespace eapo
