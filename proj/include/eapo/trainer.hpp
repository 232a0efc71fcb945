#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eapo/advantage.hpp"
#include "eapo/objective.hpp"
#include "eapo/rewards.hpp"
#include "eapo/toy_policy.hpp"

namespace eapo {

enum class OptimizerKind { kSgd, kAdam };

std::string optimizer_name(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view s);

struct TrainConfig {
  ShapingStrategy strategy = ShapingStrategy::grpo();
  std::size_t batch_prompts = 32;
  std::size_t rollouts_per_prompt = 4;
  std::size_t epochs = 10;
  std::optional<std::size_t> steps;  // when set, overrides epochs
  std::size_t max_len = 24;
  std::size_t inner_epochs = 1;
  double learning_rate = 0.025;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double kl_beta = 0.001;
  double clip_eps = 0.2;
  double eps_adv = 1e-8;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  PolicyInit policy;
  RewardConfig reward;

  void validate() const;
  ObjectiveConfig objective() const { return {clip_eps, kl_beta}; }
};

struct StepRecord {
  std::size_t step = 0;
  double mean_reward = 0.0;
  double batch_entropy = 0.0;
  double entropy_ratio = 0.0;
  double mean_response_length = 0.0;
  double w_pos = 0.0;
  double w_neg = 0.0;
  std::size_t flat_group_count = 0;
  double loss = 0.0;
  double kl = 0.0;
};

// Column order of the CSV step log.
inline constexpr std::array<std::string_view, 10> kStepColumns{
    "step", "mean_reward", "batch_entropy", "entropy_ratio", "mean_response_length",
    "w_pos", "w_neg", "flat_group_count", "loss", "kl"};

std::string step_csv_header();
std::string step_csv_row(const StepRecord& r);
std::string step_json_line(const StepRecord& r);
StepRecord parse_step_csv_row(const std::string& line);
// Throws ArtifactError on a missing file, wrong header or malformed row.
std::vector<StepRecord> read_step_csv(std::istream& in);

struct TrainResult {
  ToyPolicy policy;
  std::vector<StepRecord> steps;
  double h0 = 0.0;
};

using StepObserver = std::function<void(const StepRecord&)>;

std::size_t total_steps(const TrainConfig& cfg, std::size_t dataset_size);

// Runs the sample -> score -> partition -> shape -> gradient -> update loop.
// Deterministic for a given config and seed, independent of `workers`.
// ScoringError aborts the step and propagates; a non-finite objective or
// gradient raises TrainingError carrying a JSON diagnostic dump.
TrainResult train(const TrainConfig& cfg, std::span<const Prompt> dataset,
                  const RewardPipeline& rewards, const StepObserver& observer = {});

// Same, starting from a given policy instead of cfg.policy's initializer.
TrainResult train_from(ToyPolicy initial, const TrainConfig& cfg, std::span<const Prompt> dataset,
                       const RewardPipeline& rewards, const StepObserver& observer = {});

struct SweepCell {
  double w_pos = 1.0;
  double w_neg = 1.0;
};

struct SweepRow {
  SweepCell cell;
  bool ok = false;
  std::string error;
  double h0 = 0.0;
  StepRecord final_step;
};

// Called after each successful cell with its index and full result.
using CellObserver = std::function<void(std::size_t, const SweepCell&, const TrainResult&)>;

// One FIXED(w_pos, w_neg) run per cell from the same base config and seed.
// A failing cell is recorded and the sweep continues.
std::vector<SweepRow> sweep(const TrainConfig& base, std::span<const SweepCell> grid,
                            std::span<const Prompt> dataset, const RewardPipeline& rewards,
                            const CellObserver& observer = {});

}  // namespace eapo
