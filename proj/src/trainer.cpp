#include "eapo/trainer.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "eapo/eapo.hpp"
#include "eapo/errors.hpp"
#include "eapo/seeding.hpp"

namespace eapo {

std::string optimizer_name(OptimizerKind k) { return k == OptimizerKind::kSgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  throw ConfigError(fmt::format("unknown optimizer '{}' (expected sgd or adam)", s));
}

void TrainConfig::validate() const {
  if (batch_prompts < 1) throw ConfigError("train.batch_prompts must be >= 1");
  if (rollouts_per_prompt < 2) throw ConfigError("train.rollouts_per_prompt must be >= 2");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (steps && *steps < 1) throw ConfigError("train.steps must be >= 1");
  if (max_len < 1) throw ConfigError("train.max_len must be >= 1");
  if (inner_epochs < 1) throw ConfigError("train.inner_epochs must be >= 1");
  if (workers < 1) throw ConfigError("train.workers must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError(fmt::format("train.learning_rate must be finite and >= 0, got {}", learning_rate));
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("train.adam_beta1 and train.adam_beta2 must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("train.adam_eps must be > 0");
  if (!(eps_adv >= 0.0)) throw ConfigError("train.eps_adv must be >= 0");
  if (!(policy.temperature > 0.0)) throw ConfigError("policy.temperature must be > 0 for training");
  objective().validate();
  strategy.validate();
  reward.validate();
}

std::string step_csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kStepColumns.size(); ++i) {
    if (i) out += ',';
    out += kStepColumns[i];
  }
  return out;
}

std::string step_csv_row(const StepRecord& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{}", r.step, r.mean_reward, r.batch_entropy,
                     r.entropy_ratio, r.mean_response_length, r.w_pos, r.w_neg,
                     r.flat_group_count, r.loss, r.kl);
}

std::string step_json_line(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["mean_reward"] = r.mean_reward;
  j["batch_entropy"] = r.batch_entropy;
  j["entropy_ratio"] = r.entropy_ratio;
  j["mean_response_length"] = r.mean_response_length;
  j["w_pos"] = r.w_pos;
  j["w_neg"] = r.w_neg;
  j["flat_group_count"] = r.flat_group_count;
  j["loss"] = r.loss;
  j["kl"] = r.kl;
  return j.dump();
}

StepRecord parse_step_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (cells.size() != kStepColumns.size()) {
    throw ArtifactError(fmt::format("step log row has {} fields, expected {}", cells.size(),
                                    kStepColumns.size()));
  }
  try {
    std::size_t k = 0;
    StepRecord r;
    r.step = std::stoull(cells[k++]);
    r.mean_reward = std::stod(cells[k++]);
    r.batch_entropy = std::stod(cells[k++]);
    r.entropy_ratio = std::stod(cells[k++]);
    r.mean_response_length = std::stod(cells[k++]);
    r.w_pos = std::stod(cells[k++]);
    r.w_neg = std::stod(cells[k++]);
    r.flat_group_count = std::stoull(cells[k++]);
    r.loss = std::stod(cells[k++]);
    r.kl = std::stod(cells[k++]);
    return r;
  } catch (const std::logic_error&) {
    throw ArtifactError(fmt::format("malformed step log row '{}'", line));
  }
}

std::vector<StepRecord> read_step_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != step_csv_header()) {
    throw ArtifactError("step log has a missing or unexpected header");
  }
  std::vector<StepRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_step_csv_row(line));
  }
  return rows;
}

std::size_t total_steps(const TrainConfig& cfg, std::size_t dataset_size) {
  if (cfg.steps) return *cfg.steps;
  const std::size_t per_epoch = (dataset_size + cfg.batch_prompts - 1) / cfg.batch_prompts;
  return cfg.epochs * per_epoch;
}

namespace {

// Prompt order for one epoch: Fisher-Yates with the run seed.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(mix_seed(seed, {0x65706f6368ull, epoch}));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  return order;
}

// Gradient ascent with bias-corrected first and second moments.
class Adam {
 public:
  Adam(std::size_t n, const TrainConfig& cfg)
      : lr_(cfg.learning_rate), b1_(cfg.adam_beta1), b2_(cfg.adam_beta2), eps_(cfg.adam_eps) {
    if (cfg.optimizer == OptimizerKind::kAdam) {
      m_.assign(n, 0.0);
      v_.assign(n, 0.0);
    }
  }

  void ascend(std::vector<double>& params, const std::vector<double>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      m_[k] = b1_ * m_[k] + (1.0 - b1_) * grad[k];
      v_[k] = b2_ * v_[k] + (1.0 - b2_) * grad[k] * grad[k];
      params[k] += lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
    }
  }

 private:
  double lr_, b1_, b2_, eps_;
  std::size_t t_ = 0;
  std::vector<double> m_, v_;
};

struct PromptWork {
  std::vector<Rollout> rollouts;
  std::vector<RewardBreakdown> rewards;
  std::exception_ptr error;
};

template <typename Fn>
void fan_out(std::size_t count, std::size_t workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string diagnostic_dump(std::size_t step, double ht, const ShapingWeights& w,
                            const ObjectiveGradient& g, const std::vector<RolloutGroup>& groups) {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["batch_entropy"] = ht;
  j["w_pos"] = w.w_pos;
  j["w_neg"] = w.w_neg;
  j["surrogate"] = std::isfinite(g.terms.surrogate) ? nlohmann::json(g.terms.surrogate) : "non-finite";
  j["kl"] = std::isfinite(g.terms.kl) ? nlohmann::json(g.terms.kl) : "non-finite";
  std::size_t bad = 0;
  nlohmann::json first_bad = nullptr;
  for (std::size_t i = 0; i < g.grad.size(); ++i) {
    if (!std::isfinite(g.grad[i])) {
      if (bad == 0) first_bad = {{"context", i / kVocabSize}, {"token", i % kVocabSize}};
      ++bad;
    }
  }
  j["non_finite_gradient_coordinates"] = bad;
  j["first_non_finite"] = first_bad;
  nlohmann::json adv = nlohmann::json::array();
  for (const auto& grp : groups) adv.push_back(grp.shaped_advantages());
  j["shaped_advantages"] = adv;
  return j.dump();
}

}  // namespace

TrainResult train(const TrainConfig& cfg, std::span<const Prompt> dataset,
                  const RewardPipeline& rewards, const StepObserver& observer) {
  cfg.validate();
  return train_from(ToyPolicy::random(cfg.policy), cfg, dataset, rewards, observer);
}

TrainResult train_from(ToyPolicy initial, const TrainConfig& cfg, std::span<const Prompt> dataset,
                       const RewardPipeline& rewards, const StepObserver& observer) {
  cfg.validate();
  if (dataset.empty()) throw ConfigError("train: dataset is empty");
  for (const auto& p : dataset) validate(p);
  if (initial.order() != cfg.policy.order) {
    throw ConfigError("train: initial policy order differs from policy.order");
  }

  TrainResult result{std::move(initial), {}, 0.0};
  ToyPolicy& policy = result.policy;
  const ToyPolicy reference = policy;
  const auto objective_cfg = cfg.objective();
  EntropyTracker tracker;
  Adam adam(policy.parameters().size(), cfg);

  const std::size_t n_steps = total_steps(cfg, dataset.size());
  const std::size_t batch = std::min(cfg.batch_prompts, dataset.size());
  std::vector<std::size_t> order;
  std::size_t epoch = 0, cursor = dataset.size();

  for (std::size_t step = 0; step < n_steps; ++step) {
    if (cursor >= dataset.size()) {
      order = epoch_order(dataset.size(), cfg.seed, epoch++);
      cursor = 0;
    }
    const std::size_t take = std::min(batch, dataset.size() - cursor);
    std::span<const std::size_t> prompt_ids(order.data() + cursor, take);
    cursor += take;

    std::vector<PromptWork> work(take);
    fan_out(take, cfg.workers, [&](std::size_t j) {
      try {
        const auto& prompt = dataset[prompt_ids[j]];
        work[j].rollouts = sample_rollouts(policy, prompt, cfg.rollouts_per_prompt, cfg.max_len,
                                           mix_seed(cfg.seed, {step, j}));
        for (const auto& r : work[j].rollouts) work[j].rewards.push_back(composite_reward(prompt, r, rewards));
      } catch (...) {
        work[j].error = std::current_exception();
      }
    });
    for (const auto& w : work) {
      if (w.error) {
        try {
          std::rethrow_exception(w.error);
        } catch (const ScoringError& e) {
          throw ScoringError(fmt::format("step {}: {}", step, e.what()));
        }
      }
    }

    std::vector<Rollout> all;
    double reward_sum = 0.0;
    std::size_t length_sum = 0;
    for (const auto& w : work) {
      for (std::size_t i = 0; i < w.rollouts.size(); ++i) {
        all.push_back(w.rollouts[i]);
        reward_sum += w.rewards[i].total;
        length_sum += w.rollouts[i].length();
      }
    }
    const double ht = batch_entropy(all);
    tracker.record(ht);
    const auto weights = cfg.strategy.resolve(tracker.h0(), ht);

    std::vector<RolloutGroup> groups;
    groups.reserve(take);
    std::size_t flat = 0;
    for (std::size_t j = 0; j < take; ++j) {
      auto assembled = assemble_group(dataset[prompt_ids[j]], std::move(work[j].rollouts),
                                      std::move(work[j].rewards), cfg.eps_adv, weights);
      flat += assembled.flat ? 1 : 0;
      groups.push_back(std::move(assembled.group));
    }

    ObjectiveTerms first_terms;
    for (std::size_t inner = 0; inner < cfg.inner_epochs; ++inner) {
      const auto g = objective_gradient(groups, objective_cfg, policy, reference);
      bool finite = std::isfinite(g.terms.objective);
      for (double x : g.grad) finite = finite && std::isfinite(x);
      if (!finite) throw TrainingError(diagnostic_dump(step, ht, weights, g, groups));
      if (inner == 0) first_terms = g.terms;
      if (cfg.optimizer == OptimizerKind::kAdam) {
        adam.ascend(policy.parameters(), g.grad);
      } else {
        auto& params = policy.parameters();
        for (std::size_t k = 0; k < params.size(); ++k) params[k] += cfg.learning_rate * g.grad[k];
      }
    }

    const auto n = static_cast<double>(all.size());
    StepRecord rec;
    rec.step = step;
    rec.mean_reward = reward_sum / n;
    rec.batch_entropy = ht;
    rec.entropy_ratio = tracker.h0() > 0.0 ? ht / tracker.h0() : 0.0;
    rec.mean_response_length = static_cast<double>(length_sum) / n;
    rec.w_pos = weights.w_pos;
    rec.w_neg = weights.w_neg;
    rec.flat_group_count = flat;
    rec.loss = -first_terms.objective;
    rec.kl = first_terms.kl;
    result.steps.push_back(rec);
    if (observer) observer(rec);
  }
  result.h0 = tracker.initialized() ? tracker.h0() : 0.0;
  return result;
}

std::vector<SweepRow> sweep(const TrainConfig& base, std::span<const SweepCell> grid,
                            std::span<const Prompt> dataset, const RewardPipeline& rewards,
                            const CellObserver& observer) {
  if (grid.empty()) throw ConfigError("sweep: grid is empty");
  std::vector<SweepRow> rows;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    SweepRow row;
    row.cell = grid[c];
    try {
      auto cfg = base;
      cfg.strategy = ShapingStrategy::fixed_weights(grid[c].w_pos, grid[c].w_neg);
      auto result = train(cfg, dataset, rewards);
      row.ok = true;
      row.h0 = result.h0;
      if (!result.steps.empty()) row.final_step = result.steps.back();
      if (observer) observer(c, grid[c], result);
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace eapo
