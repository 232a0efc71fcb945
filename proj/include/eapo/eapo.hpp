#pragma once

#include <optional>
#include <span>
#include <vector>

#include "eapo/rollout.hpp"

namespace eapo {

struct EapoConfig {
  double w0 = 0.2;     // base positive weight
  double w_min = 0.0;
  double w_max = 2.0;
  double w_neg = 1.0;  // fixed negative weight

  // 0 <= w_min <= w0 <= w_max, w_neg > 0.
  void validate() const;
};

// Flat per-token mean of the recorded step entropies over every token of
// every rollout. Throws ConfigError when the batch has no tokens.
double batch_entropy(std::span<const Rollout> rollouts);

// clip(w0 * ht / h0, w_min, w_max). Throws ConfigError unless h0 > 0.
double dynamic_weight(double h0, double ht, const EapoConfig& cfg);

// One unclipped step of w_t = w_{t-1} * H_t / H_{t-1}.
double next_recursive_weight(double previous_weight, double h_previous, double h_current);

// Weights w_0..w_T from the recursion, starting at w0, over an entropy
// history H_0..H_T (at least two entries, all > 0; DomainError otherwise).
std::vector<double> recursive_weight_trace(double w0, std::span<const double> entropy_history);

// Continues the recursion from the last of `weights_so_far` (which holds
// w_0..w_{t-1} aligned with the first t entries of the history) to the end
// of the history and returns the final weight.
double recursive_weight(std::span<const double> weights_so_far,
                        std::span<const double> entropy_history);

// Initial entropy, frozen on the first record, plus the per-step history.
// Single writer; copy to snapshot.
class EntropyTracker {
 public:
  // Appends H_t; the first call also fixes H_0. Throws DomainError for
  // negative or non-finite entropy.
  void record(double entropy);

  bool initialized() const { return h0_.has_value(); }
  double h0() const;
  double current() const;
  double ratio() const { return current() / h0(); }
  std::size_t current_step() const { return history_.size(); }
  const std::vector<double>& history() const { return history_; }

 private:
  std::optional<double> h0_;
  std::vector<double> history_;
};

}  // namespace eapo
