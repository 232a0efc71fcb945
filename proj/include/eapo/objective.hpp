#pragma once

#include <span>
#include <vector>

#include "eapo/rollout.hpp"
#include "eapo/toy_policy.hpp"

namespace eapo {

struct ObjectiveConfig {
  double clip_eps = 0.2;
  double kl_beta = 0.001;

  // clip_eps > 0, kl_beta >= 0.
  void validate() const;
};

struct ObjectiveTerms {
  double surrogate = 0.0;  // clipped surrogate, averaged per token then per rollout
  double kl = 0.0;         // exact KL(current || reference), averaged the same way
  double objective = 0.0;  // surrogate - beta * kl
  std::size_t rollouts = 0;
};

// r_t = exp(logprob_current - logprob_old) for every token of every rollout.
std::vector<std::vector<double>> importance_ratios(const RolloutGroup& group,
                                                   const ToyPolicy& current);

// Categorical KL(p || q) from log-probabilities.
double categorical_kl(std::span<const double> log_p, std::span<const double> log_q);

// J = mean_i (1/|y_i|) sum_t min(r_t A_i, clip(r_t, 1-eps, 1+eps) A_i) - beta * KL,
// with the sequence-level shaped advantage A_i broadcast to every token and
// the KL evaluated exactly at each visited context. Throws ConfigError when
// there are no groups.
ObjectiveTerms surrogate_objective(std::span<const RolloutGroup> groups, const ObjectiveConfig& cfg,
                                   const ToyPolicy& current, const ToyPolicy& reference);

struct ObjectiveGradient {
  ObjectiveTerms terms;
  std::vector<double> grad;  // same layout as ToyPolicy::parameters()
};

// Exact dJ/dlogits with old log-probabilities and advantages held constant.
// Requires current.temperature() > 0.
ObjectiveGradient objective_gradient(std::span<const RolloutGroup> groups,
                                     const ObjectiveConfig& cfg, const ToyPolicy& current,
                                     const ToyPolicy& reference);

}  // namespace eapo
