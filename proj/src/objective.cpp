#include "eapo/objective.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "eapo/errors.hpp"

namespace eapo {

void ObjectiveConfig::validate() const {
  if (!(clip_eps > 0.0) || !std::isfinite(clip_eps)) {
    throw ConfigError(fmt::format("clip_eps must be > 0, got {}", clip_eps));
  }
  if (!(kl_beta >= 0.0) || !std::isfinite(kl_beta)) {
    throw ConfigError(fmt::format("kl_beta must be >= 0, got {}", kl_beta));
  }
}

std::vector<std::vector<double>> importance_ratios(const RolloutGroup& group,
                                                   const ToyPolicy& current) {
  std::vector<std::vector<double>> out;
  out.reserve(group.size());
  for (const auto& r : group.rollouts()) {
    const auto now = rescore(current, r);
    std::vector<double> ratios(r.length());
    for (std::size_t t = 0; t < r.length(); ++t) {
      ratios[t] = std::exp(now.logprobs[t] - r.old_logprobs()[t]);
    }
    out.push_back(std::move(ratios));
  }
  return out;
}

double categorical_kl(std::span<const double> log_p, std::span<const double> log_q) {
  double kl = 0.0;
  for (std::size_t v = 0; v < log_p.size(); ++v) {
    const double p = std::exp(log_p[v]);
    if (p > 0.0) kl += p * (log_p[v] - log_q[v]);
  }
  return std::max(kl, 0.0);
}

namespace {

std::size_t total_rollouts(std::span<const RolloutGroup> groups) {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  return n;
}

// Per-token clipped surrogate and the derivative of that term with respect
// to the current log-probability of the sampled token.
struct SurrogateToken {
  double value;
  double dvalue_dlogprob;
};

SurrogateToken surrogate_token(double ratio, double adv, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  const double value = std::min(ratio * adv, clipped * adv);
  // The unclipped branch carries the gradient: for A > 0 while r < 1 + eps,
  // for A < 0 while r > 1 - eps.
  bool active = false;
  if (adv > 0.0) active = ratio < 1.0 + eps;
  if (adv < 0.0) active = ratio > 1.0 - eps;
  return {value, active ? adv * ratio : 0.0};
}

template <bool kWithGradient>
ObjectiveTerms accumulate(std::span<const RolloutGroup> groups, const ObjectiveConfig& cfg,
                          const ToyPolicy& current, const ToyPolicy& reference,
                          std::vector<double>* grad) {
  cfg.validate();
  if (groups.empty()) throw ConfigError("objective: no rollout groups");
  if (current.order() != reference.order()) {
    throw ConfigError("objective: current and reference policies differ in order");
  }
  if constexpr (kWithGradient) {
    if (!(current.temperature() > 0.0)) {
      throw ConfigError("objective gradient needs a positive temperature");
    }
  }
  const std::size_t m = total_rollouts(groups);
  const double inv_t = kWithGradient ? 1.0 / current.temperature() : 0.0;
  ObjectiveTerms terms;
  terms.rollouts = m;
  std::array<double, kVocabSize> lp, lq;
  for (const auto& group : groups) {
    for (std::size_t i = 0; i < group.size(); ++i) {
      const auto& rollout = group.rollouts()[i];
      if (rollout.length() == 0) continue;
      const double adv = group.shaped_advantages()[i];
      const double weight = 1.0 / (static_cast<double>(m) * static_cast<double>(rollout.length()));
      double surrogate = 0.0, kl = 0.0;
      for_each_step(current, rollout, [&](std::size_t t, std::size_t ctx, TokenId token) {
        current.log_probs(ctx, lp);
        reference.log_probs(ctx, lq);
        const double ratio = std::exp(lp[token] - rollout.old_logprobs()[t]);
        const auto s = surrogate_token(ratio, adv, cfg.clip_eps);
        const double k = categorical_kl(lp, lq);
        surrogate += s.value;
        kl += k;
        if constexpr (kWithGradient) {
          double* g = grad->data() + ctx * kVocabSize;
          // d log pi(a) / d logit_v = (delta_av - p_v) / T
          const double ds = weight * s.dvalue_dlogprob * inv_t;
          // d KL / d logit_v = p_v (log p_v - log q_v - KL) / T
          const double dk = -cfg.kl_beta * weight * inv_t;
          for (std::size_t v = 0; v < kVocabSize; ++v) {
            const double p = std::exp(lp[v]);
            g[v] += -ds * p + dk * p * (lp[v] - lq[v] - k);
          }
          g[token] += ds;
        }
      });
      terms.surrogate += weight * surrogate;
      terms.kl += weight * kl;
    }
  }
  terms.objective = terms.surrogate - cfg.kl_beta * terms.kl;
  return terms;
}

}  // namespace

ObjectiveTerms surrogate_objective(std::span<const RolloutGroup> groups, const ObjectiveConfig& cfg,
                                   const ToyPolicy& current, const ToyPolicy& reference) {
  return accumulate<false>(groups, cfg, current, reference, nullptr);
}

ObjectiveGradient objective_gradient(std::span<const RolloutGroup> groups,
                                     const ObjectiveConfig& cfg, const ToyPolicy& current,
                                     const ToyPolicy& reference) {
  ObjectiveGradient out;
  out.grad.assign(current.parameters().size(), 0.0);
  out.terms = accumulate<true>(groups, cfg, current, reference, &out.grad);
  return out;
}

}  // namespace eapo
