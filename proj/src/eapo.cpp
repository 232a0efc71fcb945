#include "eapo/eapo.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "eapo/errors.hpp"

namespace eapo {

void EapoConfig::validate() const {
  if (!(w_min >= 0.0 && w_min <= w0 && w0 <= w_max && std::isfinite(w_max))) {
    throw ConfigError(fmt::format("eapo: need 0 <= w_min <= w0 <= w_max, got {} / {} / {}", w_min,
                                  w0, w_max));
  }
  if (!(w_neg > 0.0) || !std::isfinite(w_neg)) {
    throw ConfigError(fmt::format("eapo: w_neg must be positive, got {}", w_neg));
  }
}

double batch_entropy(std::span<const Rollout> rollouts) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : rollouts) {
    for (double h : r.step_entropies()) sum += h;
    count += r.length();
  }
  if (count == 0) throw ConfigError("batch_entropy: batch contains no tokens");
  return sum / static_cast<double>(count);
}

double dynamic_weight(double h0, double ht, const EapoConfig& cfg) {
  if (!(h0 > 0.0)) {
    throw ConfigError(fmt::format("dynamic_weight: initial entropy must be positive, got {}", h0));
  }
  return std::clamp(cfg.w0 * (ht / h0), cfg.w_min, cfg.w_max);
}

double next_recursive_weight(double previous_weight, double h_previous, double h_current) {
  if (!(h_previous > 0.0) || !(h_current > 0.0)) {
    throw DomainError(fmt::format("recursive weight: entropies must be positive ({}, {})",
                                  h_previous, h_current));
  }
  return previous_weight * (h_current / h_previous);
}

std::vector<double> recursive_weight_trace(double w0, std::span<const double> entropy_history) {
  if (entropy_history.size() < 2) {
    throw DomainError("recursive weight: need at least two entropy values");
  }
  std::vector<double> weights{w0};
  weights.reserve(entropy_history.size());
  for (std::size_t t = 1; t < entropy_history.size(); ++t) {
    weights.push_back(next_recursive_weight(weights.back(), entropy_history[t - 1], entropy_history[t]));
  }
  return weights;
}

double recursive_weight(std::span<const double> weights_so_far,
                        std::span<const double> entropy_history) {
  if (weights_so_far.empty()) throw DomainError("recursive weight: no starting weight");
  if (entropy_history.size() < 2) {
    throw DomainError("recursive weight: need at least two entropy values");
  }
  if (weights_so_far.size() > entropy_history.size()) {
    throw DomainError("recursive weight: more weights than entropy values");
  }
  for (double h : entropy_history) {
    if (!(h > 0.0)) throw DomainError(fmt::format("recursive weight: entropy {} is not positive", h));
  }
  double w = weights_so_far.back();
  for (std::size_t t = weights_so_far.size(); t < entropy_history.size(); ++t) {
    w = next_recursive_weight(w, entropy_history[t - 1], entropy_history[t]);
  }
  return w;
}

void EntropyTracker::record(double entropy) {
  if (!(entropy >= 0.0) || !std::isfinite(entropy)) {
    throw DomainError(fmt::format("entropy tracker: invalid entropy {}", entropy));
  }
  if (!h0_) h0_ = entropy;
  history_.push_back(entropy);
}

double EntropyTracker::h0() const {
  if (!h0_) throw ConfigError("entropy tracker: no entropy recorded yet");
  return *h0_;
}

double EntropyTracker::current() const {
  if (history_.empty()) throw ConfigError("entropy tracker: no entropy recorded yet");
  return history_.back();
}

}  // namespace eapo
