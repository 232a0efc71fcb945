#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eapo/advantage.hpp"
#include "eapo/rollout.hpp"
#include "eapo/toy_policy.hpp"

namespace eapo::testing {

// Reward breakdown whose total is exactly r (all weight on the format slot).
inline RewardBreakdown scalar_reward(double r) {
  RewardWeights w;
  w.alpha = {1.0, 0.0, 0.0, 0.0};
  return make_breakdown(r, 0.0, 0.0, 0.0, w);
}

inline RolloutGroup group_with_rewards(const Prompt& prompt, std::vector<Rollout> rollouts,
                                       const std::vector<double>& rewards, ShapingWeights w,
                                       double eps = 1e-8) {
  std::vector<RewardBreakdown> b;
  for (double r : rewards) b.push_back(scalar_reward(r));
  return assemble_group(prompt, std::move(rollouts), std::move(b), eps, w).group;
}

inline Prompt toy_prompt(const std::string& id = "p0") {
  return Prompt{id, "reverse: abc", "<think>abc</think><advice>cba</advice>"};
}

// Random policy with logits drawn at the given scale and no tag bias.
inline ToyPolicy noisy_policy(std::size_t order, double scale, std::uint64_t seed) {
  PolicyInit init;
  init.order = order;
  init.init_scale = scale;
  init.tag_bias = 0.0;
  init.seed = seed;
  return ToyPolicy::random(init);
}

inline void perturb(ToyPolicy& policy, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& v : policy.parameters()) v += n(rng);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("eapo-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace eapo::testing
