// Runs the acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "eapo/advantage.hpp"
#include "eapo/cli.hpp"
#include "eapo/eapo.hpp"
#include "eapo/evaluation.hpp"
#include "eapo/objective.hpp"
#include "eapo/synthetic.hpp"
#include "eapo/text_metrics.hpp"
#include "eapo/trainer.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

namespace {

using namespace eapo;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_s;  // runtime budget, 0 for none
  std::function<Outcome()> run;
};

// 1. Partition and advantage signs over random reward vectors.
Outcome partition_suite() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> n_dist(2, 16), kind(0, 3), level(0, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t bad = 0, flat = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    std::vector<double> r(static_cast<std::size_t>(n_dist(rng)));
    const int k = kind(rng);
    const double base = u(rng);
    for (auto& x : r) {
      switch (k) {
        case 0: x = u(rng); break;
        case 1: x = 0.25 * level(rng); break;                // heavy ties
        case 2: x = base + 1e-12 * (u(rng) - 0.5); break;   // nearly flat
        default: x = base; break;                            // flat
      }
    }
    const auto part = partition(r);
    const auto pos = part.positive();
    const auto neg = part.negative();
    std::vector<int> seen(r.size(), 0);
    for (auto i : pos) ++seen[i];
    for (auto i : neg) ++seen[i];
    bool ok = !pos.empty() && pos.size() + neg.size() == r.size();
    for (int s : seen) ok = ok && s == 1;
    const auto stats = group_statistics(r);
    if (stats.std > 0.0) {
      const auto a = normalize_advantages(r, 1e-8);
      for (std::size_t i = 0; i < r.size(); ++i) {
        ok = ok && (part.labels[i] == Label::kPositive ? a[i] >= 0.0 : a[i] < 0.0);
      }
    } else {
      ++flat;
      for (auto l : part.labels) ok = ok && l == Label::kPositive;
    }
    bad += ok ? 0 : 1;
  }
  return {bad == 0, fmt::format("10000 vectors, {} flat, {} violations", flat, bad)};
}

// 2. Recursive weight against the closed form.
Outcome telescoping() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> len(2, 200);
  std::uniform_real_distribution<double> logh(std::log(1e-3), std::log(10.0));
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> h(static_cast<std::size_t>(len(rng)));
    for (auto& x : h) x = std::exp(logh(rng));
    const double closed = 0.2 * h.back() / h.front();
    const double rec = recursive_weight_trace(0.2, h).back();
    worst = std::max(worst, std::abs(rec - closed) / closed);
  }
  return {worst <= 1e-9, fmt::format("1000 trajectories, worst rel err {:.2e}", worst)};
}

// 3. Direction and scale invariance of the dynamic weight.
Outcome weight_direction() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> logh(std::log(1e-3), std::log(10.0));
  std::uniform_real_distribution<double> logc(std::log(1e-3), std::log(1e3));
  const EapoConfig cfg;
  std::size_t interior = 0, wrong = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 200000; ++rep) {
    const double h0 = std::exp(logh(rng)), ht = std::exp(logh(rng)), c = std::exp(logc(rng));
    const double w = dynamic_weight(h0, ht, cfg);
    if (w > cfg.w_min && w < cfg.w_max) {
      ++interior;
      if (ht < h0 && !(w < cfg.w0)) ++wrong;
      if (ht > h0 && !(w > cfg.w0)) ++wrong;
    }
    worst = std::max(worst, std::abs(dynamic_weight(c * h0, c * ht, cfg) - w));
  }
  return {wrong == 0 && worst < 1e-12,
          fmt::format("200000 pairs ({} interior), {} direction violations, max scale change {:.1e}",
                      interior, wrong, worst)};
}

// 4. Analytic gradient against central differences.
Outcome gradient_check() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double clips[] = {0.1, 0.2, 0.3};
  const double betas[] = {0.0, 0.001, 0.05, 1.0};
  std::size_t checked = 0, passed = 0, excluded = 0;
  double worst = 0.0;
  for (int cfg_id = 0; cfg_id < 50; ++cfg_id) {
    const std::size_t order = 1 + cfg_id % 2;
    const auto old = testing::noisy_policy(order, 0.5 + u(rng), 1000 + cfg_id);
    const auto ref = testing::noisy_policy(order, 0.5 + u(rng), 2000 + cfg_id);
    auto cur = old;
    testing::perturb(cur, 0.05 + 0.4 * u(rng), 3000 + cfg_id);
    const ShapingWeights w{2.0 * u(rng), 2.0 * u(rng)};
    const std::size_t prompts = 1 + cfg_id % 3, n = 2 + cfg_id % 5, max_len = 4 + cfg_id % 9;
    std::vector<RolloutGroup> groups;
    for (std::size_t p = 0; p < prompts; ++p) {
      Prompt prompt{fmt::format("g{}", p), fmt::format("echo: q{}x{}", cfg_id, p), "<think>a</think>"};
      std::vector<double> r(n);
      for (auto& x : r) x = u(rng);
      groups.push_back(testing::group_with_rewards(
          prompt, sample_rollouts(old, prompt, n, max_len, 4000 + 10 * cfg_id + p), r, w));
    }
    const ObjectiveConfig ocfg{clips[cfg_id % 3], betas[cfg_id % 4]};
    const auto c = testing::check_gradient(groups, ocfg, cur, ref, 1e-5, 1e-4, 1e-6);
    checked += c.checked;
    passed += c.passed;
    excluded += c.excluded;
    worst = std::max(worst, c.worst);
  }
  const double frac = static_cast<double>(passed) / static_cast<double>(checked);
  return {checked > 0 && frac >= 0.99,
          fmt::format("{}/{} coordinates within 1e-4 ({:.4f}), {} excluded near kinks, worst {:.2e}",
                      passed, checked, frac, excluded, worst)};
}

// 5. Rouge-L against the table oracle.
Outcome rouge_oracle() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> len(0, 50);
  const std::vector<std::string> alphabets{"ab", "abcd", "abcdefghijklmnopqrstuvwxyz", "<>/thinkadvce"};
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto& alpha = alphabets[static_cast<std::size_t>(rep) % alphabets.size()];
    std::uniform_int_distribution<std::size_t> ch(0, alpha.size() - 1);
    std::string a(len(rng), ' '), b(len(rng), ' ');
    for (auto& c : a) c = alpha[ch(rng)];
    for (auto& c : b) c = alpha[ch(rng)];
    if (rouge_l_f1(a, b) != testing::rouge_oracle(a, b)) ++mismatches;
  }
  const bool fixed = rouge_l_f1("abc", "abc") == 1.0 && rouge_l_f1("xyz", "abc") == 0.0 &&
                     rouge_l_f1("ace", "abcde") == 0.75;
  return {mismatches == 0 && fixed,
          fmt::format("1000 pairs, {} mismatches, fixed cases {}", mismatches, fixed ? "ok" : "wrong")};
}

TrainConfig toy_config(std::size_t steps) {
  TrainConfig cfg;
  cfg.steps = steps;
  return cfg;
}

std::vector<Prompt> toy_task() { return SyntheticTask{}.generate(); }

std::vector<std::string> rows(const TrainResult& r) {
  std::vector<std::string> out;
  for (const auto& s : r.steps) out.push_back(step_csv_row(s));
  return out;
}

// 6. Presets reproduce the matching fixed-weight runs.
Outcome preset_equivalence() {
  const auto data = toy_task();
  RewardPipeline pipe{RewardConfig{}};
  const std::vector<std::tuple<const char*, ShapingStrategy, ShapingStrategy>> pairs{
      {"GRPO", ShapingStrategy::grpo(), ShapingStrategy::fixed_weights(1, 1)},
      {"PSR", ShapingStrategy::psr(), ShapingStrategy::fixed_weights(1, 0)},
      {"NSR", ShapingStrategy::nsr(), ShapingStrategy::fixed_weights(0, 1)}};
  bool ok = true;
  std::string detail;
  for (const auto& [name, preset, fixed] : pairs) {
    auto cfg = toy_config(100);
    cfg.strategy = preset;
    const auto a = rows(train(cfg, data, pipe));
    cfg.strategy = fixed;
    const auto b = rows(train(cfg, data, pipe));
    const bool same = a == b && a.size() == 100;
    ok = ok && same;
    detail += fmt::format("{}{} {}", detail.empty() ? "" : ", ", name, same ? "identical" : "DIFFER");
  }
  return {ok, detail + " (100 steps each)"};
}

// 7. Entropy dynamics of PSR, NSR and EAPO.
Outcome dynamics() {
  const auto data = toy_task();
  RewardPipeline pipe{RewardConfig{}};
  auto run = [&](ShapingStrategy s) {
    auto cfg = toy_config(300);
    cfg.strategy = s;
    return train(cfg, data, pipe);
  };
  const auto psr = run(ShapingStrategy::psr());
  const auto nsr = run(ShapingStrategy::nsr());
  const auto eapo = run(ShapingStrategy::adaptive({}));

  const double h0 = psr.h0;
  const double psr_final = psr.steps.back().batch_entropy;
  const double nsr_final = nsr.steps.back().batch_entropy;
  const double eapo_final = eapo.steps.back().batch_entropy;
  const double len0 = psr.steps.front().mean_response_length;
  const double len_final = psr.steps.back().mean_response_length;

  const std::size_t warmup = eapo.steps.size() / 10;
  std::size_t inside = 0;
  for (std::size_t i = warmup; i < eapo.steps.size(); ++i) {
    const double q = eapo.steps[i].entropy_ratio;
    inside += (q >= 0.5 && q <= 1.5) ? 1 : 0;
  }
  const double band = static_cast<double>(inside) / static_cast<double>(eapo.steps.size() - warmup);

  const bool a = psr_final < 0.5 * h0 && len_final < len0;
  const bool b = nsr_final >= 0.9 * nsr.h0;
  const bool c = band >= 0.9 && psr_final < eapo_final && eapo_final < nsr_final;
  return {a && b && c,
          fmt::format("(a) PSR H/H0 {:.3f}, length {:.2f} -> {:.2f} {}; (b) NSR H/H0 {:.3f} {}; "
                      "(c) EAPO H/H0 {:.3f}, {:.1f}% of post-warmup steps in band {}",
                      psr_final / h0, len0, len_final, a ? "ok" : "FAIL", nsr_final / nsr.h0,
                      b ? "ok" : "FAIL", eapo_final / eapo.h0, 100.0 * band, c ? "ok" : "FAIL")};
}

// 8. Final entropy ordering across the weight sweeps.
Outcome sweep_ordering() {
  const auto data = toy_task();
  RewardPipeline pipe{RewardConfig{}};
  const std::vector<SweepCell> grid{{1, 0.05}, {1, 1}, {1, 5}, {0.05, 1}, {1, 1}, {5, 1}};
  const auto out = sweep(toy_config(300), grid, data, pipe);
  std::vector<double> h;
  for (const auto& row : out) {
    if (!row.ok) return {false, fmt::format("cell ({}, {}) failed: {}", row.cell.w_pos, row.cell.w_neg, row.error)};
    h.push_back(row.final_step.batch_entropy);
  }
  const bool neg_up = h[0] < h[1] && h[1] < h[2];
  const bool pos_down = h[3] > h[4] && h[4] > h[5];
  return {neg_up && pos_down,
          fmt::format("w- sweep {:.4f} < {:.4f} < {:.4f} {}; w+ sweep {:.4f} > {:.4f} > {:.4f} {}", h[0],
                      h[1], h[2], neg_up ? "ok" : "FAIL", h[3], h[4], h[5], pos_down ? "ok" : "FAIL")};
}

// 9. Best-of-k is monotone on every prompt.
Outcome best_of_k() {
  SyntheticTask task;
  task.count = 100;
  const auto data = task.generate();
  RewardPipeline pipe{RewardConfig{}};
  EvalConfig cfg;
  cfg.ks = {1, 4, 8};
  const auto rep = evaluate(ToyPolicy::random(PolicyInit{}), data, cfg, pipe);
  std::size_t bad = 0, ok_rows = 0;
  for (const auto& row : rep.rows) {
    if (!row.ok) {
      ++bad;
      continue;
    }
    ++ok_rows;
    const auto& rl = row.best_rouge;
    const auto& rr = row.best_rerank;
    if (!(rl[0] <= rl[1] && rl[1] <= rl[2] && rr[0] <= rr[1] && rr[1] <= rr[2])) ++bad;
  }
  return {bad == 0 && ok_rows == 100,
          fmt::format("{} prompts, {} violations; RL@1/4/8 = {:.3f}/{:.3f}/{:.3f}", ok_rows, bad,
                      rep.rl_at[0], rep.rl_at[1], rep.rl_at[2])};
}

// 10. Two full train commands give byte-identical step logs.
Outcome determinism() {
  testing::TempDir dir("acceptance");
  for (const char* name : {"first", "second"}) {
    const int rc = cli::run({"eapo", "train", "--strategy", "eapo", "--seed", "11", "--out",
                             (dir / name).string()});
    if (rc != cli::kOk) return {false, fmt::format("train exited {}", rc)};
  }
  const auto a = testing::slurp(dir / "first/steps.csv");
  const auto b = testing::slurp(dir / "second/steps.csv");
  const auto lines = std::count(a.begin(), a.end(), '\n');
  return {!a.empty() && a == b, fmt::format("{} log lines, {}", lines, a == b ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "partition/advantage suite", 5, partition_suite},
      {2, "telescoping equivalence", 2, telescoping},
      {3, "weight direction and scale invariance", 0, weight_direction},
      {4, "gradient vs finite differences", 60, gradient_check},
      {5, "Rouge-L oracle equivalence", 0, rouge_oracle},
      {6, "strategy preset equivalence", 120, preset_equivalence},
      {7, "PSR/NSR/EAPO entropy dynamics", 540, dynamics},
      {8, "weight sweep ordering", 900, sweep_ordering},
      {9, "best-of-k monotonicity", 0, best_of_k},
      {10, "train determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.limit_s > 0 && secs > c.limit_s) {
      o.pass = false;
      o.detail += fmt::format("; over the {:.0f} s budget", c.limit_s);
    }
    fmt::print("criterion {:>2} {} {} [{:.2f} s] {}\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
               o.detail);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
             criteria.size());
  return failed == 0 ? 0 : 1;
}
