#include "eapo/evaluation.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

#include "eapo/errors.hpp"
#include "eapo/judge.hpp"
#include "eapo/seeding.hpp"
#include "eapo/text_metrics.hpp"

namespace eapo {

using json = nlohmann::json;

void EvalConfig::validate() const {
  if (ks.empty()) throw ConfigError("eval: at least one k is required");
  for (auto k : ks) {
    if (k < 1) throw ConfigError("eval: every k must be >= 1");
  }
  if (!std::is_sorted(ks.begin(), ks.end()) ||
      std::adjacent_find(ks.begin(), ks.end()) != ks.end()) {
    throw ConfigError("eval: ks must be strictly increasing");
  }
  if (max_len < 1) throw ConfigError("eval: max_len must be >= 1");
  if (!(temperature >= 0.0)) throw ConfigError("eval: temperature must be >= 0");
}

std::size_t EvalConfig::max_k() const { return ks.back(); }

EvalReport evaluate(const ToyPolicy& policy, std::span<const Prompt> dataset, const EvalConfig& cfg,
                    const RewardPipeline& rewards) {
  cfg.validate();
  const ToyPolicy sampler = policy.with_temperature(cfg.temperature);
  EvalReport report;
  report.ks = cfg.ks;
  for (std::size_t p = 0; p < dataset.size(); ++p) {
    const auto& prompt = dataset[p];
    EvalRow row;
    row.id = prompt.id;
    try {
      const auto samples = sample_responses(sampler, prompt, cfg.max_k(), cfg.max_len,
                                            mix_seed(cfg.seed, {0x6576616cull, p}));
      std::vector<double> rouge, rerank;
      for (const auto& s : samples) {
        rouge.push_back(rouge_l_f1(s.text(), prompt.reference));
        rerank.push_back(rewards.reranker().score(prompt.reference, s.text()));
      }
      row.rouge = rouge.front();
      row.rerank = rerank.front();
      if (cfg.judge) {
        row.judge = judge_score(prompt.question, samples.front().text(), prompt.reference,
                                Rubric::kResponse, rewards.judge());
      }
      for (auto k : cfg.ks) {
        row.best_rouge.push_back(*std::max_element(rouge.begin(), rouge.begin() + k));
        row.best_rerank.push_back(*std::max_element(rerank.begin(), rerank.begin() + k));
      }
    } catch (const ScoringError& e) {
      row = EvalRow{};
      row.id = prompt.id;
      row.ok = false;
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  aggregate(report);
  return report;
}

void aggregate(EvalReport& report) {
  const std::size_t nk = report.ks.size();
  report.failures = 0;
  report.mean_rouge = report.mean_rerank = 0.0;
  report.rl_at.assign(nk, 0.0);
  report.rr_at.assign(nk, 0.0);
  double judge_sum = 0.0;
  std::size_t ok = 0, judged = 0;
  for (const auto& row : report.rows) {
    if (!row.ok) {
      ++report.failures;
      continue;
    }
    ++ok;
    report.mean_rouge += row.rouge;
    report.mean_rerank += row.rerank;
    if (row.judge) {
      judge_sum += *row.judge;
      ++judged;
    }
    for (std::size_t k = 0; k < nk; ++k) {
      report.rl_at[k] += row.best_rouge[k];
      report.rr_at[k] += row.best_rerank[k];
    }
  }
  if (ok > 0) {
    const auto n = static_cast<double>(ok);
    report.mean_rouge /= n;
    report.mean_rerank /= n;
    for (std::size_t k = 0; k < nk; ++k) {
      report.rl_at[k] /= n;
      report.rr_at[k] /= n;
    }
  }
  report.mean_judge = judged > 0 ? std::optional<double>(judge_sum / static_cast<double>(judged))
                                 : std::nullopt;

  report.avg_columns = {"Rouge-L", "Reranker"};
  if (report.mean_judge) report.avg_columns.push_back("LAAJ");
  if (nk > 0 && report.ks.back() > 1) {
    report.avg_columns.push_back(fmt::format("RL@{}", report.ks.back()));
    report.avg_columns.push_back(fmt::format("RR@{}", report.ks.back()));
  }
  double sum = 0.0;
  for (const auto& c : report.avg_columns) sum += report.column(c);
  report.avg = sum / static_cast<double>(report.avg_columns.size());
}

double EvalReport::column(const std::string& name) const {
  if (name == "Rouge-L") return mean_rouge;
  if (name == "Reranker") return mean_rerank;
  if (name == "LAAJ") {
    if (!mean_judge) throw ConfigError("report has no LAAJ column");
    return *mean_judge;
  }
  for (std::size_t k = 0; k < ks.size(); ++k) {
    if (name == fmt::format("RL@{}", ks[k])) return rl_at[k];
    if (name == fmt::format("RR@{}", ks[k])) return rr_at[k];
  }
  throw ConfigError(fmt::format("report has no column '{}'", name));
}

json report_to_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json jr{{"id", r.id}, {"ok", r.ok}};
    if (!r.ok) {
      jr["error"] = r.error;
    } else {
      jr["rouge"] = r.rouge;
      jr["rerank"] = r.rerank;
      if (r.judge) jr["judge"] = *r.judge;
      jr["best_rouge"] = r.best_rouge;
      jr["best_rerank"] = r.best_rerank;
    }
    rows.push_back(std::move(jr));
  }
  json agg{{"Rouge-L", report.mean_rouge}, {"Reranker", report.mean_rerank}};
  if (report.mean_judge) agg["LAAJ"] = *report.mean_judge;
  for (std::size_t k = 0; k < report.ks.size(); ++k) {
    agg[fmt::format("RL@{}", report.ks[k])] = report.rl_at[k];
    agg[fmt::format("RR@{}", report.ks[k])] = report.rr_at[k];
  }
  agg["Avg"] = report.avg;
  return json{{"format", "eapo-eval-report"},
              {"version", 1},
              {"ks", report.ks},
              {"aggregates", agg},
              {"avg_columns", report.avg_columns},
              {"failures", report.failures},
              {"rows", rows}};
}

EvalReport report_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "eapo-eval-report") {
      throw ArtifactError("not an eapo-eval-report document");
    }
    EvalReport r;
    r.ks = j.at("ks").get<std::vector<std::size_t>>();
    for (const auto& jr : j.at("rows")) {
      EvalRow row;
      row.id = jr.at("id").get<std::string>();
      row.ok = jr.at("ok").get<bool>();
      if (!row.ok) {
        row.error = jr.value("error", "");
      } else {
        row.rouge = jr.at("rouge").get<double>();
        row.rerank = jr.at("rerank").get<double>();
        if (jr.contains("judge")) row.judge = jr.at("judge").get<double>();
        row.best_rouge = jr.at("best_rouge").get<std::vector<double>>();
        row.best_rerank = jr.at("best_rerank").get<std::vector<double>>();
        if (row.best_rouge.size() != r.ks.size() || row.best_rerank.size() != r.ks.size()) {
          throw ArtifactError(fmt::format("row '{}' does not match the k list", row.id));
        }
      }
      r.rows.push_back(std::move(row));
    }
    aggregate(r);
    return r;
  } catch (const json::exception& e) {
    throw ArtifactError(fmt::format("eval report schema mismatch ({})", e.what()));
  }
}

std::string report_table(const EvalReport& report) {
  std::vector<std::pair<std::string, double>> cols{{"Rouge-L", report.mean_rouge},
                                                   {"Reranker", report.mean_rerank}};
  if (report.mean_judge) cols.emplace_back("LAAJ", *report.mean_judge);
  for (std::size_t k = 0; k < report.ks.size(); ++k) {
    cols.emplace_back(fmt::format("RL@{}", report.ks[k]), report.rl_at[k]);
    cols.emplace_back(fmt::format("RR@{}", report.ks[k]), report.rr_at[k]);
  }
  cols.emplace_back("Avg", report.avg);
  std::string header, values;
  for (const auto& [name, v] : cols) {
    header += fmt::format("{:>10}", name);
    values += fmt::format("{:>10.4f}", v);
  }
  std::string out = header + "\n" + values + "\n";
  out += fmt::format("prompts: {}  failures: {}  Avg over: {}\n", report.rows.size(),
                     report.failures, fmt::join(report.avg_columns, ", "));
  return out;
}

void write_rows_csv(std::ostream& out, const EvalReport& report) {
  out << "id,ok,rouge,rerank,judge";
  for (auto k : report.ks) out << ",RL@" << k << ",RR@" << k;
  out << '\n';
  for (const auto& r : report.rows) {
    out << r.id << ',' << (r.ok ? 1 : 0);
    if (!r.ok) {
      out << ",,,";
      for (std::size_t k = 0; k < report.ks.size(); ++k) out << ",,";
      out << '\n';
      continue;
    }
    out << fmt::format(",{},{},{}", r.rouge, r.rerank, r.judge ? fmt::format("{}", *r.judge) : "");
    for (std::size_t k = 0; k < report.ks.size(); ++k) {
      out << fmt::format(",{},{}", r.best_rouge[k], r.best_rerank[k]);
    }
    out << '\n';
  }
}

}  // namespace eapo
