#include "eapo/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "eapo/config.hpp"
#include "eapo/dataset.hpp"
#include "eapo/errors.hpp"
#include "eapo/evaluation.hpp"
#include "eapo/svg_chart.hpp"
#include "eapo/trainer.hpp"

#ifndef EAPO_VERSION
#define EAPO_VERSION "0.1.0-unknown"
#endif

namespace eapo::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string version() { return EAPO_VERSION; }

namespace {

std::shared_ptr<spdlog::logger> log() {
  static auto logger = [] {
    auto l = spdlog::stderr_color_mt("eapo");
    l->set_pattern("[%l] %v");
    return l;
  }();
  return logger;
}

std::string utc_now() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::string strategy;
  std::optional<double> w_pos;
  std::optional<double> w_neg;
  std::optional<std::size_t> steps;
  std::optional<std::uint64_t> seed;
  std::string dataset;
  std::string out;
  std::optional<std::size_t> workers;
  bool deterministic = false;
};

void add_common(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--config", o.config_path, "JSON config file");
  cmd.add_option("--set", o.sets, "Override a config field: dotted.path=value")->take_all();
  cmd.add_option("--strategy", o.strategy, "grpo|psr|nsr|fixed|w-reinforce|eapo");
  cmd.add_option("--w-pos", o.w_pos, "Positive weight for --strategy fixed");
  cmd.add_option("--w-neg", o.w_neg, "Negative weight for --strategy fixed");
  cmd.add_option("--steps", o.steps, "Optimizer steps (overrides epochs)");
  cmd.add_option("--seed", o.seed, "Run seed (training, policy init and evaluation)");
  cmd.add_option("--dataset", o.dataset, "JSONL dataset (default: synthetic corpus)");
  cmd.add_option("--out", o.out, "Output directory (default: $EAPO_OUTPUT_DIR)");
  cmd.add_option("--workers", o.workers, "Sampling/scoring threads");
  cmd.add_flag("--deterministic", o.deterministic, "Omit timestamps from artifacts");
}

json read_json_file(const fs::path& path, const std::string& flag) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot read '{}'", flag, path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: '{}' is not valid JSON ({})", flag, path.string(), e.what()));
  }
}

RunConfig resolve_config(const CommonOptions& o) {
  ojson doc = config_to_json(RunConfig{});
  if (!o.config_path.empty()) merge_config(doc, read_json_file(o.config_path, "--config"));
  for (const auto& s : o.sets) apply_override(doc, s);
  if (!o.strategy.empty()) doc["strategy"] = o.strategy;
  if (o.w_pos || o.w_neg) {
    if (doc["strategy"] != "fixed") {
      throw ConfigError("--w-pos/--w-neg only apply to --strategy fixed");
    }
    if (o.w_pos) doc["weights"]["w_pos"] = *o.w_pos;
    if (o.w_neg) doc["weights"]["w_neg"] = *o.w_neg;
  }
  if (o.steps) doc["train"]["steps"] = *o.steps;
  if (o.seed) {
    doc["train"]["seed"] = *o.seed;
    doc["policy"]["seed"] = *o.seed;
    doc["eval"]["seed"] = *o.seed;
  }
  if (o.workers) doc["train"]["workers"] = *o.workers;
  if (!o.dataset.empty()) {
    if (!fs::is_regular_file(o.dataset)) {
      throw ConfigError(fmt::format("--dataset: no such file '{}'", o.dataset));
    }
    doc["data"]["dataset"] = o.dataset;
  } else if (doc["data"]["dataset"].is_string() &&
             !fs::is_regular_file(doc["data"]["dataset"].get<std::string>())) {
    throw ConfigError(fmt::format("data.dataset: no such file '{}'",
                                  doc["data"]["dataset"].get<std::string>()));
  }
  auto cfg = config_from_json(doc);
  cfg.train.reward.apply_environment();
  cfg.train.reward.validate();
  return cfg;
}

fs::path output_dir(const std::string& flag, const std::string& fallback) {
  fs::path dir;
  if (!flag.empty()) {
    dir = flag;
  } else if (const char* env = std::getenv("EAPO_OUTPUT_DIR"); env && *env) {
    dir = fs::path(env) / fallback;
  } else {
    dir = fs::path("eapo-runs") / fallback;
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ArtifactError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw ArtifactError(fmt::format("error writing '{}'", path.string()));
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

ojson make_manifest(const std::string& command, const std::vector<std::string>& args,
                    const RunConfig& cfg, const fs::path& out, bool deterministic) {
  ojson m;
  m["command"] = command;
  m["args"] = args;
  m["config"] = config_to_json(cfg, true);
  m["inputs"] = {{"dataset", cfg.data.dataset ? ojson(*cfg.data.dataset) : ojson("synthetic")}};
  m["output_dir"] = out.string();
  m["seed"] = cfg.train.seed;
  m["version"] = version();
  if (!deterministic) m["started_at"] = utc_now();
  m["status"] = "running";
  return m;
}

void write_run_metadata(const fs::path& dir, const RunConfig& cfg) {
  ojson meta;
  meta["version"] = version();
  meta["seed"] = cfg.train.seed;
  meta["config"] = config_to_json(cfg, true);
  write_json(dir / "run.json", meta);
}

void finish_manifest(ojson& m, const fs::path& dir, const std::string& status, bool deterministic) {
  m["status"] = status;
  if (!deterministic) m["finished_at"] = utc_now();
  write_json(dir / "manifest.json", m);
}

void write_failure(const fs::path& dir, const std::string& kind, const std::string& message) {
  ojson f{{"error", kind}};
  const auto parsed = json::parse(message, nullptr, false);
  if (!parsed.is_discarded() && parsed.is_object()) {
    f["diagnostic"] = parsed;
  } else {
    f["message"] = message;
  }
  write_json(dir / "failure.json", f);
}

// Step logs written row by row so a failed run keeps its partial log.
class StepLogWriter {
 public:
  explicit StepLogWriter(const fs::path& dir)
      : csv_(dir / "steps.csv", std::ios::binary), jsonl_(dir / "steps.jsonl", std::ios::binary) {
    if (!csv_ || !jsonl_) throw ArtifactError(fmt::format("cannot write step logs in '{}'", dir.string()));
    csv_ << step_csv_header() << '\n';
    csv_.flush();
  }

  void operator()(const StepRecord& r) {
    csv_ << step_csv_row(r) << '\n';
    jsonl_ << step_json_line(r) << '\n';
    csv_.flush();
    jsonl_.flush();
  }

 private:
  std::ofstream csv_;
  std::ofstream jsonl_;
};

void write_step_logs(const fs::path& dir, const std::vector<StepRecord>& steps) {
  StepLogWriter w(dir);
  for (const auto& s : steps) w(s);
}

int cmd_train(const CommonOptions& o, const std::vector<std::string>& args) {
  const auto cfg = resolve_config(o);
  const auto dir = output_dir(o.out, "train");
  auto manifest = make_manifest("train", args, cfg, dir, o.deterministic);
  write_json(dir / "manifest.json", manifest);
  write_run_metadata(dir, cfg);

  const auto dataset = load_dataset(cfg.data);
  const RewardPipeline rewards(cfg.train.reward);
  log()->info("train: strategy {} on {} prompts, {} steps -> {}",
              strategy_name(cfg.train.strategy.kind), dataset.size(),
              total_steps(cfg.train, dataset.size()), dir.string());
  StepLogWriter writer(dir);
  try {
    const auto result = train(cfg.train, dataset, rewards, [&](const StepRecord& r) { writer(r); });
    save_policy(dir / "policy.json", result.policy);
    finish_manifest(manifest, dir, "ok", o.deterministic);
    const auto& last = result.steps.back();
    fmt::print("steps={} h0={:.6f} final_entropy={:.6f} ratio={:.4f} reward={:.4f} length={:.2f}\n",
               result.steps.size(), result.h0, last.batch_entropy, last.entropy_ratio,
               last.mean_reward, last.mean_response_length);
    return kOk;
  } catch (const TrainingError& e) {
    write_failure(dir, "training", e.what());
    finish_manifest(manifest, dir, "failed", o.deterministic);
    throw;
  } catch (const ScoringError& e) {
    write_failure(dir, "scoring", e.what());
    finish_manifest(manifest, dir, "failed", o.deterministic);
    throw;
  }
}

std::string cell_dir_name(std::size_t i, const SweepCell& c) {
  return fmt::format("cell-{:02d}_wp{}_wn{}", i, c.w_pos, c.w_neg);
}

int cmd_sweep(const CommonOptions& o, const std::string& grid_spec, bool with_eval,
              const std::vector<std::string>& args) {
  const auto grid = parse_grid(grid_spec);
  const auto cfg = resolve_config(o);
  const auto dir = output_dir(o.out, "sweep");
  auto manifest = make_manifest("sweep", args, cfg, dir, o.deterministic);
  manifest["grid"] = json::array();
  for (const auto& c : grid) manifest["grid"].push_back({c.w_pos, c.w_neg});
  write_json(dir / "manifest.json", manifest);
  write_run_metadata(dir, cfg);

  const auto dataset = load_dataset(cfg.data);
  const RewardPipeline rewards(cfg.train.reward);
  std::map<std::size_t, EvalReport> evals;
  const auto rows = sweep(cfg.train, grid, dataset, rewards,
                          [&](std::size_t i, const SweepCell& cell, const TrainResult& result) {
                            const auto cell_dir = dir / cell_dir_name(i, cell);
                            fs::create_directories(cell_dir);
                            write_step_logs(cell_dir, result.steps);
                            save_policy(cell_dir / "policy.json", result.policy);
                            auto cell_cfg = cfg;
                            cell_cfg.train.strategy = ShapingStrategy::fixed_weights(cell.w_pos, cell.w_neg);
                            write_run_metadata(cell_dir, cell_cfg);
                            if (with_eval) evals[i] = evaluate(result.policy, dataset, cfg.eval, rewards);
                            log()->info("cell {} ({}, {}): final entropy {:.4f}", i, cell.w_pos,
                                        cell.w_neg, result.steps.back().batch_entropy);
                          });

  std::vector<std::string> header{"cell", "w_pos", "w_neg", "status", "h0", "final_entropy",
                                  "entropy_ratio", "mean_reward", "mean_response_length"};
  std::vector<std::string> eval_cols;
  if (with_eval) {
    eval_cols = {"Rouge-L", "Reranker"};
    if (cfg.eval.judge) eval_cols.push_back("LAAJ");
    for (auto k : cfg.eval.ks) {
      eval_cols.push_back(fmt::format("RL@{}", k));
      eval_cols.push_back(fmt::format("RR@{}", k));
    }
    eval_cols.push_back("Avg");
    header.insert(header.end(), eval_cols.begin(), eval_cols.end());
  }
  header.push_back("error");

  std::vector<std::vector<std::string>> table;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::vector<std::string> line{std::to_string(i), fmt::format("{}", r.cell.w_pos),
                                  fmt::format("{}", r.cell.w_neg), r.ok ? "ok" : "failed"};
    if (r.ok) {
      ++ok;
      const auto& f = r.final_step;
      for (double v : {r.h0, f.batch_entropy, f.entropy_ratio, f.mean_reward, f.mean_response_length}) {
        line.push_back(fmt::format("{}", v));
      }
      if (with_eval) {
        const auto& rep = evals.at(i);
        for (const auto& c : eval_cols) {
          line.push_back(fmt::format("{}", c == "Avg" ? rep.avg : rep.column(c)));
        }
      }
      line.emplace_back();
    } else {
      line.insert(line.end(), 5 + eval_cols.size(), "");
      std::string err = r.error;
      for (auto& ch : err) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      line.push_back(err);
    }
    table.push_back(std::move(line));
  }

  std::string csv = fmt::format("{}\n", fmt::join(header, ","));
  for (const auto& l : table) csv += fmt::format("{}\n", fmt::join(l, ","));
  write_text(dir / "comparison.csv", csv);

  std::vector<std::size_t> widths(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
  auto shown = [](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    return (!s.empty() && end && *end == '\0') ? fmt::format("{:.4g}", v) : s;
  };
  for (const auto& l : table) {
    for (std::size_t c = 0; c < l.size(); ++c) widths[c] = std::max(widths[c], shown(l[c]).size());
  }
  std::string text;
  for (std::size_t c = 0; c < header.size(); ++c) text += fmt::format("{:>{}}  ", header[c], widths[c]);
  text += "\n";
  for (const auto& l : table) {
    for (std::size_t c = 0; c < l.size(); ++c) text += fmt::format("{:>{}}  ", shown(l[c]), widths[c]);
    text += "\n";
  }
  write_text(dir / "comparison.txt", text);
  fmt::print("{}", text);

  finish_manifest(manifest, dir, ok == rows.size() ? "ok" : (ok ? "partial" : "failed"),
                  o.deterministic);
  if (ok == 0) {
    log()->error("every sweep cell failed");
    return kRuntime;
  }
  return kOk;
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || item.empty() || v < 1 || item[0] == '-') {
      throw ConfigError(fmt::format("--k: '{}' is not a positive integer", item));
    }
    ks.push_back(static_cast<std::size_t>(v));
  }
  if (ks.empty()) throw ConfigError("--k: at least one value required");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

int cmd_eval(const CommonOptions& o, const std::string& policy_path, const std::string& ks_text,
             std::optional<bool> judge, const std::vector<std::string>& args) {
  auto cfg = resolve_config(o);
  if (!ks_text.empty()) cfg.eval.ks = parse_ks(ks_text);
  if (judge) cfg.eval.judge = *judge;
  cfg.eval.validate();
  const auto policy = load_policy(policy_path);
  const auto dir = output_dir(o.out, "eval");
  auto manifest = make_manifest("eval", args, cfg, dir, o.deterministic);
  manifest["inputs"]["policy"] = policy_path;
  write_json(dir / "manifest.json", manifest);

  const auto dataset = load_dataset(cfg.data);
  const RewardPipeline rewards(cfg.train.reward);
  const auto report = evaluate(policy, dataset, cfg.eval, rewards);
  write_json(dir / "eval.json", report_to_json(report));
  const auto table = report_table(report);
  write_text(dir / "eval.txt", table);
  std::ofstream rows(dir / "eval_rows.csv", std::ios::binary);
  write_rows_csv(rows, report);
  finish_manifest(manifest, dir, "ok", o.deterministic);
  fmt::print("{}", table);
  if (report.failures > 0) log()->warn("{} prompt(s) failed to score", report.failures);
  return kOk;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_flag,
               bool deterministic) {
  if (run_dirs.empty()) throw ConfigError("report: at least one run directory is required");
  struct Run {
    std::string name;
    std::vector<StepRecord> steps;
  };
  std::vector<Run> runs;
  std::map<std::string, int> seen;
  for (const auto& d : run_dirs) {
    const fs::path path = fs::path(d) / "steps.csv";
    try {
      std::ifstream in(path);
      if (!in) throw ArtifactError(fmt::format("cannot open '{}'", path.string()));
      auto steps = read_step_csv(in);
      if (steps.empty()) throw ArtifactError(fmt::format("'{}' has no rows", path.string()));
      std::string name = fs::path(d).lexically_normal().filename().string();
      if (name.empty()) name = fs::path(d).lexically_normal().parent_path().filename().string();
      if (name.empty()) name = d;
      if (seen[name]++ > 0) name += fmt::format(" ({})", seen[name]);
      runs.push_back({name, std::move(steps)});
    } catch (const ArtifactError& e) {
      log()->warn("skipping {}: {}", d, e.what());
    }
  }
  if (runs.empty()) throw ArtifactError("report: no readable step log among the given runs");

  const auto dir = output_dir(out_flag, "report");
  const std::optional<std::string> stamp =
      deterministic ? std::nullopt : std::optional<std::string>(utc_now());
  struct Panel {
    const char* file;
    const char* title;
    const char* y_label;
    double StepRecord::*field;
  };
  const Panel panels[] = {
      {"entropy.svg", "Batch entropy", "entropy (nats)", &StepRecord::batch_entropy},
      {"reward.svg", "Mean reward", "reward", &StepRecord::mean_reward},
      {"length.svg", "Mean response length", "tokens", &StepRecord::mean_response_length},
      {"w_pos.svg", "Positive weight", "w+", &StepRecord::w_pos},
  };
  for (const auto& p : panels) {
    std::vector<Series> series;
    for (const auto& r : runs) {
      Series s{r.name, {}};
      for (const auto& st : r.steps) s.points.emplace_back(static_cast<double>(st.step), st.*(p.field));
      series.push_back(std::move(s));
    }
    write_text(dir / p.file, render_line_chart({p.title, "step", p.y_label, 720, 420, stamp}, series));
  }
  std::string merged = "run," + step_csv_header() + "\n";
  for (const auto& r : runs) {
    for (const auto& st : r.steps) merged += r.name + "," + step_csv_row(st) + "\n";
  }
  write_text(dir / "merged.csv", merged);
  fmt::print("rendered {} run(s) into {}\n", runs.size(), dir.string());
  return kOk;
}

int cmd_export(const std::string& out, const SyntheticTask& task) {
  if (out.empty()) throw ConfigError("export-corpus: --out is required");
  save_jsonl(out, task.generate());
  fmt::print("wrote {} prompts to {}\n", task.count, out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Entropy-adaptive policy optimization lab"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  CommonOptions train_opts, sweep_opts, eval_opts;
  auto* train_cmd = app.add_subcommand("train", "Train the toy policy with one strategy");
  add_common(*train_cmd, train_opts);

  auto* sweep_cmd = app.add_subcommand("sweep", "One fixed-weight run per (w+, w-) cell");
  add_common(*sweep_cmd, sweep_opts);
  std::string grid;
  bool sweep_eval = false;
  sweep_cmd->add_option("--grid", grid, "\"(w+,w-),(w+,w-)...\" or paper-grid")->required();
  sweep_cmd->add_flag("--eval", sweep_eval, "Evaluate each cell's final policy");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a policy snapshot");
  add_common(*eval_cmd, eval_opts);
  std::string policy_path, ks;
  std::optional<bool> judge;
  eval_cmd->add_option("--policy", policy_path, "policy.json snapshot")->required();
  eval_cmd->add_option("--k", ks, "Sample counts for best-of-k, e.g. 1,4,8");
  eval_cmd->add_flag("--judge,!--no-judge", judge, "Also score with the response-rubric judge");

  auto* report_cmd = app.add_subcommand("report", "Render training curves for run directories");
  std::vector<std::string> run_dirs;
  std::string report_out;
  bool report_det = false;
  report_cmd->add_option("runs", run_dirs, "Run directories containing steps.csv");
  report_cmd->add_option("--out", report_out, "Output directory");
  report_cmd->add_flag("--deterministic", report_det, "Omit the timestamp from SVGs");

  auto* export_cmd = app.add_subcommand("export-corpus", "Write the synthetic corpus as JSONL");
  std::string export_out;
  SyntheticTask task;
  export_cmd->add_option("--out", export_out, "Destination .jsonl")->required();
  export_cmd->add_option("--seed", task.seed, "Corpus seed");
  export_cmd->add_option("--count", task.count, "Number of prompts");
  export_cmd->add_option("--min-symbols", task.min_symbols);
  export_cmd->add_option("--max-symbols", task.max_symbols);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_opts, args);
    if (*sweep_cmd) return cmd_sweep(sweep_opts, grid, sweep_eval, args);
    if (*eval_cmd) return cmd_eval(eval_opts, policy_path, ks, judge, args);
    if (*report_cmd) return cmd_report(run_dirs, report_out, report_det);
    if (*export_cmd) return cmd_export(export_out, task);
    return kUsage;
  } catch (const ConfigError& e) {
    log()->error("{}", e.what());
    return kUsage;
  } catch (const ArtifactError& e) {
    log()->error("{}", e.what());
    return kArtifact;
  } catch (const InputError& e) {
    log()->error("{}", e.what());
    return kArtifact;
  } catch (const std::exception& e) {
    log()->error("{}", e.what());
    return kRuntime;
  }
}

}  // namespace eapo::cli
