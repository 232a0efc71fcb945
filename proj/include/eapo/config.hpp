#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eapo/evaluation.hpp"
#include "eapo/synthetic.hpp"
#include "eapo/trainer.hpp"

namespace eapo {

struct DataConfig {
  std::optional<std::string> dataset;  // JSONL path; synthetic corpus when unset
  SyntheticTask synthetic;
};

// Everything a command can be configured with. Serialized as one JSON
// document:
//   strategy, weights{w_pos,w_neg}, eapo{w0,w_min,w_max,w_neg},
//   train{...}, policy{...}, reward{alpha{...}, rerank, judge, ...},
//   data{dataset, synthetic{...}}, eval{ks, seed, temperature, max_len, judge}
struct RunConfig {
  TrainConfig train;
  DataConfig data;
  EvalConfig eval;
};

nlohmann::ordered_json config_to_json(const RunConfig& cfg, bool redact_secrets = false);

// Reads a complete or partial document on top of the defaults. Unknown keys
// and wrong types raise ConfigError naming the dotted field path.
RunConfig config_from_json(const nlohmann::json& doc);

// Deep-merges `patch` into `base` (both config documents), rejecting keys
// that `base` does not have.
void merge_config(nlohmann::ordered_json& base, const nlohmann::json& patch);

// "train.learning_rate=0.1" -> sets that field. The value is parsed as JSON
// when possible, otherwise taken as a string.
void apply_override(nlohmann::ordered_json& doc, std::string_view assignment);

// Loads the dataset named by the config, or generates the synthetic corpus.
std::vector<Prompt> load_dataset(const DataConfig& data);

// "(1,0),(0,1)" or "paper-grid". Throws ConfigError when malformed.
std::vector<SweepCell> parse_grid(std::string_view spec);
const std::vector<SweepCell>& paper_grid();

}  // namespace eapo
