#include "eapo/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <regex>

#include <fmt/format.h>

#include "eapo/dataset.hpp"
#include "eapo/errors.hpp"

namespace eapo {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

ojson endpoint_json(const RemoteEndpoint& e, bool redact) {
  return ojson{{"url", e.url},
               {"api_key", redact && !e.api_key.empty() ? "<redacted>" : e.api_key},
               {"timeout_ms", e.timeout_ms},
               {"retries", e.retries},
               {"max_in_flight", e.max_in_flight}};
}

std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const char* type_label(const json& j) {
  if (j.is_null()) return "null";
  if (j.is_boolean()) return "a boolean";
  if (j.is_number()) return "a number";
  if (j.is_string()) return "a string";
  if (j.is_array()) return "an array";
  return "an object";
}

bool same_kind(const ojson& base, const json& patch) {
  if (base.is_null() || patch.is_null()) return true;  // optional fields
  if (base.is_number()) return patch.is_number();
  if (base.is_boolean()) return patch.is_boolean();
  if (base.is_string()) return patch.is_string();
  if (base.is_array()) return patch.is_array();
  return base.is_object() && patch.is_object();
}

void merge_at(ojson& base, const json& patch, const std::string& path) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const auto field = join_path(path, it.key());
    if (!base.contains(it.key())) throw ConfigError(fmt::format("unknown config field '{}'", field));
    auto& target = base[it.key()];
    if (!same_kind(target, it.value())) {
      throw ConfigError(fmt::format("config field '{}' must be {}, got {}", field,
                                    type_label(target), type_label(it.value())));
    }
    if (target.is_object() && it.value().is_object()) {
      merge_at(target, it.value(), field);
    } else {
      target = it.value();
    }
  }
}

// Typed access to a merged document with field-level error messages.
class Reader {
 public:
  explicit Reader(const ojson& doc) : doc_(doc) {}

  const ojson& at(const std::string& path) const {
    const ojson* node = &doc_;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!node->is_object() || !node->contains(key)) {
        throw ConfigError(fmt::format("missing config field '{}'", path));
      }
      node = &(*node)[key];
      if (dot == std::string::npos) return *node;
      start = dot + 1;
    }
  }

  double number(const std::string& path) const {
    const auto& j = at(path);
    if (!j.is_number()) throw ConfigError(fmt::format("config field '{}' must be a number", path));
    return j.get<double>();
  }

  std::uint64_t unsigned_int(const std::string& path) const {
    const auto& j = at(path);
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
    if (j.is_number_float()) {
      const double d = j.get<double>();
      if (d >= 0.0 && d == static_cast<double>(static_cast<std::uint64_t>(d))) {
        return static_cast<std::uint64_t>(d);
      }
    }
    throw ConfigError(fmt::format("config field '{}' must be a non-negative integer", path));
  }

  std::size_t count(const std::string& path) const {
    return static_cast<std::size_t>(unsigned_int(path));
  }

  int integer(const std::string& path) const {
    const auto& j = at(path);
    if (!j.is_number_integer()) throw ConfigError(fmt::format("config field '{}' must be an integer", path));
    return j.get<int>();
  }

  bool boolean(const std::string& path) const {
    const auto& j = at(path);
    if (!j.is_boolean()) throw ConfigError(fmt::format("config field '{}' must be a boolean", path));
    return j.get<bool>();
  }

  std::string string(const std::string& path) const {
    const auto& j = at(path);
    if (!j.is_string()) throw ConfigError(fmt::format("config field '{}' must be a string", path));
    return j.get<std::string>();
  }

  template <typename Parse>
  auto parsed(const std::string& path, Parse&& parse) const {
    const auto s = string(path);
    try {
      return parse(s);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("config field '{}': {}", path, e.what()));
    }
  }

  RemoteEndpoint endpoint(const std::string& path) const {
    RemoteEndpoint e;
    e.url = string(path + ".url");
    e.api_key = string(path + ".api_key");
    e.timeout_ms = integer(path + ".timeout_ms");
    e.retries = integer(path + ".retries");
    e.max_in_flight = integer(path + ".max_in_flight");
    if (e.timeout_ms <= 0) throw ConfigError(fmt::format("config field '{}.timeout_ms' must be > 0", path));
    if (e.retries < 0) throw ConfigError(fmt::format("config field '{}.retries' must be >= 0", path));
    if (e.max_in_flight < 1 || e.max_in_flight > 1024) {
      throw ConfigError(fmt::format("config field '{}.max_in_flight' must be in [1, 1024]", path));
    }
    return e;
  }

 private:
  const ojson& doc_;
};

}  // namespace

ojson config_to_json(const RunConfig& cfg, bool redact_secrets) {
  const auto& t = cfg.train;
  const auto& s = t.strategy;
  ojson j;
  j["strategy"] = strategy_name(s.kind);
  j["weights"] = {{"w_pos", s.fixed.w_pos}, {"w_neg", s.fixed.w_neg}};
  j["eapo"] = {{"w0", s.eapo.w0}, {"w_min", s.eapo.w_min}, {"w_max", s.eapo.w_max},
               {"w_neg", s.eapo.w_neg}};
  j["train"] = {{"batch_prompts", t.batch_prompts},
                {"rollouts_per_prompt", t.rollouts_per_prompt},
                {"epochs", t.epochs},
                {"steps", t.steps ? ojson(*t.steps) : ojson(nullptr)},
                {"max_len", t.max_len},
                {"inner_epochs", t.inner_epochs},
                {"optimizer", optimizer_name(t.optimizer)},
                {"learning_rate", t.learning_rate},
                {"adam_beta1", t.adam_beta1},
                {"adam_beta2", t.adam_beta2},
                {"adam_eps", t.adam_eps},
                {"kl_beta", t.kl_beta},
                {"clip_eps", t.clip_eps},
                {"eps_adv", t.eps_adv},
                {"seed", t.seed},
                {"workers", t.workers}};
  j["policy"] = {{"order", t.policy.order},         {"temperature", t.policy.temperature},
                 {"init_scale", t.policy.init_scale}, {"tag_bias", t.policy.tag_bias},
                 {"eos_bias", t.policy.eos_bias},   {"pad_bias", t.policy.pad_bias},
                 {"seed", t.policy.seed}};
  const auto& r = t.reward;
  ojson tags = ojson::array();
  for (const auto& [open, close] : r.required_tags) tags.push_back({open, close});
  j["reward"] = {{"alpha",
                  {{"format", r.weights.alpha[0]},
                   {"rouge", r.weights.alpha[1]},
                   {"rerank", r.weights.alpha[2]},
                   {"judge", r.weights.alpha[3]}}},
                 {"required_tags", tags},
                 {"rerank", scorer_name(r.rerank)},
                 {"judge", scorer_name(r.judge)},
                 {"judge_rubric", rubric_name(r.judge_rubric)},
                 {"rerank_endpoint", endpoint_json(r.rerank_endpoint, redact_secrets)},
                 {"judge_endpoint", endpoint_json(r.judge_endpoint, redact_secrets)}};
  j["data"] = {{"dataset", cfg.data.dataset ? ojson(*cfg.data.dataset) : ojson(nullptr)},
               {"synthetic",
                {{"seed", cfg.data.synthetic.seed},
                 {"count", cfg.data.synthetic.count},
                 {"min_symbols", cfg.data.synthetic.min_symbols},
                 {"max_symbols", cfg.data.synthetic.max_symbols}}}};
  j["eval"] = {{"ks", cfg.eval.ks},
               {"seed", cfg.eval.seed},
               {"temperature", cfg.eval.temperature},
               {"max_len", cfg.eval.max_len},
               {"judge", cfg.eval.judge}};
  return j;
}

void merge_config(ojson& base, const json& patch) {
  if (!patch.is_object()) throw ConfigError("config document must be a JSON object");
  merge_at(base, patch, "");
}

RunConfig config_from_json(const json& doc) {
  ojson merged = config_to_json(RunConfig{});
  merge_config(merged, doc);
  const Reader in(merged);

  RunConfig cfg;
  auto& t = cfg.train;
  const auto name = in.string("strategy");
  const auto kind = in.parsed("strategy", [](const std::string& s) { return parse_strategy_kind(s); });
  EapoConfig eapo{in.number("eapo.w0"), in.number("eapo.w_min"), in.number("eapo.w_max"),
                  in.number("eapo.w_neg")};
  switch (kind) {
    case StrategyKind::kGrpo: t.strategy = ShapingStrategy::grpo(); break;
    case StrategyKind::kPsr: t.strategy = ShapingStrategy::psr(); break;
    case StrategyKind::kNsr: t.strategy = ShapingStrategy::nsr(); break;
    case StrategyKind::kFixed:
      t.strategy = name == "w-reinforce"
                       ? ShapingStrategy::w_reinforce()
                       : ShapingStrategy::fixed_weights(in.number("weights.w_pos"),
                                                        in.number("weights.w_neg"));
      break;
    case StrategyKind::kEapo: t.strategy = ShapingStrategy::adaptive(eapo); break;
  }
  t.strategy.eapo = eapo;

  t.batch_prompts = in.count("train.batch_prompts");
  t.rollouts_per_prompt = in.count("train.rollouts_per_prompt");
  t.epochs = in.count("train.epochs");
  if (!in.at("train.steps").is_null()) t.steps = in.count("train.steps");
  t.max_len = in.count("train.max_len");
  t.inner_epochs = in.count("train.inner_epochs");
  t.optimizer = in.parsed("train.optimizer", [](const std::string& s) { return parse_optimizer(s); });
  t.learning_rate = in.number("train.learning_rate");
  t.adam_beta1 = in.number("train.adam_beta1");
  t.adam_beta2 = in.number("train.adam_beta2");
  t.adam_eps = in.number("train.adam_eps");
  t.kl_beta = in.number("train.kl_beta");
  t.clip_eps = in.number("train.clip_eps");
  t.eps_adv = in.number("train.eps_adv");
  t.seed = in.unsigned_int("train.seed");
  t.workers = in.count("train.workers");

  t.policy.order = in.count("policy.order");
  t.policy.temperature = in.number("policy.temperature");
  t.policy.init_scale = in.number("policy.init_scale");
  t.policy.tag_bias = in.number("policy.tag_bias");
  t.policy.eos_bias = in.number("policy.eos_bias");
  t.policy.pad_bias = in.number("policy.pad_bias");
  t.policy.seed = in.unsigned_int("policy.seed");

  auto& r = t.reward;
  r.weights.alpha = {in.number("reward.alpha.format"), in.number("reward.alpha.rouge"),
                     in.number("reward.alpha.rerank"), in.number("reward.alpha.judge")};
  r.required_tags.clear();
  const auto& tags = in.at("reward.required_tags");
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto& pair = tags[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
      throw ConfigError(fmt::format(
          "config field 'reward.required_tags[{}]' must be a pair of strings", i));
    }
    r.required_tags.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
  }
  r.rerank = in.parsed("reward.rerank", [](const std::string& s) { return parse_scorer(s); });
  r.judge = in.parsed("reward.judge", [](const std::string& s) { return parse_scorer(s); });
  r.judge_rubric = in.parsed("reward.judge_rubric", [](const std::string& s) { return parse_rubric(s); });
  r.rerank_endpoint = in.endpoint("reward.rerank_endpoint");
  r.judge_endpoint = in.endpoint("reward.judge_endpoint");

  if (!in.at("data.dataset").is_null()) cfg.data.dataset = in.string("data.dataset");
  cfg.data.synthetic.seed = in.unsigned_int("data.synthetic.seed");
  cfg.data.synthetic.count = in.count("data.synthetic.count");
  cfg.data.synthetic.min_symbols = in.count("data.synthetic.min_symbols");
  cfg.data.synthetic.max_symbols = in.count("data.synthetic.max_symbols");

  cfg.eval.ks.clear();
  const auto& ks = in.at("eval.ks");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!ks[i].is_number_integer() || ks[i].get<std::int64_t>() < 1) {
      throw ConfigError(fmt::format("config field 'eval.ks[{}]' must be an integer >= 1", i));
    }
    cfg.eval.ks.push_back(ks[i].get<std::size_t>());
  }
  cfg.eval.seed = in.unsigned_int("eval.seed");
  cfg.eval.temperature = in.number("eval.temperature");
  cfg.eval.max_len = in.count("eval.max_len");
  cfg.eval.judge = in.boolean("eval.judge");

  t.validate();
  cfg.eval.validate();
  if (cfg.data.synthetic.count < 1) throw ConfigError("config field 'data.synthetic.count' must be >= 1");
  if (cfg.data.synthetic.min_symbols < 1 ||
      cfg.data.synthetic.min_symbols > cfg.data.synthetic.max_symbols) {
    throw ConfigError("config fields 'data.synthetic.min_symbols' <= 'max_symbols' and >= 1 required");
  }
  return cfg;
}

void apply_override(ojson& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError(fmt::format("override '{}' must look like field.path=value", assignment));
  }
  const std::string path(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json patch = value;
  std::size_t end = path.size();
  while (true) {
    const auto dot = path.rfind('.', end - 1);
    const auto start = dot == std::string::npos ? 0 : dot + 1;
    const auto key = path.substr(start, end - start);
    if (key.empty()) throw ConfigError(fmt::format("override path '{}' has an empty component", path));
    patch = json{{key, patch}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  merge_config(doc, patch);
}

std::vector<Prompt> load_dataset(const DataConfig& data) {
  if (data.dataset) return load_jsonl(*data.dataset);
  return data.synthetic.generate();
}

const std::vector<SweepCell>& paper_grid() {
  static const std::vector<SweepCell> grid{{1, 0},    {0, 1},   {1, 1},   {1, 0.05},
                                           {1, 0.1},  {1, 0.2}, {1, 5},   {0.05, 1},
                                           {0.1, 1},  {0.2, 1}, {5, 1}};
  return grid;
}

std::vector<SweepCell> parse_grid(std::string_view spec) {
  if (spec == "paper-grid") return paper_grid();
  static const std::regex cell(R"(\s*\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\)\s*(,|$))");
  std::vector<SweepCell> out;
  const std::string text(spec);
  auto it = text.cbegin();
  std::smatch m;
  auto number = [&](const std::string& s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v) || v < 0.0) {
      throw ConfigError(fmt::format("grid weight '{}' is not a non-negative number", s));
    }
    return v;
  };
  while (it != text.cend()) {
    if (!std::regex_search(it, text.cend(), m, cell, std::regex_constants::match_continuous)) {
      throw ConfigError(fmt::format("malformed grid '{}' (expected \"(w+,w-),(w+,w-)...\" or paper-grid)", spec));
    }
    out.push_back({number(m[1].str()), number(m[2].str())});
    it = m[0].second;
    if (m[3].str().empty()) break;
    if (it == text.cend()) throw ConfigError(fmt::format("malformed grid '{}' (trailing comma)", spec));
  }
  if (out.empty()) throw ConfigError("grid is empty");
  return out;
}

}  // namespace eapo
