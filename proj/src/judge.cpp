#include "eapo/judge.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <initializer_list>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "eapo/errors.hpp"
#include "eapo/text_metrics.hpp"
#include "eapo/vocab.hpp"

namespace eapo {

namespace {

constexpr std::array<double, 4> kThinkWeights{0.35, 0.30, 0.20, 0.15};
constexpr std::array<double, 5> kResponseWeights{0.30, 0.25, 0.25, 0.10, 0.10};

constexpr std::array<std::string_view, 4> kThinkDimensions{
    "Logical Coherence of Clinical Reasoning", "Accuracy of Medical Knowledge",
    "Adequacy of Differential Diagnosis", "Depth and Organization of Reasoning"};
constexpr std::array<std::string_view, 5> kResponseDimensions{
    "Medical Factual Accuracy", "Diagnostic Completeness", "Clinical Safety",
    "Reasoning Logic and Interpretability", "Expression Clarity and Empathy"};

constexpr std::string_view kThinkTemplate =
    R"(You are a senior clinical medicine expert and a specialist in medical-education assessment. Your task is to evaluate the quality of the **internal reasoning process** of a medical consultation system.

Note: You are required to assess only the model's reasoning process (the content within the <think> tags); the final response delivered to the patient is not subject to evaluation.

[Patient Consultation]
{query}

[Reference Answer (Ground Truth)]
{gold_answer}

[Model's Reasoning Process (to be evaluated)]
{think_content}

Please rate the model's reasoning process along the following four dimensions, each on a 100-point scale.

[Dimension 1: Logical Coherence of Clinical Reasoning — Weight 35%]
[Dimension 2: Accuracy of Medical Knowledge — Weight 30%]
[Dimension 3: Adequacy of Differential Diagnosis — Weight 20%]
[Dimension 4: Depth and Organization of Reasoning — Weight 15%]

Overall Score = Logical Coherence × 0.35 + Medical Knowledge Accuracy × 0.30 + Differential Diagnosis Adequacy × 0.20 + Depth and Organization × 0.15)";

constexpr std::string_view kResponseTemplate =
    R"(You are a senior clinical medicine expert and a specialist in medical-education assessment. Your task is to perform a multi-dimensional evaluation of the response produced by a medical consultation system.

[Patient Consultation Query]
{query}

[Reference Answer (Ground Truth)]
{gold_diagnosis}

[Model Response (To Be Evaluated)]
{response_content}

Please rate the model response along the following five dimensions, with each dimension scored on a 100 scale.

[Dimension 1: Medical Factual Accuracy — Weight 30%]
[Dimension 2: Diagnostic Completeness — Weight 25%]
[Dimension 3: Clinical Safety — Weight 25%]
[Dimension 4: Reasoning Logic and Interpretability — Weight 10%]
[Dimension 5: Expression Clarity and Empathy — Weight 10%]

Overall Score = Medical Factual Accuracy × 0.30 + Diagnostic Completeness × 0.25 + Clinical Safety × 0.25 + Reasoning Logic × 0.10 + Expression Clarity × 0.10)";

// Single pass over the template so placeholder-like text in the values is
// left untouched.
std::string fill_template(std::string_view tmpl,
                          std::initializer_list<std::pair<std::string_view, std::string_view>> values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    bool matched = false;
    if (tmpl[pos] == '{') {
      for (const auto& [key, value] : values) {
        if (tmpl.substr(pos, key.size()) == key) {
          out += value;
          pos += key.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out += tmpl[pos++];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r*");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r*");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

std::string think_or_all(std::string_view text) {
  if (auto t = extract_block(text, kThinkOpenTag, kThinkCloseTag)) return *t;
  return std::string(text);
}

}  // namespace

std::string_view rubric_name(Rubric rubric) {
  return rubric == Rubric::kThink ? "think" : "response";
}

Rubric parse_rubric(std::string_view name) {
  if (name == "think") return Rubric::kThink;
  if (name == "response") return Rubric::kResponse;
  throw ConfigError(fmt::format("unknown rubric '{}' (expected think|response)", name));
}

std::span<const double> rubric_weights(Rubric rubric) {
  if (rubric == Rubric::kThink) return kThinkWeights;
  return kResponseWeights;
}

std::span<const std::string_view> rubric_dimensions(Rubric rubric) {
  if (rubric == Rubric::kThink) return kThinkDimensions;
  return kResponseDimensions;
}

JudgeRequest make_judge_request(std::string question, std::string response, std::string reference,
                                Rubric rubric) {
  JudgeRequest req;
  req.rubric = rubric;
  if (rubric == Rubric::kThink) {
    req.content = extract_block(response, kThinkOpenTag, kThinkCloseTag).value_or("");
  } else {
    req.content = response;
  }
  req.question = std::move(question);
  req.response = std::move(response);
  req.reference = std::move(reference);
  return req;
}

JudgeVerdict make_verdict(Rubric rubric, std::vector<double> dimensions) {
  const auto weights = rubric_weights(rubric);
  if (dimensions.size() != weights.size()) {
    throw ScoringError(fmt::format("{} rubric expects {} dimension scores, got {}",
                                   rubric_name(rubric), weights.size(), dimensions.size()));
  }
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(dimensions[k] >= 0.0 && dimensions[k] <= 100.0)) {
      throw ScoringError(fmt::format("dimension {} score {} outside [0, 100]", k + 1, dimensions[k]));
    }
    num += dimensions[k] * weights[k];
    den += weights[k];
  }
  return JudgeVerdict{std::move(dimensions), std::clamp(num / den / 100.0, 0.0, 1.0)};
}

std::string render_judge_prompt(const JudgeRequest& request) {
  std::string out =
      request.rubric == Rubric::kThink
          ? fill_template(kThinkTemplate, {{"{query}", request.question},
                                           {"{gold_answer}", request.reference},
                                           {"{think_content}", request.content}})
          : fill_template(kResponseTemplate, {{"{query}", request.question},
                                              {"{gold_diagnosis}", request.reference},
                                              {"{response_content}", request.content}});
  const auto n = rubric_weights(request.rubric).size();
  out += fmt::format(
      "\n\nOutput format: write one line per dimension as \"DIMENSION <k>: <score>\" for k = 1..{}, "
      "then a final line \"OVERALL: <number 0-100>\".\n",
      n);
  return out;
}

std::optional<JudgeVerdict> parse_judge_reply(Rubric rubric, std::string_view reply) {
  const auto n = rubric_weights(rubric).size();
  std::vector<std::optional<double>> dims(n);
  std::optional<double> overall;
  std::istringstream lines{std::string(reply)};
  std::string raw;
  while (std::getline(lines, raw)) {
    const auto line = trim(raw);
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    const auto head = trim(line.substr(0, colon));
    const auto value = parse_number(line.substr(colon + 1));
    if (starts_with_ci(head, "OVERALL")) {
      if (!value || *value < 0.0 || *value > 100.0) return std::nullopt;
      overall = value;
    } else if (starts_with_ci(head, "DIMENSION")) {
      const auto idx = parse_number(head.substr(9));
      if (!idx || !value) continue;
      const auto k = static_cast<long>(*idx);
      if (k < 1 || static_cast<std::size_t>(k) > n || static_cast<double>(k) != *idx) continue;
      if (*value < 0.0 || *value > 100.0) return std::nullopt;
      dims[static_cast<std::size_t>(k - 1)] = value;
    }
  }
  if (!overall) return std::nullopt;
  if (std::all_of(dims.begin(), dims.end(), [](const auto& d) { return d.has_value(); })) {
    std::vector<double> v;
    for (const auto& d : dims) v.push_back(*d);
    return make_verdict(rubric, std::move(v));
  }
  return JudgeVerdict{{}, *overall / 100.0};
}

double length_band(std::string_view content, std::string_view target) {
  const auto c = static_cast<double>(utf8_to_scalars(content).size());
  const auto t = static_cast<double>(utf8_to_scalars(target).size());
  if (t == 0.0) return c == 0.0 ? 1.0 : 0.0;
  const double ratio = c / t;
  if (ratio < 0.75) return ratio / 0.75;
  if (ratio <= 1.25) return 1.0;
  return std::max(0.0, (2.5 - ratio) / 1.25);
}

JudgeVerdict MockJudge::judge(const JudgeRequest& request) const {
  const auto& content = request.content;
  std::vector<double> dims;
  if (request.rubric == Rubric::kThink) {
    const auto target = think_or_all(request.reference);
    dims = {100.0 * rouge_l_f1(content, target), 100.0 * trigram_cosine(content, target),
            100.0 * length_band(content, target), 100.0 * format_reward(request.response)};
  } else {
    const auto& target = request.reference;
    const auto c = utf8_to_scalars(content);
    const auto t = utf8_to_scalars(target);
    const double recall =
        c.empty() || t.empty() ? 0.0 : static_cast<double>(lcs_length(c, t)) / static_cast<double>(t.size());
    const auto think = extract_block(content, kThinkOpenTag, kThinkCloseTag);
    const double reasoning = think ? rouge_l_f1(*think, think_or_all(target))
                                   : rouge_l_f1(content, target);
    dims = {100.0 * rouge_l_f1(content, target), 100.0 * recall,
            100.0 * trigram_cosine(content, target), 100.0 * reasoning,
            100.0 * length_band(content, target)};
  }
  // Empty content never earns a partial score through the length band.
  if (content.empty()) std::fill(dims.begin(), dims.end(), 0.0);
  return make_verdict(request.rubric, std::move(dims));
}

}  // namespace eapo
