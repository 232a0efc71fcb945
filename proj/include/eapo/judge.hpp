#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eapo {

// Think rubric scores the reasoning inside <think>; response rubric scores
// the whole answer.
enum class Rubric { kThink, kResponse };

std::string_view rubric_name(Rubric rubric);
Rubric parse_rubric(std::string_view name);

// Declared per-dimension weights: think 0.35/0.30/0.20/0.15,
// response 0.30/0.25/0.25/0.10/0.10.
std::span<const double> rubric_weights(Rubric rubric);
std::span<const std::string_view> rubric_dimensions(Rubric rubric);

struct JudgeRequest {
  std::string question;
  std::string response;   // full response text
  std::string content;    // the part under evaluation (think content or full response)
  std::string reference;
  Rubric rubric = Rubric::kThink;
};

JudgeRequest make_judge_request(std::string question, std::string response, std::string reference,
                                Rubric rubric);

struct JudgeVerdict {
  std::vector<double> dimensions;  // 0..100 each
  double overall = 0.0;            // 0..1
};

// overall = sum(d_k * w_k) / sum(w_k) / 100. Throws ScoringError on a
// dimension count mismatch or a score outside [0, 100].
JudgeVerdict make_verdict(Rubric rubric, std::vector<double> dimensions);

// Judge prompt with the placeholders filled in, followed by the output
// format instruction the reply parser relies on.
std::string render_judge_prompt(const JudgeRequest& request);

// Parses "DIMENSION <k>: <score>" lines and the final "OVERALL: <score>" line.
// When every dimension is present the overall score is recombined from them;
// otherwise the stated overall is used. nullopt when no OVERALL line exists or
// a number is out of range.
std::optional<JudgeVerdict> parse_judge_reply(Rubric rubric, std::string_view reply);

class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  virtual JudgeVerdict judge(const JudgeRequest& request) const = 0;
};

// Deterministic stand-in scoring each dimension from surface statistics of
// the evaluated content against the matching part of the reference.
class MockJudge final : public JudgeClient {
 public:
  JudgeVerdict judge(const JudgeRequest& request) const override;
};

// Length band score: 1 for |a|/|b| in [0.75, 1.25], linear decay to 0 at 0
// and at 2.5.
double length_band(std::string_view content, std::string_view target);

}  // namespace eapo
