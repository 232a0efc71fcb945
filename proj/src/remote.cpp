#include "eapo/remote.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <httplib.h>

#include "eapo/errors.hpp"
#include "eapo/text_metrics.hpp"

namespace eapo {

using json = nlohmann::json;

namespace {

struct SemaphoreGuard {
  explicit SemaphoreGuard(std::counting_semaphore<1024>& s) : sem(s) { sem.acquire(); }
  ~SemaphoreGuard() { sem.release(); }
  std::counting_semaphore<1024>& sem;
};

}  // namespace

HttpJsonClient::HttpJsonClient(RemoteEndpoint endpoint)
    : endpoint_(std::move(endpoint)),
      in_flight_(std::clamp(endpoint_.max_in_flight, 1, 1024)) {
  const std::string& url = endpoint_.url;
  if (url.rfind("http://", 0) != 0) {
    throw ConfigError(fmt::format("remote scorer url '{}' must start with http://", url));
  }
  const auto slash = url.find('/', 7);
  base_ = slash == std::string::npos ? url : url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
  if (base_.size() <= 7) throw ConfigError(fmt::format("remote scorer url '{}' has no host", url));
  if (endpoint_.timeout_ms <= 0) throw ConfigError("remote scorer timeout must be positive");
  if (endpoint_.retries < 0) throw ConfigError("remote scorer retries must be >= 0");
}

HttpJsonClient::~HttpJsonClient() = default;

json HttpJsonClient::post(const json& body) const {
  SemaphoreGuard guard(in_flight_);
  httplib::Client cli(base_);
  const auto sec = endpoint_.timeout_ms / 1000;
  const auto usec = (endpoint_.timeout_ms % 1000) * 1000;
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
  httplib::Headers headers;
  if (!endpoint_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
  }
  auto res = cli.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw ScoringError(fmt::format("POST {}{}: {}", base_, path_, httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw ScoringError(fmt::format("POST {}{}: HTTP {}", base_, path_, res->status));
  }
  try {
    return json::parse(res->body);
  } catch (const json::parse_error&) {
    throw ScoringError(fmt::format("POST {}{}: reply is not JSON", base_, path_));
  }
}

double MockReranker::score(const std::string& query, const std::string& document) const {
  return trigram_cosine(query, document);
}

RemoteReranker::RemoteReranker(RemoteEndpoint endpoint) : client_(std::move(endpoint)) {}

double RemoteReranker::score(const std::string& query, const std::string& document) const {
  const json body{{"query", query}, {"document", document}};
  std::string last_error;
  for (int attempt = 0; attempt <= client_.endpoint().retries; ++attempt) {
    try {
      const json reply = client_.post(body);
      auto it = reply.find("score");
      if (it == reply.end() || !it->is_number()) {
        last_error = "reply has no numeric \"score\"";
        continue;
      }
      const double s = it->get<double>();
      if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
        last_error = fmt::format("score {} outside [0, 1]", s);
        continue;
      }
      return s;
    } catch (const ScoringError& e) {
      last_error = e.what();
    }
  }
  throw ScoringError(fmt::format("reranker failed after {} attempts: {}",
                                 client_.endpoint().retries + 1, last_error));
}

RemoteJudge::RemoteJudge(RemoteEndpoint endpoint) : client_(std::move(endpoint)) {}

std::string RemoteJudge::complete(const std::string& prompt) const {
  const json body{{"prompt", prompt}};
  std::string last_error;
  for (int attempt = 0; attempt <= client_.endpoint().retries; ++attempt) {
    try {
      const json reply = client_.post(body);
      auto it = reply.find("text");
      if (it != reply.end() && it->is_string()) return it->get<std::string>();
      last_error = "reply has no string \"text\"";
    } catch (const ScoringError& e) {
      last_error = e.what();
    }
  }
  throw ScoringError(fmt::format("judge failed after {} attempts: {}",
                                 client_.endpoint().retries + 1, last_error));
}

JudgeVerdict RemoteJudge::judge(const JudgeRequest& request) const {
  const auto prompt = render_judge_prompt(request);
  for (int ask = 0; ask < 2; ++ask) {
    if (auto verdict = parse_judge_reply(request.rubric, complete(prompt))) return *verdict;
  }
  throw ScoringError("judge reply unparseable after one re-ask");
}

}  // namespace eapo
