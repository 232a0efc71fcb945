#pragma once

#include <memory>
#include <semaphore>
#include <string>

#include <json.hpp>

#include "eapo/judge.hpp"

namespace eapo {

struct RemoteEndpoint {
  std::string url;       // http://host[:port]/path
  std::string api_key;   // sent as "Authorization: Bearer <key>" when non-empty
  int timeout_ms = 30000;
  int retries = 2;       // extra attempts after the first failure
  int max_in_flight = 8;
};

// JSON-over-HTTP POST with bounded concurrency. Safe for concurrent use.
class HttpJsonClient {
 public:
  explicit HttpJsonClient(RemoteEndpoint endpoint);
  ~HttpJsonClient();
  HttpJsonClient(const HttpJsonClient&) = delete;
  HttpJsonClient& operator=(const HttpJsonClient&) = delete;

  // One attempt. Throws ScoringError on transport failure, a non-200 status
  // or a body that is not JSON.
  nlohmann::json post(const nlohmann::json& body) const;

  const RemoteEndpoint& endpoint() const { return endpoint_; }

 private:
  RemoteEndpoint endpoint_;
  std::string base_;
  std::string path_;
  mutable std::counting_semaphore<1024> in_flight_;
};

class Reranker {
 public:
  virtual ~Reranker() = default;
  // Relevance of `document` to `query`, in [0, 1].
  virtual double score(const std::string& query, const std::string& document) const = 0;
};

// Cosine of character-trigram count vectors.
class MockReranker final : public Reranker {
 public:
  double score(const std::string& query, const std::string& document) const override;
};

// POST {"query", "document"} -> {"score"}. A failed attempt or a malformed or
// out-of-range score is retried up to `retries` times, then ScoringError.
class RemoteReranker final : public Reranker {
 public:
  explicit RemoteReranker(RemoteEndpoint endpoint);
  double score(const std::string& query, const std::string& document) const override;

 private:
  HttpJsonClient client_;
};

// POST {"prompt"} -> {"text"}. Transport failures are retried like the
// reranker; an unparseable judge reply is re-asked once, then ScoringError.
class RemoteJudge final : public JudgeClient {
 public:
  explicit RemoteJudge(RemoteEndpoint endpoint);
  JudgeVerdict judge(const JudgeRequest& request) const override;

 private:
  std::string complete(const std::string& prompt) const;
  HttpJsonClient client_;
};

}  // namespace eapo
