#pragma once

// HTTP backends: the remote answerer (one POST per question against the
// /v1/answer protocol) and the remote description-scoring client. Timeouts,
// bad statuses, and malformed bodies surface as distinguishable NetworkError
// kinds.

#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "hqa/answerers.hpp"

namespace hqa {

struct RetryPolicy {
  int max_attempts = 3;  // total tries, including the first
  int backoff_ms = 0;
};

struct RemoteOptions {
  std::string endpoint;  // e.g. "http://127.0.0.1:8080"
  double timeout_ms = 5000;
  RetryPolicy retry;
  int max_in_flight = 4;  // concurrent request cap
};

// Transport failures and 5xx statuses are retried per policy; 4xx and
// malformed bodies fail immediately. Elapsed is the observed round trip of
// the successful request.
std::unique_ptr<Answerer> remote_answerer(RemoteOptions options);

struct DescriptionScoreRequest {
  std::string image_ref;
  std::string description;
  std::optional<std::string> ground_truth;
  std::string prompt_template;  // empty -> bundled default for the variant
  double timeout_ms = 10000;
};

// POSTs {"prompt", "image_ref"} to the endpoint and validates the returned
// integer score against [0, 100]. Raw request/response go to wire_log.
int remote_description_score(const std::string& endpoint,
                             const DescriptionScoreRequest& request,
                             std::ostream* wire_log = nullptr);

// Fills {image}, {description}, {ground_truth} placeholders.
std::string render_prompt(const std::string& prompt_template, const std::string& image_ref,
                          const std::string& description,
                          const std::optional<std::string>& ground_truth);

const std::string& default_score_prompt_with_gt();
const std::string& default_score_prompt_without_gt();

}  // namespace hqa
