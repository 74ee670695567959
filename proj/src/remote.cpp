#include "hqa/remote.hpp"

#include <chrono>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "hqa/errors.hpp"

namespace hqa {

using nlohmann::json;

namespace {

struct SplitUrl {
  std::string base;  // scheme://host:port
  std::string path;  // "" when the endpoint has no path
};

SplitUrl split_url(const std::string& endpoint) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint '" + endpoint + "' must include a scheme, e.g. http://");
  }
  const auto slash = endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) return {endpoint, ""};
  return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

void apply_timeout(httplib::Client& client, double timeout_ms) {
  const auto timeout = std::chrono::milliseconds(std::max<long long>(
      1, static_cast<long long>(timeout_ms)));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
}

// Read failures against a responsive-but-slow peer are timeouts in practice;
// everything else on a failed result is a transport problem.
bool is_timeout(httplib::Error error) {
  return error == httplib::Error::ConnectionTimeout || error == httplib::Error::Read ||
         error == httplib::Error::Write;
}

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

class RemoteAnswerer final : public Answerer {
 public:
  explicit RemoteAnswerer(RemoteOptions options)
      : options_(std::move(options)),
        url_(split_url(options_.endpoint)),
        slots_(std::max(1, options_.max_in_flight)) {}

  Answer answer(const std::string& frame_ref, const QuestionNode& question) override {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};

    const json body{{"frame_ref", frame_ref},
                    {"question_id", question.id},
                    {"question", question.text},
                    {"labels", question.domain.labels}};
    const std::string payload = body.dump();
    const int attempts = std::max(1, options_.retry.max_attempts);

    std::optional<NetworkError> last;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
      if (attempt > 1 && options_.retry.backoff_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(options_.retry.backoff_ms));
      }

      httplib::Client client(url_.base);
      apply_timeout(client, options_.timeout_ms);
      const auto start = std::chrono::steady_clock::now();
      httplib::Result res = client.Post(url_.path + "/v1/answer", payload, "application/json");
      const double elapsed = ms_since(start);

      if (!res) {
        const auto kind =
            is_timeout(res.error()) ? NetworkFailure::Timeout : NetworkFailure::Transport;
        last.emplace(kind, "remote answerer: " + std::string(httplib::to_string(res.error())) +
                               " for question '" + question.id + "' (frame '" + frame_ref +
                               "', attempt " + std::to_string(attempt) + "/" +
                               std::to_string(attempts) + ")");
        continue;
      }
      if (res->status >= 500) {
        last.emplace(NetworkFailure::HttpStatus,
                     "remote answerer: status " + std::to_string(res->status) +
                         " for question '" + question.id + "' (attempt " +
                         std::to_string(attempt) + "/" + std::to_string(attempts) + ")",
                     res->status);
        continue;
      }
      if (res->status < 200 || res->status >= 300) {
        throw NetworkError(NetworkFailure::HttpStatus,
                           "remote answerer: status " + std::to_string(res->status) +
                               " for question '" + question.id + "'",
                           res->status);
      }

      json reply;
      try {
        reply = json::parse(res->body);
      } catch (const json::parse_error&) {
        throw NetworkError(NetworkFailure::MalformedResponse,
                           "remote answerer: malformed response body for question '" +
                               question.id + "'");
      }
      if (!reply.is_object() || !reply.contains("answer") || !reply["answer"].is_string()) {
        throw NetworkError(NetworkFailure::MalformedResponse,
                           "remote answerer: response missing string 'answer' for question '" +
                               question.id + "'");
      }
      return Answer{reply["answer"].get<std::string>(), elapsed, false};
    }
    throw *last;
  }

 private:
  RemoteOptions options_;
  SplitUrl url_;
  std::counting_semaphore<> slots_;
};

}  // namespace

std::unique_ptr<Answerer> remote_answerer(RemoteOptions options) {
  return std::make_unique<RemoteAnswerer>(std::move(options));
}

// ---------------------------------------------------------------------------
// Description scoring
// ---------------------------------------------------------------------------

const std::string& default_score_prompt_with_gt() {
  static const std::string prompt =
      "You are scoring a driving-scene description against an image.\n"
      "Image: {image}\n"
      "Candidate description: {description}\n"
      "Ground-truth description: {ground_truth}\n"
      "Judge only road geometry, intersections, vehicles, pedestrians, traffic signs, "
      "speed bumps, and crosswalks.\n"
      "Reply with a single integer from 0 to 100, where 100 means the candidate is fully "
      "correct and complete.\n";
  return prompt;
}

const std::string& default_score_prompt_without_gt() {
  static const std::string prompt =
      "You are scoring a driving-scene description against an image.\n"
      "Image: {image}\n"
      "Candidate description: {description}\n"
      "Judge only road geometry, intersections, vehicles, pedestrians, traffic signs, "
      "speed bumps, and crosswalks.\n"
      "Reply with a single integer from 0 to 100, where 100 means the candidate is fully "
      "correct and complete.\n";
  return prompt;
}

namespace {

void replace_all(std::string& text, std::string_view needle, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
}

}  // namespace

std::string render_prompt(const std::string& prompt_template, const std::string& image_ref,
                          const std::string& description,
                          const std::optional<std::string>& ground_truth) {
  std::string out = prompt_template;
  replace_all(out, "{image}", image_ref);
  replace_all(out, "{description}", description);
  replace_all(out, "{ground_truth}", ground_truth.value_or(""));
  return out;
}

int remote_description_score(const std::string& endpoint,
                             const DescriptionScoreRequest& request, std::ostream* wire_log) {
  const SplitUrl url = split_url(endpoint);
  const std::string& fallback = request.ground_truth ? default_score_prompt_with_gt()
                                                     : default_score_prompt_without_gt();
  const std::string prompt =
      render_prompt(request.prompt_template.empty() ? fallback : request.prompt_template,
                    request.image_ref, request.description, request.ground_truth);

  const json body{{"prompt", prompt}, {"image_ref", request.image_ref}};
  const std::string payload = body.dump();
  const std::string path = url.path.empty() ? "/" : url.path;

  if (wire_log) *wire_log << "POST " << url.base << path << "\n" << payload << "\n";

  httplib::Client client(url.base);
  apply_timeout(client, request.timeout_ms);
  httplib::Result res = client.Post(path, payload, "application/json");

  if (!res) {
    const auto kind =
        is_timeout(res.error()) ? NetworkFailure::Timeout : NetworkFailure::Transport;
    throw NetworkError(kind, "description scorer: " +
                                 std::string(httplib::to_string(res.error())) + " against " +
                                 endpoint);
  }
  if (wire_log) *wire_log << "HTTP " << res->status << "\n" << res->body << "\n";
  if (res->status < 200 || res->status >= 300) {
    throw NetworkError(NetworkFailure::HttpStatus,
                       "description scorer: status " + std::to_string(res->status),
                       res->status);
  }

  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::parse_error&) {
    throw NetworkError(NetworkFailure::MalformedResponse,
                       "description scorer: malformed response body");
  }
  if (!reply.is_object() || !reply.contains("score") || !reply["score"].is_number_integer()) {
    throw NetworkError(NetworkFailure::MalformedResponse,
                       "description scorer: malformed score (expected an integer)");
  }
  const int score = reply["score"].get<int>();
  if (score < 0 || score > 100) {
    throw NetworkError(NetworkFailure::MalformedResponse,
                       "description scorer: score out of range: " + std::to_string(score));
  }
  return score;
}

}  // namespace hqa
