#include "hqa/stub_server.hpp"

#include <chrono>

#include <httplib.h>
#include <json.hpp>

namespace hqa {

using nlohmann::json;

StubServer::StubServer() : server_(std::make_unique<httplib::Server>()) {
  server_->Post("/v1/answer", [this](const httplib::Request& req, httplib::Response& res) {
    requests_.fetch_add(1);
    int delay;
    {
      std::lock_guard<std::mutex> lock(mu_);
      delay = delay_ms_;
    }
    if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));

    int status = 200;
    std::string reply;
    handle_answer(req.body, status, reply);
    res.status = status;
    if (!reply.empty()) res.set_content(reply, "application/json");
  });

  auto score_handler = [this](const httplib::Request&, httplib::Response& res) {
    requests_.fetch_add(1);
    int delay;
    {
      std::lock_guard<std::mutex> lock(mu_);
      delay = delay_ms_;
    }
    if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));

    int status = 200;
    std::string reply;
    handle_score(status, reply);
    res.status = status;
    if (!reply.empty()) res.set_content(reply, "application/json");
  };
  server_->Post("/v1/score", score_handler);
  server_->Post("/", score_handler);
}

StubServer::~StubServer() { stop(); }

int StubServer::start(int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port("127.0.0.1");
  } else {
    if (!server_->bind_to_port("127.0.0.1", port)) return -1;
    port_ = port;
  }
  thread_ = std::thread([this]() { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void StubServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string StubServer::url() const { return "http://127.0.0.1:" + std::to_string(port_); }

void StubServer::script_answer(const std::string& frame_ref, const std::string& question_id,
                               const std::string& label) {
  std::lock_guard<std::mutex> lock(mu_);
  script_[{frame_ref, question_id}] = label;
}

void StubServer::set_default_answer(const std::string& label) {
  std::lock_guard<std::mutex> lock(mu_);
  default_answer_ = label;
}

void StubServer::set_score(int score) {
  std::lock_guard<std::mutex> lock(mu_);
  score_ = score;
}

void StubServer::set_delay_ms(int delay_ms) {
  std::lock_guard<std::mutex> lock(mu_);
  delay_ms_ = delay_ms;
}

void StubServer::fail_next(int count, int status) {
  std::lock_guard<std::mutex> lock(mu_);
  fail_count_ = count;
  fail_status_ = status;
}

bool StubServer::take_failure(int& status) {
  std::lock_guard<std::mutex> lock(mu_);
  if (fail_count_ <= 0) return false;
  fail_count_ -= 1;
  status = fail_status_;
  return true;
}

void StubServer::handle_answer(const std::string& body, int& status, std::string& reply) {
  if (take_failure(status)) return;

  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error&) {
    status = 400;
    return;
  }
  const std::string frame_ref = req.value("frame_ref", "");
  const std::string question_id = req.value("question_id", "");

  std::string answer;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = script_.find({frame_ref, question_id});
    if (it != script_.end()) {
      answer = it->second;
    } else if (!default_answer_.empty()) {
      answer = default_answer_;
    }
  }
  if (answer.empty()) {
    if (!req.contains("labels") || !req["labels"].is_array() || req["labels"].empty()) {
      status = 400;
      return;
    }
    answer = req["labels"][0].get<std::string>();
  }
  reply = json{{"answer", answer}, {"confidence", 0.9}}.dump();
}

void StubServer::handle_score(int& status, std::string& reply) {
  if (take_failure(status)) return;
  int score;
  {
    std::lock_guard<std::mutex> lock(mu_);
    score = score_;
  }
  reply = json{{"score", score}}.dump();
}

}  // namespace hqa
