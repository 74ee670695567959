#pragma once

// Reference implementation of the answer and description-score wire
// protocols. Backs the hqa-stub tool and the integration tests; supports
// canned answers, artificial delays, and failure injection.

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

namespace httplib {
class Server;
}

namespace hqa {

class StubServer {
 public:
  StubServer();
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  // port 0 binds an ephemeral port; returns the bound port.
  int start(int port = 0);
  void stop();

  std::string url() const;  // http://127.0.0.1:<port>

  // /v1/answer replies with the scripted label for (frame_ref, question_id),
  // else the fixed default, else the first entry of the request's labels.
  void script_answer(const std::string& frame_ref, const std::string& question_id,
                     const std::string& label);
  void set_default_answer(const std::string& label);

  void set_score(int score);  // /v1/score and / reply {"score": score}
  void set_delay_ms(int delay_ms);
  void fail_next(int count, int status);  // next <count> requests return <status>

  int requests_seen() const { return requests_.load(); }

 private:
  bool take_failure(int& status);
  void handle_answer(const std::string& body, int& status, std::string& reply);
  void handle_score(int& status, std::string& reply);

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;

  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, std::string> script_;
  std::string default_answer_;
  int score_ = 65;
  int delay_ms_ = 0;
  int fail_count_ = 0;
  int fail_status_ = 500;
  std::atomic<int> requests_{0};
};

}  // namespace hqa
