#pragma once

#include <stdexcept>
#include <string>

namespace hqa {

// Error taxonomy mirrors the CLI exit codes: config problems (bad forest
// files, bad flags), data problems (datasets, labels, frames), and network
// problems (remote backends).

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NetworkFailure { Timeout, HttpStatus, Transport, MalformedResponse };

class NetworkError : public std::runtime_error {
 public:
  NetworkError(NetworkFailure kind, const std::string& message, int status = 0)
      : std::runtime_error(message), kind_(kind), status_(status) {}

  NetworkFailure kind() const { return kind_; }
  int http_status() const { return status_; }

 private:
  NetworkFailure kind_;
  int status_;
};

}  // namespace hqa
