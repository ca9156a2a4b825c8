/*
 * Copyright 2026 The windowshap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Clients for models served over the wire protocol: one JSON request per
// batch, one JSON response back. Subprocess mode speaks newline-delimited
// JSON over the child's stdin/stdout; HTTP mode POSTs the request body.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <string>
#include <thread>

#include "httplib.h"
#include "windowshap/models.hpp"

namespace windowshap {

namespace {

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

class SubprocessPredictor : public Predictor {
 public:
  SubprocessPredictor(std::string command, Shape shape,
                      std::chrono::milliseconds timeout)
      : command_(std::move(command)), shape_(shape), timeout_(timeout) {
    ignore_sigpipe_once();
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
      throw Error(ErrorCode::kConnectionFailure,
                  std::string("pipe: ") + std::strerror(errno));
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      throw Error(ErrorCode::kConnectionFailure,
                  std::string("fork: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(),
              static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    ::fcntl(write_fd_, F_SETFD, FD_CLOEXEC);
    ::fcntl(read_fd_, F_SETFD, FD_CLOEXEC);

    try {
      InstanceBatch empty(shape_, 0);
      predict(empty);
    } catch (const Error& e) {
      shutdown();
      throw Error(e.code() == ErrorCode::kTimeout ? ErrorCode::kTimeout
                                                  : ErrorCode::kConnectionFailure,
                  "health check of '" + command_ + "' failed: " + e.what());
    }
  }

  ~SubprocessPredictor() override { shutdown(); }

  SubprocessPredictor(const SubprocessPredictor&) = delete;
  SubprocessPredictor& operator=(const SubprocessPredictor&) = delete;

  Shape expected_shape() const override { return shape_; }

  std::vector<double> predict(const InstanceBatch& batch) override {
    if (batch.shape() != shape_) {
      throw Error(ErrorCode::kShapeMismatch,
                  "batch shape " + to_string(batch.shape()) +
                      " does not match model shape " + to_string(shape_));
    }
    const std::int64_t id = next_id_++;
    std::string line = wire::encode_request(id, batch).dump();
    line.push_back('\n');
    write_all(line);
    const std::string reply = read_line();
    nlohmann::json response;
    try {
      response = nlohmann::json::parse(reply);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kProtocolViolation,
                  std::string("response is not JSON: ") + e.what());
    }
    return wire::decode_response(response, id, batch.size());
  }

 private:
  void write_all(const std::string& data) {
    std::size_t done = 0;
    while (done < data.size()) {
      const ssize_t n = ::write(write_fd_, data.data() + done,
                                data.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kConnectionFailure,
                    "write to '" + command_ + "': " + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        throw Error(ErrorCode::kTimeout,
                    "no response from '" + command_ + "' within " +
                        std::to_string(timeout_.count()) + " ms");
      }
      pollfd pfd{read_fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kConnectionFailure,
                    std::string("poll: ") + std::strerror(errno));
      }
      if (ready == 0) continue;
      char chunk[65536];
      const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kConnectionFailure,
                    "read from '" + command_ + "': " + std::strerror(errno));
      }
      if (n == 0) {
        throw Error(ErrorCode::kConnectionFailure,
                    "'" + command_ + "' closed its output");
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void shutdown() {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    write_fd_ = read_fd_ = -1;
    if (pid_ > 0) {
      // Closing stdin asks the child to exit; give it a moment first.
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
          pid_ = -1;
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

  std::string command_;
  Shape shape_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  std::string buffer_;
  std::int64_t next_id_ = 0;
};

class HttpPredictor : public Predictor {
 public:
  HttpPredictor(const std::string& url, Shape shape,
                std::chrono::milliseconds timeout)
      : url_(url), shape_(shape) {
    // Split http://host[:port][/path].
    const std::string rest = url.substr(std::string("http://").size());
    const auto slash = rest.find('/');
    const std::string host_port =
        slash == std::string::npos ? rest : rest.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    if (host_port.empty()) {
      throw Error(ErrorCode::kConnectionFailure, "URL '" + url + "' has no host");
    }
    client_ = std::make_unique<httplib::Client>("http://" + host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
        timeout - secs);
    client_->set_connection_timeout(secs.count(), usecs.count());
    client_->set_read_timeout(secs.count(), usecs.count());
    client_->set_write_timeout(secs.count(), usecs.count());

    try {
      InstanceBatch empty(shape_, 0);
      predict(empty);
    } catch (const Error& e) {
      throw Error(e.code() == ErrorCode::kTimeout ? ErrorCode::kTimeout
                                                  : ErrorCode::kConnectionFailure,
                  "health check of '" + url_ + "' failed: " + e.what());
    }
  }

  Shape expected_shape() const override { return shape_; }

  std::vector<double> predict(const InstanceBatch& batch) override {
    if (batch.shape() != shape_) {
      throw Error(ErrorCode::kShapeMismatch,
                  "batch shape " + to_string(batch.shape()) +
                      " does not match model shape " + to_string(shape_));
    }
    const std::int64_t id = next_id_++;
    const std::string body = wire::encode_request(id, batch).dump();
    auto res = client_->Post(path_, body, "application/json");
    if (!res) {
      const auto err = res.error();
      throw Error(err == httplib::Error::Read ||
                          err == httplib::Error::ConnectionTimeout
                      ? ErrorCode::kTimeout
                      : ErrorCode::kConnectionFailure,
                  "POST " + url_ + ": " + httplib::to_string(err));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kConnectionFailure,
                  "POST " + url_ + " returned status " +
                      std::to_string(res->status));
    }
    nlohmann::json response;
    try {
      response = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kProtocolViolation,
                  std::string("response is not JSON: ") + e.what());
    }
    return wire::decode_response(response, id, batch.size());
  }

 private:
  std::string url_;
  std::string path_;
  Shape shape_;
  std::unique_ptr<httplib::Client> client_;
  std::int64_t next_id_ = 0;
};

}  // namespace

std::unique_ptr<Predictor> external_predictor(
    const ModelSpec& spec, Shape shape, std::chrono::milliseconds timeout) {
  switch (spec.kind) {
    case ModelKind::kExternalCmd:
      return std::make_unique<SubprocessPredictor>(spec.target, shape,
                                                   timeout);
    case ModelKind::kExternalHttp:
      return std::make_unique<HttpPredictor>(spec.target, shape, timeout);
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  "external_predictor needs a cmd: or http: model");
  }
}

}  // namespace windowshap
