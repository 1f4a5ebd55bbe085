/*
 * Copyright 2026 The dualex Authors.
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

#pragma once

/**
 * @file external.hpp
 * @brief Out-of-process predictor speaking a line-oriented stdio protocol.
 *
 * Per batch the parent writes
 *
 *     PREDICT <rows> <cols>\n
 *     <cols space-separated floats>\n      (rows times)
 *
 * and the child answers with exactly <rows> lines holding one float each.
 * "QUIT\n" ends the session. Floats are written with 17 significant digits.
 * One batch is in flight at a time; a failed batch poisons the predictor.
 */

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dualex/blackbox.hpp"
#include "dualex/errors.hpp"

namespace dualex {

class ExternalPredictor final : public Predictor {
 public:
  explicit ExternalPredictor(std::string command, Index input_dim = 0,
                             std::chrono::milliseconds timeout = std::chrono::seconds(30))
      : command_(std::move(command)), dim_(input_dim), timeout_(timeout) {
    if (command_.empty()) throw InvalidInput("external predictor: empty command");
    ::signal(SIGPIPE, SIG_IGN);
    spawn();
  }

  ExternalPredictor(const ExternalPredictor&) = delete;
  ExternalPredictor& operator=(const ExternalPredictor&) = delete;

  ~ExternalPredictor() override { shutdown(); }

  PredictorKind kind() const override { return PredictorKind::kExternal; }
  Index input_dim() const override { return dim_; }
  const std::string& command() const noexcept { return command_; }

  double predict(const Eigen::Ref<const Vector>& x) const override {
    return predict_batch(x.transpose())(0);
  }

  Vector predict_batch(const Eigen::Ref<const Matrix>& xs) const override {
    check_dim(xs.cols());
    std::lock_guard<std::mutex> lock(mu_);
    if (broken_) throw PredictorIoError("external predictor '" + command_ + "': " + broken_reason_);
    try {
      return round_trip(xs);
    } catch (const PredictorIoError& e) {
      broken_ = true;
      broken_reason_ = e.what();
      throw;
    }
  }

 private:
  void spawn() {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
      throw PredictorIoError("external predictor: pipe() failed: " + std::string(std::strerror(errno)));
    pid_ = ::fork();
    if (pid_ < 0) throw PredictorIoError("external predictor: fork() failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    ::fcntl(write_fd_, F_SETFL, ::fcntl(write_fd_, F_GETFL) | O_NONBLOCK);
    ::fcntl(read_fd_, F_SETFL, ::fcntl(read_fd_, F_GETFL) | O_NONBLOCK);
  }

  void shutdown() noexcept {
    if (write_fd_ >= 0) {
      if (!broken_) {
        const char quit[] = "QUIT\n";
        [[maybe_unused]] auto n = ::write(write_fd_, quit, sizeof(quit) - 1);
      }
      ::close(write_fd_);
      write_fd_ = -1;
    }
    if (read_fd_ >= 0) {
      ::close(read_fd_);
      read_fd_ = -1;
    }
    if (pid_ > 0) {
      // Give the child a moment to exit on QUIT/EOF before killing it.
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
          pid_ = -1;
          return;
        }
        ::usleep(2000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw PredictorIoError("external predictor '" + command_ + "': " + why);
  }

  Vector round_trip(const Eigen::Ref<const Matrix>& xs) const {
    std::string request = "PREDICT " + std::to_string(xs.rows()) + " " + std::to_string(xs.cols()) + "\n";
    char buf[32];
    for (Index i = 0; i < xs.rows(); ++i) {
      for (Index j = 0; j < xs.cols(); ++j) {
        const int len = std::snprintf(buf, sizeof(buf), "%.17g", xs(i, j));
        if (j > 0) request.push_back(' ');
        request.append(buf, static_cast<std::size_t>(len));
      }
      request.push_back('\n');
    }

    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    std::size_t written = 0;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(xs.rows()));
    std::string pending;
    char chunk[4096];

    while (values.size() < static_cast<std::size_t>(xs.rows())) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) fail("timed out after " + std::to_string(timeout_.count()) + " ms");

      pollfd fds[2] = {{read_fd_, POLLIN, 0}, {write_fd_, POLLOUT, 0}};
      const nfds_t nfds = written < request.size() ? 2 : 1;
      const int ready = ::poll(fds, nfds, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        fail("poll() failed");
      }
      if (nfds == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        const ssize_t n = ::write(write_fd_, request.data() + written, request.size() - written);
        if (n < 0 && errno != EAGAIN && errno != EINTR) fail("child closed its input");
        if (n > 0) written += static_cast<std::size_t>(n);
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
        if (n == 0) {
          fail("child exited after " + std::to_string(values.size()) + " of " +
               std::to_string(xs.rows()) + " responses");
        }
        if (n < 0) {
          if (errno == EAGAIN || errno == EINTR) continue;
          fail("read() failed");
        }
        pending.append(chunk, static_cast<std::size_t>(n));
        std::size_t nl;
        while ((nl = pending.find('\n')) != std::string::npos) {
          std::string line = pending.substr(0, nl);
          pending.erase(0, nl + 1);
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (values.size() >= static_cast<std::size_t>(xs.rows())) fail("unexpected extra output line");
          values.push_back(parse_line(line, values.size()));
        }
      }
    }
    if (!pending.empty()) fail("unexpected trailing output '" + pending + "'");

    Vector out(xs.rows());
    for (Index i = 0; i < xs.rows(); ++i) out(i) = values[static_cast<std::size_t>(i)];
    return out;
  }

  double parse_line(const std::string& line, std::size_t row) const {
    const char* begin = line.data();
    const char* end = begin + line.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || begin == end)
      fail("malformed response line " + std::to_string(row + 1) + ": '" + line + "'");
    return v;
  }

  std::string command_;
  Index dim_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  mutable std::mutex mu_;
  mutable bool broken_ = false;
  mutable std::string broken_reason_;
};

inline PredictorPtr external_predictor(const std::string& command, Index input_dim = 0,
                                       std::chrono::milliseconds timeout = std::chrono::seconds(30)) {
  return std::make_shared<ExternalPredictor>(command, input_dim, timeout);
}

}  // namespace dualex
