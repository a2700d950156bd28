#pragma once

// Local OpenAI-compatible stand-in. Binds 127.0.0.1 on a free port and serves
// canned replies in order; the last reply repeats once the queue runs dry.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

namespace mock {

struct Reply {
  int status = 200;
  std::string body;
  std::chrono::milliseconds delay{0};
};

inline std::string completion(const std::string& content) {
  nlohmann::json j;
  j["id"] = "cmpl-mock";
  j["object"] = "chat.completion";
  j["choices"] = nlohmann::json::array({{{"index", 0},
                                         {"message", {{"role", "assistant"}, {"content", content}}},
                                         {"finish_reason", "stop"}}});
  return j.dump();
}

struct Request {
  std::string path;
  std::string authorization;
  std::string body;
};

class LlmServer {
 public:
  LlmServer() {
    server_.Post(R"(.*/chat/completions)", [this](const httplib::Request& req, httplib::Response& res) {
      Reply r;
      {
        std::lock_guard lock(mu_);
        requests_.push_back({req.path, req.get_header_value("Authorization"), req.body});
        if (!replies_.empty()) {
          r = replies_.front();
          if (replies_.size() > 1) replies_.pop_front();
        } else {
          nlohmann::json in = nlohmann::json::parse(req.body, nullptr, false);
          std::string echo;
          if (in.is_object() && in.contains("messages") && !in["messages"].empty())
            echo = in["messages"].back().value("content", "");
          r.body = completion(echo);
        }
      }
      if (r.delay.count() > 0) std::this_thread::sleep_for(r.delay);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~LlmServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  LlmServer(const LlmServer&) = delete;
  LlmServer& operator=(const LlmServer&) = delete;

  void queue(Reply r) {
    std::lock_guard lock(mu_);
    replies_.push_back(std::move(r));
  }

  [[nodiscard]] std::vector<Request> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

  [[nodiscard]] std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::deque<Reply> replies_;
  std::vector<Request> requests_;
};

/// Sets an environment variable for the lifetime of the guard.
class EnvGuard {
 public:
  EnvGuard(std::string name, const char* value) : name_(std::move(name)) {
    if (const char* old = std::getenv(name_.c_str())) old_ = old;
    if (value) {
      ::setenv(name_.c_str(), value, 1);
    } else {
      ::unsetenv(name_.c_str());
    }
  }
  ~EnvGuard() {
    if (old_) {
      ::setenv(name_.c_str(), old_->c_str(), 1);
    } else {
      ::unsetenv(name_.c_str());
    }
  }
  EnvGuard(const EnvGuard&) = delete;
  EnvGuard& operator=(const EnvGuard&) = delete;

 private:
  std::string name_;
  std::optional<std::string> old_;
};

}  // namespace mock
