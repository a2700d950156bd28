#include "promptctl/llm_http.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "promptctl/error.hpp"

namespace promptctl {

using nlohmann::json;

namespace {

std::atomic<std::uint64_t> g_requests{0};

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // base path without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorKind::Configuration, "LLM endpoint '" + url + "' must start with http:// or https://");
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw Error(ErrorKind::Configuration, "LLM endpoint scheme must be http or https, got '" + scheme + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  ep.path = path_start == std::string::npos ? std::string() : url.substr(path_start);
  while (!ep.path.empty() && ep.path.back() == '/') ep.path.pop_back();
  if (ep.origin.size() <= scheme_end + 3) throw Error(ErrorKind::Configuration, "LLM endpoint has no host");
  return ep;
}

std::string read_api_key(const LlmHttpConfig& config) {
  const char* key = std::getenv(config.api_key_env.c_str());
  if (key == nullptr || *key == '\0')
    throw Error(ErrorKind::Configuration,
                "API key environment variable '" + config.api_key_env + "' is not set");
  return key;
}

std::string extract_content(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error&) {
    throw Error(ErrorKind::MalformedResponse, "chat completion response is not JSON");
  }
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw Error(ErrorKind::MalformedResponse, "completion content is not a string");
    return content.get<std::string>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::MalformedResponse, "chat completion response lacks choices[0].message.content");
  }
}

std::string attempt(const Endpoint& ep, const std::string& key, const std::string& payload,
                    const LlmHttpConfig& config) {
  httplib::Client client(ep.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  client.set_bearer_token_auth(key);

  ++g_requests;
  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(ep.path + "/chat/completions", payload, "application/json");
  if (!res) {
    const auto err = res.error();
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= config.timeout * 9 / 10)) {
      throw Error(ErrorKind::Timeout, "LLM request timed out after " + std::to_string(config.timeout.count()) + " ms",
                  true);
    }
    throw Error(ErrorKind::Plant, "LLM request failed: " + httplib::to_string(err), true);
  }
  if (res->status < 200 || res->status >= 300) {
    const bool transient = res->status == 429 || res->status >= 500;
    throw HttpError(res->status, "LLM endpoint returned HTTP " + std::to_string(res->status), transient);
  }
  return extract_content(res->body);
}

}  // namespace

void LlmHttpConfig::validate() const {
  split_endpoint(endpoint);
  if (model.empty()) throw Error(ErrorKind::Configuration, "LLM model name is empty");
  if (api_key_env.empty()) throw Error(ErrorKind::Configuration, "API key variable name is empty");
  if (timeout.count() <= 0) throw Error(ErrorKind::Configuration, "LLM timeout must be positive");
  if (max_retries < 0) throw Error(ErrorKind::Configuration, "LLM retries must be non-negative");
  if (max_concurrent < 1) throw Error(ErrorKind::Configuration, "LLM concurrency cap must be at least 1");
  if (!(temperature >= 0.0)) throw Error(ErrorKind::Configuration, "LLM temperature must be non-negative");
}

std::uint64_t http_requests_issued() noexcept { return g_requests.load(); }

std::string llm_http_generate(std::string_view prompt, const LlmHttpConfig& config) {
  config.validate();
  const std::string key = read_api_key(config);
  const Endpoint ep = split_endpoint(config.endpoint);

  json messages = json::array();
  if (!config.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", config.system_prompt}});
  messages.push_back({{"role", "user"}, {"content", std::string(prompt)}});
  const std::string payload =
      json{{"model", config.model}, {"messages", messages}, {"temperature", config.temperature}}.dump();

  auto delay = config.retry_backoff;
  for (int tries = 0;; ++tries) {
    try {
      return attempt(ep, key, payload, config);
    } catch (const Error& e) {
      if (!e.transient() || tries >= config.max_retries) throw;
    }
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

struct LlmHttpPlant::Limiter {
  explicit Limiter(int cap) : available(cap) {}

  void acquire() {
    std::unique_lock lock(mutex);
    cv.wait(lock, [&] { return available > 0; });
    --available;
  }
  void release() {
    {
      std::lock_guard lock(mutex);
      ++available;
    }
    cv.notify_one();
  }

  struct Permit {
    explicit Permit(Limiter& l) : limiter(l) { limiter.acquire(); }
    ~Permit() { limiter.release(); }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    Limiter& limiter;
  };

  std::mutex mutex;
  std::condition_variable cv;
  int available;
};

LlmHttpPlant::LlmHttpPlant(LlmHttpConfig config, ObservationSchema observation, ArtifactEvaluator evaluator)
    : config_(std::move(config)),
      observation_(std::move(observation)),
      evaluator_(std::move(evaluator)),
      limiter_(std::make_unique<Limiter>(config_.max_concurrent)) {
  config_.validate();
  if (!evaluator_) {
    evaluator_ = [schema = observation_](const std::string& text) { return parse_observation_from_text(text, schema); };
  }
}

LlmHttpPlant::~LlmHttpPlant() = default;

PlantOutput LlmHttpPlant::generate(std::string_view prompt, const ControlSignal& /*u*/, Rng& /*rng*/) {
  std::string text;
  {
    Limiter::Permit permit(*limiter_);
    text = llm_http_generate(prompt, config_);
  }
  MetricVector y = evaluator_(text);
  return {std::move(text), std::move(y)};
}

}  // namespace promptctl
