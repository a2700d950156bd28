#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "promptctl/plant.hpp"
#include "promptctl/prompt.hpp"

namespace promptctl {

/// OpenAI-compatible chat-completions endpoint.
struct LlmHttpConfig {
  /// Base URL; the request goes to {endpoint}/chat/completions.
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  /// Name of the environment variable holding the bearer token.
  std::string api_key_env = "PROMPTCTL_API_KEY";
  double temperature = 0.2;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  std::chrono::milliseconds retry_backoff{250};
  /// Upper bound on simultaneous requests through one LlmHttpPlant.
  int max_concurrent = 4;
  std::string system_prompt;

  /// Throws Error(Configuration).
  void validate() const;
};

/// POSTs {model, messages, temperature} and returns choices[0].message.content.
///
/// The API key is read before anything touches the network; a missing key is
/// Error(Configuration). Transport failures, timeouts, 429 and 5xx responses
/// are retried up to `max_retries` times with doubling backoff. Final failures
/// surface as Error(Timeout), HttpError (status attached) or
/// Error(MalformedResponse).
[[nodiscard]] std::string llm_http_generate(std::string_view prompt, const LlmHttpConfig& config);

/// Requests attempted by llm_http_generate since process start.
[[nodiscard]] std::uint64_t http_requests_issued() noexcept;

/// Turns a completion into metrics.
using ArtifactEvaluator = std::function<MetricVector(const std::string& artifact)>;

/// LLM behind HTTP. The control has already been folded into the prompt, so
/// only the text is sent; the evaluator (by default: parse a JSON report out
/// of the completion) produces the observation.
class LlmHttpPlant final : public Plant {
 public:
  LlmHttpPlant(LlmHttpConfig config, ObservationSchema observation, ArtifactEvaluator evaluator = {});
  ~LlmHttpPlant() override;

  [[nodiscard]] const MetricSchema& schema() const override { return observation_.metrics(); }
  PlantOutput generate(std::string_view prompt, const ControlSignal& u, Rng& rng) override;
  [[nodiscard]] bool reentrant() const noexcept override { return true; }
  [[nodiscard]] bool simulated() const noexcept override { return false; }

 private:
  struct Limiter;

  LlmHttpConfig config_;
  ObservationSchema observation_;
  ArtifactEvaluator evaluator_;
  std::unique_ptr<Limiter> limiter_;
};

}  // namespace promptctl
