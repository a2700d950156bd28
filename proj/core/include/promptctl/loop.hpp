#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "promptctl/controller.hpp"
#include "promptctl/error.hpp"
#include "promptctl/noise.hpp"
#include "promptctl/plant.hpp"
#include "promptctl/prompt.hpp"

namespace promptctl {

/// Converged once every |e[i]| < tolerance[i].
struct AbsErrorBelow {
  std::vector<double> tolerance;
};

/// Converged once each dimension is on the good side of its setpoint:
/// LowerIsBetter needs beta*y <= r, HigherIsBetter needs beta*y >= r.
struct SetpointSatisfied {};

using ConvergenceCriteria = std::variant<SetpointSatisfied, AbsErrorBelow>;

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds backoff{100};
};

struct LoopConfig {
  MetricVector setpoint;
  double feedback_gain = 1.0;
  ControllerSpec controller = PidSpec{};
  SessionMode session_mode = SessionMode::Stateful;
  std::size_t max_iterations = 10;
  ConvergenceCriteria convergence = SetpointSatisfied{};
  NoiseSpec noise;
  std::uint64_t rng_seed = 0;
  /// Loop time step in iteration units.
  double dt = 1.0;
  RetryPolicy retry;

  /// Throws Error(Configuration) / Error(Parameter).
  void validate() const;
};

struct IterationRecord {
  std::size_t step = 0;
  PromptState prompt;    // p(t), the prompt that produced this observation
  std::string artifact;  // sigma(t)
  MetricVector observation;         // y(t), after observation noise
  std::vector<double> feedback;     // beta * y(t)
  ErrorSignal error;                // e(t)
  ControlSignal control;            // u(t)
  bool converged = false;
};

struct IterationTrace {
  MetricSchema schema;
  std::vector<IterationRecord> records;
  /// Prompt after the last update; equals the last record's prompt when the
  /// run converged.
  PromptState final_prompt;
};

enum class LoopStatus { Converged, BudgetExhausted, Aborted };

struct LoopResult {
  IterationTrace trace;
  LoopStatus status = LoopStatus::BudgetExhausted;
  std::optional<ErrorKind> error_kind;
  std::string error_message;
  std::uint64_t seed = 0;
  std::string controller;
};

/// e[i] = r[i] - beta * y[i]. Throws Error(Schema) when the schemas differ.
[[nodiscard]] ErrorSignal compute_error(const MetricVector& setpoint, const MetricVector& observation, double beta);

/// Evaluates the criteria on the most recent error. SetpointSatisfied reads
/// the sign of e per dimension direction.
[[nodiscard]] bool check_convergence(const ErrorSignal& latest_error, const ConvergenceCriteria& criteria,
                                     const MetricSchema& schema);

/// Runs the closed loop:
///   y(t) = plant(p(t), u(t-1)) [+ eta for simulated plants] + nu
///   e(t) = r - beta y(t);  u(t) = controller(e(t))
///   p(t+1) = adapter(p(t), u(t))
/// until the criteria hold or max_iterations records exist. Plant failures
/// flagged transient are retried with doubling backoff; anything else ends
/// the run with status Aborted, the partial trace and the cause.
[[nodiscard]] LoopResult run_loop(Plant& plant, const TemplateSet& adapter, const LoopConfig& config,
                                  const PromptState& initial_prompt);

/// Same, with a caller-owned controller (which is reset first).
[[nodiscard]] LoopResult run_loop(Plant& plant, Controller& controller, const TemplateSet& adapter,
                                  const LoopConfig& config, const PromptState& initial_prompt);

[[nodiscard]] std::string_view to_string(LoopStatus status) noexcept;

}  // namespace promptctl
