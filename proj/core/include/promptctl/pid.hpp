#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "promptctl/metrics.hpp"

namespace promptctl {

/// Proportional, integral and derivative gains. All non-negative, not all zero.
class PidGains {
 public:
  /// Throws Error(Parameter) if any gain is negative or non-finite, or all are zero.
  PidGains(double kp, double ki, double kd);

  [[nodiscard]] double kp() const noexcept { return kp_; }
  [[nodiscard]] double ki() const noexcept { return ki_; }
  [[nodiscard]] double kd() const noexcept { return kd_; }

  friend bool operator==(const PidGains&, const PidGains&) = default;

 private:
  double kp_;
  double ki_;
  double kd_;
};

/// Whether the controller keeps history between calls.
///
/// Stateless mirrors an LLM reached through a stateless API: every request is
/// a fresh session, so the integral and derivative contributions vanish and
/// the output is the proportional term alone.
enum class SessionMode { Stateful, Stateless };

struct PidState {
  std::vector<double> integral;
  std::optional<std::vector<double>> prev_error;
  std::uint64_t step = 0;
  std::optional<double> anti_windup_limit;

  static PidState zero(std::size_t dims, std::optional<double> anti_windup_limit = std::nullopt);

  friend bool operator==(const PidState&, const PidState&) = default;
};

struct PidStepResult {
  ControlSignal control;
  PidState state;
};

/// One discrete PID update.
///
/// Stateful: I' = clamp(I + e*dt), d = (e - e_prev)/dt (0 on the first step),
/// u = kp*e + ki*I' + kd*d.
/// Stateless: u = kp*e, the integral stays at zero; prev_error is still
/// recorded so traces can show it.
///
/// Throws Error(InvalidInput) for non-finite error or dt <= 0, Error(Schema)
/// when the error length does not match the state.
[[nodiscard]] PidStepResult pid_step(const PidState& state, const ErrorSignal& error, double dt,
                                     const PidGains& gains, SessionMode mode);

}  // namespace promptctl
