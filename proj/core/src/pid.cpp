#include "promptctl/pid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "promptctl/error.hpp"

namespace promptctl {

PidGains::PidGains(double kp, double ki, double kd) : kp_(kp), ki_(ki), kd_(kd) {
  for (double g : {kp, ki, kd}) {
    if (!std::isfinite(g) || g < 0.0)
      throw Error(ErrorKind::Parameter, "PID gains must be finite and non-negative");
  }
  if (kp + ki + kd <= 0.0) throw Error(ErrorKind::Parameter, "PID gains must not all be zero");
}

PidState PidState::zero(std::size_t dims, std::optional<double> anti_windup_limit) {
  if (anti_windup_limit && !(*anti_windup_limit > 0.0 && std::isfinite(*anti_windup_limit)))
    throw Error(ErrorKind::Parameter, "anti-windup limit must be a positive finite number");
  PidState s;
  s.integral.assign(dims, 0.0);
  s.anti_windup_limit = anti_windup_limit;
  return s;
}

PidStepResult pid_step(const PidState& state, const ErrorSignal& error, double dt,
                       const PidGains& gains, SessionMode mode) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw Error(ErrorKind::InvalidInput, "pid_step: dt must be positive and finite");
  require_finite(error.values, "pid_step error");
  const std::size_t n = state.integral.size();
  require_length(error.size(), n, "pid_step error");
  if (state.prev_error) require_length(state.prev_error->size(), n, "pid_step previous error");

  PidStepResult out{ControlSignal::zeros(n), state};
  PidState& next = out.state;

  if (mode == SessionMode::Stateless) {
    for (std::size_t i = 0; i < n; ++i) {
      out.control[i] = gains.kp() * error[i];
      next.integral[i] = 0.0;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double integral = state.integral[i] + error[i] * dt;
      if (state.anti_windup_limit) {
        const double lim = *state.anti_windup_limit;
        integral = std::clamp(integral, -lim, lim);
      }
      const double derivative = state.prev_error ? (error[i] - (*state.prev_error)[i]) / dt : 0.0;
      next.integral[i] = integral;
      out.control[i] = gains.kp() * error[i] + gains.ki() * integral + gains.kd() * derivative;
    }
  }
  next.prev_error = error.values;
  ++next.step;
  return out;
}

}  // namespace promptctl
