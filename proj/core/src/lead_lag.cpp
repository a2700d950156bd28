#include "promptctl/lead_lag.hpp"

#include <cmath>

#include "promptctl/error.hpp"

namespace promptctl {

namespace {

void validate(double gain, double t1, double t2) {
  if (!(t1 > 0.0) || !(t2 > 0.0) || !std::isfinite(t1) || !std::isfinite(t2))
    throw Error(ErrorKind::Parameter, "lead-lag time constants must be positive and finite");
  if (!std::isfinite(gain)) throw Error(ErrorKind::Parameter, "lead-lag gain must be finite");
}

}  // namespace

LeadLagParams LeadLagParams::make(double gain, double t1, double t2, std::size_t dims) {
  validate(gain, t1, t2);
  LeadLagParams p;
  p.gain = gain;
  p.t1 = t1;
  p.t2 = t2;
  p.prev_error.assign(dims, 0.0);
  p.prev_output.assign(dims, 0.0);
  return p;
}

TustinCoefficients tustin_coefficients(double gain, double t1, double t2, double dt) {
  const double lead = 2.0 * t1 / dt;
  const double lag = 2.0 * t2 / dt;
  return {gain * (1.0 + lead), gain * (1.0 - lead), 1.0 + lag, 1.0 - lag};
}

LeadLagStepResult lead_lag_step(const LeadLagParams& state, const ErrorSignal& error, double dt) {
  validate(state.gain, state.t1, state.t2);
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw Error(ErrorKind::InvalidInput, "lead_lag_step: dt must be positive and finite");
  require_finite(error.values, "lead_lag_step error");
  const std::size_t n = state.prev_error.size();
  require_length(error.size(), n, "lead_lag_step error");
  require_length(state.prev_output.size(), n, "lead_lag_step state");

  const auto c = tustin_coefficients(state.gain, state.t1, state.t2, dt);
  LeadLagStepResult out{ControlSignal::zeros(n), state};
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (c.b0 * error[i] + c.b1 * state.prev_error[i] - c.a1 * state.prev_output[i]) / c.a0;
    out.control[i] = u;
    out.state.prev_error[i] = error[i];
    out.state.prev_output[i] = u;
  }
  return out;
}

}  // namespace promptctl
