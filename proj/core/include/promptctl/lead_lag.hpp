#pragma once

#include <vector>

#include "promptctl/metrics.hpp"

namespace promptctl {

/// First-order compensator K (T1 s + 1) / (T2 s + 1), applied per dimension.
///
/// The recurrence comes from the bilinear (Tustin) substitution
/// s = (2/dt) (z - 1) / (z + 1):
///
///   a0 u[n] = b0 e[n] + b1 e[n-1] - a1 u[n-1]
///   b0 = K (1 + 2 T1/dt),  b1 = K (1 - 2 T1/dt)
///   a0 = 1 + 2 T2/dt,      a1 = 1 - 2 T2/dt
///
/// with e[-1] = u[-1] = 0.
struct LeadLagParams {
  double gain = 1.0;
  double t1 = 1.0;
  double t2 = 1.0;
  std::vector<double> prev_error;
  std::vector<double> prev_output;

  /// Throws Error(Parameter) unless t1 > 0, t2 > 0 and gain is finite.
  static LeadLagParams make(double gain, double t1, double t2, std::size_t dims);

  friend bool operator==(const LeadLagParams&, const LeadLagParams&) = default;
};

struct TustinCoefficients {
  double b0, b1, a0, a1;
};

[[nodiscard]] TustinCoefficients tustin_coefficients(double gain, double t1, double t2, double dt);

struct LeadLagStepResult {
  ControlSignal control;
  LeadLagParams state;
};

[[nodiscard]] LeadLagStepResult lead_lag_step(const LeadLagParams& state, const ErrorSignal& error,
                                              double dt);

}  // namespace promptctl
