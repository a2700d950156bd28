#pragma once

#include <deque>
#include <memory>

#include "promptctl/pid.hpp"

namespace promptctl {

/// Classic closed-loop Ziegler-Nichols table: kp = 0.6 Ku, Ti = Tu/2, Td = Tu/8.
/// Throws Error(InvalidInput) unless both arguments are positive and finite.
[[nodiscard]] PidGains ziegler_nichols_gains(double ku, double tu);

/// Single-input single-output system advanced one sample at a time.
class TunablePlant {
 public:
  virtual ~TunablePlant() = default;
  /// Applies `u` for one sample and returns the output at the end of it.
  virtual double step(double u) = 0;
  virtual void reset() = 0;
  [[nodiscard]] virtual double sample_time() const = 0;
};

/// K e^{-L s} / ((tau1 s + 1)(tau2 s + 1)), integrated with RK4 sub-steps.
class SecondOrderDelayPlant final : public TunablePlant {
 public:
  struct Params {
    double gain = 1.0;
    double tau1 = 1.0;
    double tau2 = 0.5;
    double delay = 0.2;
    double sample_time = 0.01;
    int substeps = 8;
  };

  explicit SecondOrderDelayPlant(Params p);

  double step(double u) override;
  void reset() override;
  [[nodiscard]] double sample_time() const override { return p_.sample_time; }
  [[nodiscard]] const Params& params() const noexcept { return p_; }

  /// Frequency where the phase reaches -pi, found by bisection.
  [[nodiscard]] double phase_crossover_frequency() const;
  /// Ultimate period 2 pi / w180.
  [[nodiscard]] double analytic_ultimate_period() const;
  /// Ultimate gain 1 / |G(j w180)|.
  [[nodiscard]] double analytic_ultimate_gain() const;

 private:
  Params p_;
  std::deque<double> pending_;
  double x1_ = 0.0;
  double x2_ = 0.0;
};

/// Memoryless y = gain * u.
class StaticGainPlant final : public TunablePlant {
 public:
  explicit StaticGainPlant(double gain, double sample_time = 1.0) : gain_(gain), dt_(sample_time) {}
  double step(double u) override { return gain_ * u; }
  void reset() override {}
  [[nodiscard]] double sample_time() const override { return dt_; }

 private:
  double gain_;
  double dt_;
};

struct RelayTuneResult {
  double ku = 0.0;
  double tu = 0.0;
  double oscillation_amplitude = 0.0;
  int cycles_observed = 0;
};

struct RelayTuneOptions {
  /// Full cycles averaged once the oscillation is deemed sustained.
  int cycles_to_average = 4;
  /// Cycles discarded as start-up transient.
  int warmup_cycles = 3;
  /// Consecutive periods must agree to this relative tolerance.
  double period_tolerance = 0.02;
  /// Periods shorter than this many samples are relay chatter, not oscillation.
  int min_period_samples = 4;
};

/// Relay feedback experiment (Astrom-Hagglund). Drives u = +/-d on the sign
/// of -y and measures the limit cycle: ku = 4 d / (pi a), tu = mean period.
/// Resets the plant first. Throws Error(TuningFailure) when no sustained
/// oscillation is found within `max_steps`.
[[nodiscard]] RelayTuneResult relay_autotune(TunablePlant& plant, double relay_amplitude, int max_steps,
                                             const RelayTuneOptions& options = {});

}  // namespace promptctl
