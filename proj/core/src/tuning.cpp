#include "promptctl/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "promptctl/error.hpp"

namespace promptctl {

PidGains ziegler_nichols_gains(double ku, double tu) {
  if (!(ku > 0.0) || !(tu > 0.0) || !std::isfinite(ku) || !std::isfinite(tu))
    throw Error(ErrorKind::InvalidInput, "Ziegler-Nichols: Ku and Tu must be positive and finite");
  const double kp = 0.6 * ku;
  const double ti = tu / 2.0;
  const double td = tu / 8.0;
  return PidGains(kp, kp / ti, kp * td);
}

SecondOrderDelayPlant::SecondOrderDelayPlant(Params p) : p_(p) {
  if (!(p_.tau1 > 0.0) || !(p_.tau2 > 0.0) || !(p_.delay >= 0.0) || !(p_.sample_time > 0.0) ||
      p_.substeps < 1 || !std::isfinite(p_.gain))
    throw Error(ErrorKind::Parameter, "second-order plant: invalid parameters");
  reset();
}

void SecondOrderDelayPlant::reset() {
  x1_ = 0.0;
  x2_ = 0.0;
  const auto lag = static_cast<std::size_t>(std::lround(p_.delay / p_.sample_time));
  pending_.assign(lag, 0.0);
}

double SecondOrderDelayPlant::step(double u) {
  pending_.push_back(u);
  const double applied = pending_.front();
  pending_.pop_front();

  const double h = p_.sample_time / p_.substeps;
  auto deriv = [&](double a, double b, double& da, double& db) {
    da = (p_.gain * applied - a) / p_.tau1;
    db = (a - b) / p_.tau2;
  };
  for (int s = 0; s < p_.substeps; ++s) {
    double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
    deriv(x1_, x2_, k1a, k1b);
    deriv(x1_ + 0.5 * h * k1a, x2_ + 0.5 * h * k1b, k2a, k2b);
    deriv(x1_ + 0.5 * h * k2a, x2_ + 0.5 * h * k2b, k3a, k3b);
    deriv(x1_ + h * k3a, x2_ + h * k3b, k4a, k4b);
    x1_ += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    x2_ += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
  }
  return x2_;
}

double SecondOrderDelayPlant::phase_crossover_frequency() const {
  if (p_.delay <= 0.0)
    throw Error(ErrorKind::Parameter, "second-order plant without delay never reaches -180 degrees");
  auto phase = [&](double w) {
    return -w * p_.delay - std::atan(w * p_.tau1) - std::atan(w * p_.tau2);
  };
  double lo = 0.0;
  double hi = 1.0;
  while (phase(hi) > -std::numbers::pi) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phase(mid) > -std::numbers::pi ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double SecondOrderDelayPlant::analytic_ultimate_period() const {
  return 2.0 * std::numbers::pi / phase_crossover_frequency();
}

double SecondOrderDelayPlant::analytic_ultimate_gain() const {
  const double w = phase_crossover_frequency();
  const double mag = std::abs(p_.gain) / std::sqrt((1.0 + w * w * p_.tau1 * p_.tau1) *
                                                   (1.0 + w * w * p_.tau2 * p_.tau2));
  return 1.0 / mag;
}

RelayTuneResult relay_autotune(TunablePlant& plant, double relay_amplitude, int max_steps,
                               const RelayTuneOptions& options) {
  if (!(relay_amplitude > 0.0) || !std::isfinite(relay_amplitude) || max_steps <= 0)
    throw Error(ErrorKind::InvalidInput, "relay autotune: amplitude and step budget must be positive");

  plant.reset();
  const int needed = options.warmup_cycles + options.cycles_to_average;
  std::vector<double> ys;
  ys.reserve(static_cast<std::size_t>(max_steps));
  std::vector<double> crossings;  // upward zero crossings, fractional sample index

  double y = 0.0;
  for (int k = 0; k < max_steps; ++k) {
    const double u = (-y >= 0.0) ? relay_amplitude : -relay_amplitude;
    const double next = plant.step(u);
    if (!std::isfinite(next)) throw Error(ErrorKind::TuningFailure, "relay autotune: plant output diverged");
    ys.push_back(next);
    if (k > 0 && y < 0.0 && next >= 0.0) {
      crossings.push_back(static_cast<double>(k - 1) + (-y) / (next - y));
      const auto nc = static_cast<int>(crossings.size());
      if (nc >= 2 && crossings[nc - 1] - crossings[nc - 2] < options.min_period_samples) {
        throw Error(ErrorKind::TuningFailure,
                    "relay autotune: no oscillation (output chatters at the sampling rate; "
                    "the plant has no dynamics)");
      }
      if (nc - 1 >= needed) {
        const std::size_t first = crossings.size() - 1 - static_cast<std::size_t>(options.cycles_to_average);
        const double mean_period =
            (crossings.back() - crossings[first]) / options.cycles_to_average;
        bool steady = true;
        for (std::size_t c = first; c + 1 < crossings.size(); ++c) {
          const double period = crossings[c + 1] - crossings[c];
          if (std::abs(period - mean_period) > options.period_tolerance * mean_period) steady = false;
        }
        if (steady) {
          // Amplitude of the fundamental over the averaged cycles.
          const auto lo = static_cast<std::size_t>(std::ceil(crossings[first]));
          const double w = 2.0 * std::numbers::pi / mean_period;
          double re = 0.0;
          double im = 0.0;
          const std::size_t n = ys.size() - lo;
          for (std::size_t i = lo; i < ys.size(); ++i) {
            re += ys[i] * std::cos(w * static_cast<double>(i));
            im += ys[i] * std::sin(w * static_cast<double>(i));
          }
          const double amplitude = 2.0 * std::hypot(re, im) / static_cast<double>(n);
          if (!(amplitude > 0.0)) break;
          RelayTuneResult r;
          r.oscillation_amplitude = amplitude;
          r.ku = 4.0 * relay_amplitude / (std::numbers::pi * amplitude);
          r.tu = mean_period * plant.sample_time();
          r.cycles_observed = nc - 1;
          return r;
        }
      }
    }
    y = next;
  }
  throw Error(ErrorKind::TuningFailure, "relay autotune: no sustained oscillation detected within " +
                                            std::to_string(max_steps) + " steps");
}

}  // namespace promptctl
