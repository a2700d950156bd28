#pragma once

#include <span>
#include <vector>

#include "promptctl/metrics.hpp"
#include "promptctl/plant.hpp"

namespace promptctl {

/// Zero-mean Gaussian noise per dimension for the two stages of the loop:
/// eta perturbs what a simulated plant produces, nu perturbs the observation.
/// An empty sigma vector disables that stage.
struct NoiseSpec {
  std::vector<double> eta_sigma;
  std::vector<double> nu_sigma;

  /// Throws Error(Parameter) for negative or non-finite sigmas.
  void validate() const;
};

enum class NoiseStage { Eta, Nu };

/// Adds one N(0, sigma[i]^2) draw per dimension. Dimensions with sigma 0 are
/// copied bit-exactly and consume no randomness.
[[nodiscard]] std::vector<double> apply_noise(std::span<const double> values, const NoiseSpec& spec,
                                              NoiseStage stage, Rng& rng);

[[nodiscard]] MetricVector apply_noise(const MetricVector& values, const NoiseSpec& spec, NoiseStage stage,
                                       Rng& rng);

}  // namespace promptctl
