#pragma once

#include <random>
#include <string>
#include <string_view>

#include "promptctl/metrics.hpp"

namespace promptctl {

/// Every stochastic draw in a run comes from one of these, seeded from the
/// loop's rng_seed.
using Rng = std::mt19937_64;

struct PlantOutput {
  std::string artifact;  // generated text / token output (sigma)
  MetricVector observation;
};

/// The controlled system: a generator followed by a measurement.
///
/// `generate` receives the composed prompt p(t) and the control applied on
/// the previous step (zeros on the first call) and returns the artifact and
/// its measured metrics.
class Plant {
 public:
  virtual ~Plant() = default;

  [[nodiscard]] virtual const MetricSchema& schema() const = 0;
  virtual PlantOutput generate(std::string_view prompt, const ControlSignal& u, Rng& rng) = 0;

  /// May be invoked from several loops at once.
  [[nodiscard]] virtual bool reentrant() const noexcept { return false; }
  /// In-process simulation; output-stage metric noise applies to these.
  [[nodiscard]] virtual bool simulated() const noexcept { return true; }
};

}  // namespace promptctl
