#include "promptctl/noise.hpp"

#include <cmath>

#include "promptctl/error.hpp"

namespace promptctl {

void NoiseSpec::validate() const {
  for (const auto* sig : {&eta_sigma, &nu_sigma}) {
    for (double s : *sig) {
      if (!(s >= 0.0) || !std::isfinite(s))
        throw Error(ErrorKind::Parameter, "noise sigma must be finite and non-negative");
    }
  }
}

std::vector<double> apply_noise(std::span<const double> values, const NoiseSpec& spec, NoiseStage stage,
                                Rng& rng) {
  const auto& sigma = stage == NoiseStage::Eta ? spec.eta_sigma : spec.nu_sigma;
  std::vector<double> out(values.begin(), values.end());
  if (sigma.empty()) return out;
  require_length(sigma.size(), values.size(), "noise sigma");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (sigma[i] < 0.0) throw Error(ErrorKind::Parameter, "noise sigma must be non-negative");
    if (sigma[i] == 0.0) continue;
    std::normal_distribution<double> dist(0.0, sigma[i]);
    out[i] += dist(rng);
  }
  return out;
}

MetricVector apply_noise(const MetricVector& values, const NoiseSpec& spec, NoiseStage stage, Rng& rng) {
  return MetricVector(values.schema(), apply_noise(values.values(), spec, stage, rng));
}

}  // namespace promptctl
