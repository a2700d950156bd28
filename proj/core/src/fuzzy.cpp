#include "promptctl/fuzzy.hpp"

#include <algorithm>
#include <cmath>

#include "promptctl/error.hpp"

namespace promptctl {

namespace {

constexpr int index(FuzzyLabel l) { return static_cast<int>(l); }

double label_offset(FuzzyLabel l) { return static_cast<double>(index(l) - 2); }

}  // namespace

double TriangularSet::membership(double x) const noexcept {
  return std::max(0.0, 1.0 - std::abs(x - center) / half_width);
}

FuzzyRulebase FuzzyRulebase::symmetric(double error_range, double derror_range, double output_gain) {
  FuzzyRulebase rb;
  rb.error_range = error_range;
  rb.derror_range = derror_range;
  rb.output_gain = output_gain;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      rb.rules[i][j] = static_cast<FuzzyLabel>(std::clamp(i + j - 2, 0, 4));
    }
  }
  rb.configured = true;
  return rb;
}

TriangularSet FuzzyRulebase::error_set(FuzzyLabel label) const noexcept {
  return {label_offset(label) * 0.5 * error_range, 0.5 * error_range};
}

TriangularSet FuzzyRulebase::derror_set(FuzzyLabel label) const noexcept {
  return {label_offset(label) * 0.5 * derror_range, 0.5 * derror_range};
}

TriangularSet FuzzyRulebase::output_set(FuzzyLabel label) const noexcept {
  return {label_offset(label) * 0.5 * output_gain, 0.5 * output_gain};
}

bool FuzzyRulebase::is_antisymmetric() const noexcept {
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (index(rules[i][j]) != 4 - index(rules[4 - i][4 - j])) return false;
    }
  }
  return true;
}

double fuzzy_step(const FuzzyRulebase& rb, double error, double derror) {
  if (!rb.configured) throw Error(ErrorKind::Configuration, "fuzzy controller: empty rulebase");
  if (!(rb.error_range > 0.0) || !(rb.derror_range > 0.0) || !(rb.output_gain > 0.0) ||
      !std::isfinite(rb.error_range) || !std::isfinite(rb.derror_range) || !std::isfinite(rb.output_gain))
    throw Error(ErrorKind::Configuration, "fuzzy controller: ranges and output gain must be positive");
  if (!std::isfinite(error) || !std::isfinite(derror))
    throw Error(ErrorKind::InvalidInput, "fuzzy controller: inputs must be finite");

  const double e = std::clamp(error, -rb.error_range, rb.error_range);
  const double de = std::clamp(derror, -rb.derror_range, rb.derror_range);

  std::array<double, kFuzzySets> mu_e{};
  std::array<double, kFuzzySets> mu_de{};
  for (int i = 0; i < 5; ++i) {
    mu_e[i] = rb.error_set(static_cast<FuzzyLabel>(i)).membership(e);
    mu_de[i] = rb.derror_set(static_cast<FuzzyLabel>(i)).membership(de);
  }

  // Firing strength per output label: max over rules of min(mu_e, mu_de).
  std::array<double, kFuzzySets> strength{};
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const int out = index(rb.rules[i][j]);
      strength[out] = std::max(strength[out], std::min(mu_e[i], mu_de[j]));
    }
  }

  std::array<TriangularSet, kFuzzySets> sets{};
  for (int k = 0; k < 5; ++k) sets[k] = rb.output_set(static_cast<FuzzyLabel>(k));
  auto aggregate = [&](double x) {
    double m = 0.0;
    for (int k = 0; k < 5; ++k) m = std::max(m, std::min(strength[k], sets[k].membership(x)));
    return m;
  };

  // Symmetric grid over the output support; mirrored samples are paired so the
  // centroid is exactly odd under a mirrored aggregate.
  const double step = 1.5 * rb.output_gain / kFuzzyGridHalf;
  double num = 0.0;
  double den = aggregate(0.0);
  for (int k = 1; k <= kFuzzyGridHalf; ++k) {
    const double x = k * step;
    const double right = aggregate(x);
    const double left = aggregate(-x);
    num += x * (right - left);
    den += right + left;
  }
  if (den <= 0.0) return 0.0;
  // Clamp removes last-ulp grid roundoff; the exact centroid lies inside the centres.
  return std::clamp(num / den, -rb.output_gain, rb.output_gain);
}

}  // namespace promptctl
