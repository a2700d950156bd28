#pragma once

#include <array>
#include <cstddef>

namespace promptctl {

/// Linguistic labels, ordered from most negative to most positive.
enum class FuzzyLabel : int { NB = 0, NS = 1, Z = 2, PS = 3, PB = 4 };

inline constexpr std::size_t kFuzzySets = 5;

using FuzzyRuleTable = std::array<std::array<FuzzyLabel, kFuzzySets>, kFuzzySets>;

/// Triangle membership peaking at `center`, reaching zero at center +/- half_width.
struct TriangularSet {
  double center;
  double half_width;

  [[nodiscard]] double membership(double x) const noexcept;
};

/**
 * Mamdani rulebase over (error, error-derivative).
 *
 * Each input has five triangles NB..PB with centres at -L, -L/2, 0, L/2, L
 * and half-width L/2; inputs are clamped into [-L, L] first. Output sets are
 * triangles at {-1, -0.5, 0, 0.5, 1} * output_gain with half-width
 * 0.5 * output_gain. `rules[i][j]` is the consequent for error label i and
 * derivative label j.
 */
struct FuzzyRulebase {
  double error_range = 1.0;
  double derror_range = 1.0;
  double output_gain = 1.0;
  FuzzyRuleTable rules{};
  bool configured = false;

  /// PD-style diagonal table: consequent index = clamp(i + j - 2, 0, 4).
  /// Antisymmetric under input negation.
  static FuzzyRulebase symmetric(double error_range, double derror_range, double output_gain);

  [[nodiscard]] TriangularSet error_set(FuzzyLabel label) const noexcept;
  [[nodiscard]] TriangularSet derror_set(FuzzyLabel label) const noexcept;
  [[nodiscard]] TriangularSet output_set(FuzzyLabel label) const noexcept;

  /// True when rules[4-i][4-j] mirrors rules[i][j] for every entry.
  [[nodiscard]] bool is_antisymmetric() const noexcept;
};

/// Samples on the symmetric output grid used for centroid defuzzification.
inline constexpr int kFuzzyGridHalf = 1200;

/// Min-AND activation, max aggregation, centroid defuzzification.
/// Throws Error(Configuration) for an unconfigured rulebase or non-positive ranges.
[[nodiscard]] double fuzzy_step(const FuzzyRulebase& rulebase, double error, double derror);

}  // namespace promptctl
