#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "promptctl/metrics.hpp"

namespace promptctl {

/// How one metric dimension is phrased in a directive.
///
/// `item_format` must contain "{value}", which is replaced by |u| rendered
/// with `precision` decimals (trailing zeros dropped): "{value}% LUTs" -> "6% LUTs".
struct DirectiveTemplate {
  std::string dimension;
  std::string decrease_phrase;  // chosen when u < 0
  std::string increase_phrase;  // chosen when u > 0
  std::string item_format;
  int precision = 2;
};

struct TemplateSet {
  std::vector<DirectiveTemplate> templates;
  /// |u| below this is treated as no control.
  double dead_band = 1e-9;
  /// Prefix for every directive after the first ("Further reduce ...").
  std::string follow_up_prefix = "Further";
  /// Keep only the most recent N directives in the prompt; 0 keeps all.
  std::size_t max_history = 5;

  /// Throws Error(Configuration) if `dimension` has no template.
  [[nodiscard]] const DirectiveTemplate& for_dimension(std::string_view dimension) const;

  /// Generic phrasing derived from each dimension's name, unit and direction.
  static TemplateSet defaults_for(const MetricSchema& schema);
};

/// Renders a magnitude with `precision` decimals and no trailing zeros.
[[nodiscard]] std::string format_magnitude(double magnitude, int precision);

/// Deterministic natural-language rendering of a control vector.
///
/// Items sharing a phrase are grouped in schema order ("reduce resource usage
/// by 6% LUTs, 3% FFs"); groups are joined with commas and a final ", and ".
/// Returns an empty string when every |u[i]| is inside the dead-band.
/// Throws Error(Configuration) for a dimension without a template and
/// Error(Schema) on length mismatch.
[[nodiscard]] std::string render_control(const ControlSignal& u, const MetricSchema& schema,
                                         const TemplateSet& templates, bool follow_up = false);

/// The prompt as a base text plus an ordered history of directives.
class PromptState {
 public:
  PromptState() = default;
  explicit PromptState(std::string base) : base_(std::move(base)) {}

  [[nodiscard]] const std::string& base() const noexcept { return base_; }
  [[nodiscard]] const std::vector<std::string>& directives() const noexcept { return directives_; }
  /// Directives appended over the whole run, including any truncated away.
  [[nodiscard]] std::size_t issued() const noexcept { return issued_; }
  /// Base followed by the retained directives, single-space separated.
  [[nodiscard]] std::string composed() const;

  [[nodiscard]] PromptState with_directive(std::string directive, std::size_t max_history) const;

  friend bool operator==(const PromptState&, const PromptState&) = default;

 private:
  std::string base_;
  std::vector<std::string> directives_;
  std::size_t issued_ = 0;
};

/// p(t+1) = p(t) + u(t): appends the rendered directive. Zero control (inside
/// the dead-band) returns the state unchanged.
[[nodiscard]] PromptState update_prompt(const PromptState& state, const ControlSignal& u,
                                        const MetricSchema& schema, const TemplateSet& templates);

/// Maps report keys onto metric dimensions, one-to-one.
class ObservationSchema {
 public:
  /// `keys[i]` is the report key for `metrics[i]`. Throws Error(Schema) unless
  /// the mapping is a bijection.
  ObservationSchema(MetricSchema metrics, std::vector<std::string> keys);
  /// Uses each dimension's name as its key.
  explicit ObservationSchema(MetricSchema metrics);

  [[nodiscard]] const MetricSchema& metrics() const noexcept { return metrics_; }
  [[nodiscard]] const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  MetricSchema metrics_;
  std::vector<std::string> keys_;
};

/// Reads a JSON object report. Each key maps to a number or to
/// {"value": number, "unit": string}; a unit, when present, must match the
/// dimension's unit ("%" is accepted for "percent").
///
/// Throws Error(Observation) naming the dimension for a missing key,
/// Error(Parse) for malformed JSON or non-numeric values.
[[nodiscard]] MetricVector parse_observation(std::string_view report, const ObservationSchema& schema);

/// Like parse_observation, but first finds the report inside free text (LLM
/// completions wrap it in prose and code). The last balanced JSON object that
/// carries at least one report key wins.
[[nodiscard]] MetricVector parse_observation_from_text(std::string_view text,
                                                       const ObservationSchema& schema);

}  // namespace promptctl
