#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "promptctl/plant.hpp"
#include "promptctl/prompt.hpp"

namespace promptctl {

/// Five-dimensional FPGA use case: LUT/FF/DSP/BRAM utilisation in percent
/// (lower is better) and timing slack in ns (higher is better).
namespace fpga {

[[nodiscard]] MetricSchema schema();
/// Report keys: LUTs, FFs, DSPs, BRAMs, slack_ns.
[[nodiscard]] ObservationSchema observation_schema();
/// "Reduce resource usage by 6% LUTs, ..., and improve timing by 0.15 ns."
[[nodiscard]] TemplateSet templates();

/// The HLS worked example: a 60% utilisation target on every resource and a
/// +1 ns slack target (slack setpoint = e + y = 3 + (-2)).
[[nodiscard]] MetricVector example_setpoint();
[[nodiscard]] std::vector<MetricVector> example_observations();
[[nodiscard]] const std::string& example_prompt();

/// Responsiveness that reproduces the example's y(0) -> y(1) move under
/// stateless kp = 0.6, e.g. DSPs 80 -> 70 under u = -12 gives 10/12.
[[nodiscard]] std::vector<double> example_responsiveness();
/// Slack gain reproducing -2 -> 0 ns under u = 0.6 * 3 = 1.8.
[[nodiscard]] double example_slack_coefficient();

}  // namespace fpga

/// Configuration of the simulated synthesis flow.
struct FpgaSimModel {
  enum class Mode { Scripted, Parametric };

  Mode mode = Mode::Scripted;
  MetricSchema schema;

  // Scripted: replayed in order, one vector per generate call.
  std::vector<MetricVector> script;

  // Parametric. Dimensions whose unit is "percent" are utilisations; the rest
  // follow the slack rule.
  std::vector<double> baseline;
  std::vector<double> responsiveness;  // rho[i] in (0, 1]
  std::vector<double> floor;
  double slack_coefficient = 1.0;

  /// Throws Error(Parameter) / Error(Schema) on an inconsistent model.
  void validate() const;
};

/// Simulated synthesis: the first call reports the baseline (or first scripted
/// vector); later calls move each utilisation by rho[i] * u[i], never below
/// floor[i] and kept inside [0, 100], and add slack_coefficient * u to slack.
class FpgaSimPlant final : public Plant {
 public:
  explicit FpgaSimPlant(FpgaSimModel model);

  [[nodiscard]] const MetricSchema& schema() const override { return model_.schema; }
  /// Throws Error(PlantExhausted) once a scripted sequence has been used up.
  PlantOutput generate(std::string_view prompt, const ControlSignal& u, Rng& rng) override;

  [[nodiscard]] std::size_t calls() const noexcept { return calls_; }
  [[nodiscard]] const std::vector<double>& current() const noexcept { return current_; }

 private:
  FpgaSimModel model_;
  std::vector<double> current_;
  std::vector<bool> utilisation_;
  std::size_t calls_ = 0;
};

/// Loads a scripted sequence: a JSON array of equal-length number arrays.
[[nodiscard]] std::vector<MetricVector> load_script(const std::filesystem::path& path, const MetricSchema& schema);
[[nodiscard]] std::vector<MetricVector> parse_script(std::string_view json_text, const MetricSchema& schema);

/// y(t+1) = a * y(t) + b * u(t) per dimension; the first call returns y(0).
class LinearPlant final : public Plant {
 public:
  LinearPlant(MetricSchema schema, std::vector<double> initial, double a = 1.0, double b = 1.0);

  [[nodiscard]] const MetricSchema& schema() const override { return schema_; }
  PlantOutput generate(std::string_view prompt, const ControlSignal& u, Rng& rng) override;

 private:
  MetricSchema schema_;
  std::vector<double> state_;
  double a_;
  double b_;
  bool started_ = false;
};

}  // namespace promptctl
