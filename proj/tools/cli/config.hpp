#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <promptctl/fpga_sim.hpp>
#include <promptctl/llm_http.hpp>
#include <promptctl/loop.hpp>
#include <promptctl/surrogate.hpp>
#include <promptctl/tuning.hpp>

namespace promptctl::cli {

/// Invalid configuration. `what()` is a ready-to-print "file:line: message".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScriptedFpgaPlantConfig {
  std::vector<MetricVector> sequence;
};

struct ParametricFpgaPlantConfig {
  FpgaSimModel model;
};

struct LinearPlantConfig {
  std::vector<double> initial;
  double a = 1.0;
  double b = 1.0;
};

struct SurrogatePlantConfig {
  SurrogateParams params;
  DecodeMode decode = DecodeMode::Argmax;
};

struct LlmPlantConfig {
  LlmHttpConfig http;
};

using PlantConfig =
    std::variant<ScriptedFpgaPlantConfig, ParametricFpgaPlantConfig, LinearPlantConfig, SurrogatePlantConfig, LlmPlantConfig>;

struct OutputPaths {
  std::optional<std::filesystem::path> trace_csv;
  std::optional<std::filesystem::path> summary_json;
  std::optional<std::filesystem::path> report_json;
};

struct RunConfig {
  MetricSchema schema;
  ObservationSchema observation{MetricSchema()};
  TemplateSet templates;
  PlantConfig plant;
  LoopConfig loop;
  /// Named controllers for `compare`, in document order.
  std::vector<std::pair<std::string, ControllerSpec>> controllers;
  bool has_controller = false;
  std::string initial_prompt;
  OutputPaths output;
};

struct TuneConfig {
  std::variant<SecondOrderDelayPlant::Params, double /* static gain */> plant;
  double static_sample_time = 1.0;
  double relay_amplitude = 1.0;
  int max_steps = 100000;
  std::optional<std::filesystem::path> gains_output;
};

/// Reads a file, applies `--set key.path=value` overrides, then validates
/// strictly (unknown keys are errors). Throws ConfigError.
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);
[[nodiscard]] RunConfig parse_run_config(const std::string& text, const std::string& source,
                                         const std::vector<std::string>& overrides,
                                         const std::filesystem::path& base_dir = {});

[[nodiscard]] TuneConfig load_tune_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);
[[nodiscard]] TuneConfig parse_tune_config(const std::string& text, const std::string& source,
                                           const std::vector<std::string>& overrides);

/// Fresh plant instance for the configured model. Each call returns an
/// independent plant with identical initial conditions.
[[nodiscard]] std::unique_ptr<Plant> make_plant(const RunConfig& config);

}  // namespace promptctl::cli
