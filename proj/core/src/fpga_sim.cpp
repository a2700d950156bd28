#include "promptctl/fpga_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "promptctl/error.hpp"

namespace promptctl {

using nlohmann::json;

namespace fpga {

MetricSchema schema() {
  return MetricSchema({
      {"LUTs", "percent", Direction::LowerIsBetter},
      {"FFs", "percent", Direction::LowerIsBetter},
      {"DSPs", "percent", Direction::LowerIsBetter},
      {"BRAMs", "percent", Direction::LowerIsBetter},
      {"slack", "ns", Direction::HigherIsBetter},
  });
}

ObservationSchema observation_schema() {
  return ObservationSchema(schema(), {"LUTs", "FFs", "DSPs", "BRAMs", "slack_ns"});
}

TemplateSet templates() {
  TemplateSet set;
  for (const char* name : {"LUTs", "FFs", "DSPs", "BRAMs"}) {
    set.templates.push_back({name, "reduce resource usage by", "allow additional resource usage of",
                             std::string("{value}% ") + name, 2});
  }
  set.templates.push_back({"slack", "relax timing by", "improve timing by", "{value} ns", 2});
  return set;
}

MetricVector example_setpoint() { return MetricVector(schema(), {60.0, 60.0, 60.0, 60.0, 1.0}); }

std::vector<MetricVector> example_observations() {
  return {MetricVector(schema(), {70.0, 65.0, 80.0, 75.0, -2.0}),
          MetricVector(schema(), {65.0, 62.0, 70.0, 68.0, 0.0})};
}

const std::string& example_prompt() {
  static const std::string prompt =
      "Generate HLS C code for a neural network with 1 layer, 64 neurons each, using Vivado HLS.";
  return prompt;
}

std::vector<double> example_responsiveness() { return {5.0 / 6.0, 1.0, 10.0 / 12.0, 7.0 / 9.0, 0.0}; }

double example_slack_coefficient() { return 2.0 / 1.8; }

}  // namespace fpga

namespace {

bool is_utilisation(const MetricDimension& d) { return d.unit == "percent" || d.unit == "%"; }

std::string report(const MetricSchema& schema, const std::vector<double>& values) {
  json j = json::object();
  for (std::size_t i = 0; i < schema.size(); ++i) j[schema[i].name] = values[i];
  return j.dump();
}

}  // namespace

void FpgaSimModel::validate() const {
  if (schema.empty()) throw Error(ErrorKind::Schema, "FPGA model: empty schema");
  if (mode == Mode::Scripted) {
    if (script.empty()) throw Error(ErrorKind::Parameter, "FPGA model: scripted mode needs a sequence");
    for (const auto& v : script) {
      if (!(v.schema() == schema)) throw Error(ErrorKind::Schema, "FPGA model: script vector schema mismatch");
    }
    return;
  }
  const auto n = schema.size();
  require_length(baseline.size(), n, "FPGA baseline");
  require_length(responsiveness.size(), n, "FPGA responsiveness");
  require_length(floor.size(), n, "FPGA floor");
  require_finite(baseline, "FPGA baseline");
  if (!std::isfinite(slack_coefficient)) throw Error(ErrorKind::Parameter, "FPGA model: slack coefficient must be finite");
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_utilisation(schema[i])) continue;
    if (!(responsiveness[i] > 0.0 && responsiveness[i] <= 1.0))
      throw Error(ErrorKind::Parameter, "FPGA model: responsiveness of '" + schema[i].name + "' must be in (0, 1]");
    if (!(floor[i] >= 0.0 && floor[i] <= 100.0))
      throw Error(ErrorKind::Parameter, "FPGA model: floor of '" + schema[i].name + "' must be in [0, 100]");
    if (!(baseline[i] >= 0.0 && baseline[i] <= 100.0))
      throw Error(ErrorKind::Parameter, "FPGA model: baseline of '" + schema[i].name + "' must be in [0, 100]");
  }
}

FpgaSimPlant::FpgaSimPlant(FpgaSimModel model) : model_(std::move(model)) {
  model_.validate();
  for (const auto& d : model_.schema.dimensions()) utilisation_.push_back(is_utilisation(d));
  if (model_.mode == FpgaSimModel::Mode::Parametric) current_ = model_.baseline;
}

PlantOutput FpgaSimPlant::generate(std::string_view /*prompt*/, const ControlSignal& u, Rng& /*rng*/) {
  const auto n = model_.schema.size();
  require_length(u.size(), n, "FPGA plant control");
  require_finite(u.values, "FPGA plant control");

  if (model_.mode == FpgaSimModel::Mode::Scripted) {
    if (calls_ >= model_.script.size())
      throw Error(ErrorKind::PlantExhausted,
                  "scripted FPGA plant exhausted after " + std::to_string(model_.script.size()) + " samples");
    const auto& y = model_.script[calls_++];
    current_ = y.values();
    return {report(model_.schema, current_), y};
  }

  if (calls_++ > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (utilisation_[i]) {
        const double moved = current_[i] + model_.responsiveness[i] * u[i];
        current_[i] = std::clamp(std::max(model_.floor[i], moved), 0.0, 100.0);
      } else {
        current_[i] += model_.slack_coefficient * u[i];
      }
    }
  }
  return {report(model_.schema, current_), MetricVector(model_.schema, current_)};
}

std::vector<MetricVector> parse_script(std::string_view json_text, const MetricSchema& schema) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("scripted sequence is not valid JSON: ") + e.what());
  }
  if (!doc.is_array() || doc.empty())
    throw Error(ErrorKind::Parse, "scripted sequence must be a non-empty array of metric vectors");
  std::vector<MetricVector> out;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const auto& row = doc[k];
    if (!row.is_array()) throw Error(ErrorKind::Parse, "scripted sequence entry " + std::to_string(k) + " is not an array");
    std::vector<double> values;
    for (const auto& v : row) {
      if (!v.is_number())
        throw Error(ErrorKind::Parse, "scripted sequence entry " + std::to_string(k) + " has a non-numeric value");
      values.push_back(v.get<double>());
    }
    out.emplace_back(schema, std::move(values));
  }
  return out;
}

std::vector<MetricVector> load_script(const std::filesystem::path& path, const MetricSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Configuration, "cannot open scripted sequence '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_script(buf.str(), schema);
}

LinearPlant::LinearPlant(MetricSchema schema, std::vector<double> initial, double a, double b)
    : schema_(std::move(schema)), state_(std::move(initial)), a_(a), b_(b) {
  require_length(state_.size(), schema_.size(), "linear plant initial state");
  require_finite(state_, "linear plant initial state");
  if (!std::isfinite(a_) || !std::isfinite(b_)) throw Error(ErrorKind::Parameter, "linear plant: a and b must be finite");
}

PlantOutput LinearPlant::generate(std::string_view /*prompt*/, const ControlSignal& u, Rng& /*rng*/) {
  require_length(u.size(), state_.size(), "linear plant control");
  if (started_) {
    for (std::size_t i = 0; i < state_.size(); ++i) state_[i] = a_ * state_[i] + b_ * u[i];
  }
  started_ = true;
  if (!all_finite(state_)) throw Error(ErrorKind::Data, "linear plant diverged");
  return {report(schema_, state_), MetricVector(schema_, state_)};
}

}  // namespace promptctl
