#include "promptctl/metrics.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

#include "promptctl/error.hpp"

namespace promptctl {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::NonStabilizable: return "non-stabilizable";
    case ErrorKind::Conditioning: return "conditioning";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::TuningFailure: return "tuning-failure";
    case ErrorKind::Observation: return "observation";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::PlantExhausted: return "plant-exhausted";
    case ErrorKind::Plant: return "plant";
    case ErrorKind::Data: return "data";
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::Http: return "http";
    case ErrorKind::MalformedResponse: return "malformed-response";
  }
  return "unknown";
}

MetricSchema::MetricSchema()
    : dims_(std::make_shared<const std::vector<MetricDimension>>()) {}

MetricSchema::MetricSchema(std::vector<MetricDimension> dims) {
  std::unordered_set<std::string> seen;
  for (const auto& d : dims) {
    if (d.name.empty()) throw Error(ErrorKind::Schema, "metric dimension with empty name");
    if (d.unit.empty())
      throw Error(ErrorKind::Schema, "metric dimension '" + d.name + "' has an empty unit");
    if (!seen.insert(d.name).second)
      throw Error(ErrorKind::Schema, "duplicate metric dimension '" + d.name + "'");
  }
  dims_ = std::make_shared<const std::vector<MetricDimension>>(std::move(dims));
}

std::optional<std::size_t> MetricSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < dims_->size(); ++i) {
    if ((*dims_)[i].name == name) return i;
  }
  return std::nullopt;
}

MetricVector::MetricVector(MetricSchema schema, std::vector<double> values)
    : schema_(std::move(schema)), values_(std::move(values)) {
  require_length(values_.size(), schema_.size(), "metric vector");
  require_finite(values_, "metric vector");
}

MetricVector MetricVector::zeros(MetricSchema schema) {
  const auto n = schema.size();
  return MetricVector(std::move(schema), std::vector<double>(n, 0.0));
}

double MetricVector::at(std::string_view name) const {
  const auto idx = schema_.index_of(name);
  if (!idx) throw Error(ErrorKind::Schema, "unknown metric dimension '" + std::string(name) + "'");
  return values_[*idx];
}

bool all_finite(std::span<const double> values) noexcept {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_finite(std::span<const double> values, std::string_view what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorKind::InvalidInput,
                  std::string(what) + ": non-finite value at index " + std::to_string(i));
    }
  }
}

void require_length(std::size_t actual, std::size_t expected, std::string_view what) {
  if (actual != expected) {
    throw Error(ErrorKind::Schema, std::string(what) + ": expected " + std::to_string(expected) +
                                       " dimensions, got " + std::to_string(actual));
  }
}

}  // namespace promptctl
