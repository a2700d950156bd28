#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace promptctl {

enum class Direction { LowerIsBetter, HigherIsBetter };

struct MetricDimension {
  std::string name;
  std::string unit;
  Direction direction = Direction::LowerIsBetter;

  friend bool operator==(const MetricDimension&, const MetricDimension&) = default;
};

/// Ordered, immutable list of metric dimensions. Copies share storage.
class MetricSchema {
 public:
  MetricSchema();
  /// Throws Error(Schema) on duplicate names or empty units.
  explicit MetricSchema(std::vector<MetricDimension> dims);

  [[nodiscard]] std::size_t size() const noexcept { return dims_->size(); }
  [[nodiscard]] bool empty() const noexcept { return dims_->empty(); }
  [[nodiscard]] const MetricDimension& operator[](std::size_t i) const { return (*dims_)[i]; }
  [[nodiscard]] std::span<const MetricDimension> dimensions() const noexcept { return *dims_; }
  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const;

  friend bool operator==(const MetricSchema& a, const MetricSchema& b) {
    return a.dims_ == b.dims_ || *a.dims_ == *b.dims_;
  }

 private:
  std::shared_ptr<const std::vector<MetricDimension>> dims_;
};

/// Named, unit-tagged measurement. Houses setpoints and observations.
class MetricVector {
 public:
  MetricVector() = default;
  /// Throws Error(Schema) on length mismatch, Error(InvalidInput) on non-finite values.
  MetricVector(MetricSchema schema, std::vector<double> values);

  static MetricVector zeros(MetricSchema schema);

  [[nodiscard]] const MetricSchema& schema() const noexcept { return schema_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  /// Throws Error(Schema) if the dimension is unknown.
  [[nodiscard]] double at(std::string_view name) const;

  friend bool operator==(const MetricVector&, const MetricVector&) = default;

 private:
  MetricSchema schema_;
  std::vector<double> values_;
};

/// Per-dimension real vector with a phantom tag so error and control signals
/// cannot be mixed up.
template <typename Tag>
struct SignalVector {
  std::vector<double> values;

  SignalVector() = default;
  explicit SignalVector(std::vector<double> v) : values(std::move(v)) {}
  static SignalVector zeros(std::size_t n) { return SignalVector(std::vector<double>(n, 0.0)); }

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  friend bool operator==(const SignalVector&, const SignalVector&) = default;
};

using ErrorSignal = SignalVector<struct ErrorSignalTag>;
using ControlSignal = SignalVector<struct ControlSignalTag>;

[[nodiscard]] bool all_finite(std::span<const double> values) noexcept;

/// Throws Error(InvalidInput) naming `what` if any value is NaN or infinite.
void require_finite(std::span<const double> values, std::string_view what);

/// Throws Error(Schema) unless `actual == expected`.
void require_length(std::size_t actual, std::size_t expected, std::string_view what);

}  // namespace promptctl
