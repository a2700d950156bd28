#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace promptctl {

/// Failure categories surfaced by the library. Callers switch on these; the
/// message carries the human-readable detail.
enum class ErrorKind {
  InvalidInput,     // non-finite value, non-positive dt
  Schema,           // metric schema / length mismatch
  Parameter,        // controller parameter out of range
  NonStabilizable,  // Riccati iteration did not converge
  Conditioning,     // singular matrix during a solve
  Configuration,    // bad or missing configuration
  TuningFailure,    // relay experiment found no oscillation
  Observation,      // report lacks a required dimension
  Parse,            // report value is not usable
  PlantExhausted,   // scripted plant ran out of samples
  Plant,            // generic plant failure
  Data,             // non-finite observation inside the loop
  Timeout,          // network timeout
  Http,             // non-success HTTP status
  MalformedResponse // response body could not be interpreted
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, bool transient = false)
      : std::runtime_error(message), kind_(kind), transient_(transient) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  /// True when a retry may succeed (network hiccup, 5xx, ...).
  [[nodiscard]] bool transient() const noexcept { return transient_; }

 private:
  ErrorKind kind_;
  bool transient_;
};

/// HTTP failure carrying the status code.
class HttpError : public Error {
 public:
  HttpError(int status, const std::string& message, bool transient)
      : Error(ErrorKind::Http, message, transient), status_(status) {}

  [[nodiscard]] int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace promptctl
