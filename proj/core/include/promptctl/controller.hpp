#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "promptctl/fuzzy.hpp"
#include "promptctl/lead_lag.hpp"
#include "promptctl/lqr.hpp"
#include "promptctl/pid.hpp"

namespace promptctl {

/// A discrete controller owned by exactly one loop.
class Controller {
 public:
  virtual ~Controller() = default;

  virtual ControlSignal step(const ErrorSignal& error, double dt) = 0;
  /// Back to the just-constructed state.
  virtual void reset() = 0;
  [[nodiscard]] virtual std::string_view name() const noexcept = 0;
  [[nodiscard]] virtual std::unique_ptr<Controller> clone() const = 0;
};

class PidController final : public Controller {
 public:
  PidController(PidGains gains, SessionMode mode, std::size_t dims,
                std::optional<double> anti_windup_limit = std::nullopt);

  ControlSignal step(const ErrorSignal& error, double dt) override;
  void reset() override;
  [[nodiscard]] std::string_view name() const noexcept override { return "pid"; }
  [[nodiscard]] std::unique_ptr<Controller> clone() const override;

  [[nodiscard]] const PidState& state() const noexcept { return state_; }
  [[nodiscard]] const PidGains& gains() const noexcept { return gains_; }
  [[nodiscard]] SessionMode mode() const noexcept { return mode_; }

 private:
  PidGains gains_;
  SessionMode mode_;
  PidState initial_;
  PidState state_;
};

/// Stateless sessions wipe the compensator memory before every step, leaving
/// the instantaneous gain b0/a0.
class LeadLagController final : public Controller {
 public:
  LeadLagController(double gain, double t1, double t2, SessionMode mode, std::size_t dims);

  ControlSignal step(const ErrorSignal& error, double dt) override;
  void reset() override;
  [[nodiscard]] std::string_view name() const noexcept override { return "lead_lag"; }
  [[nodiscard]] std::unique_ptr<Controller> clone() const override;

  [[nodiscard]] const LeadLagParams& state() const noexcept { return state_; }

 private:
  SessionMode mode_;
  LeadLagParams initial_;
  LeadLagParams state_;
};

/// State-feedback on the deviation x = beta*y - r = -e, so u = -K x = K e.
/// The gain is solved once at construction.
class LqrController final : public Controller {
 public:
  LqrController(LqrParams params, std::size_t dims, double tol = 1e-12, int max_iter = 10000);

  ControlSignal step(const ErrorSignal& error, double dt) override;
  void reset() override {}
  [[nodiscard]] std::string_view name() const noexcept override { return "lqr"; }
  [[nodiscard]] std::unique_ptr<Controller> clone() const override;

  [[nodiscard]] const LqrParams& params() const noexcept { return params_; }

 private:
  LqrParams params_;
};

/// One Mamdani map per dimension over (e, de/dt). The derivative is 0 on the
/// first step and always 0 in stateless sessions.
class FuzzyController final : public Controller {
 public:
  FuzzyController(FuzzyRulebase rulebase, SessionMode mode, std::size_t dims);

  ControlSignal step(const ErrorSignal& error, double dt) override;
  void reset() override { prev_error_.reset(); }
  [[nodiscard]] std::string_view name() const noexcept override { return "fuzzy"; }
  [[nodiscard]] std::unique_ptr<Controller> clone() const override;

 private:
  FuzzyRulebase rulebase_;
  SessionMode mode_;
  std::size_t dims_;
  std::optional<std::vector<double>> prev_error_;
};

struct PidSpec {
  double kp = 0.6;
  double ki = 0.0;
  double kd = 0.0;
  std::optional<double> anti_windup_limit;
};

struct LeadLagSpec {
  double gain = 1.0;
  double t1 = 1.0;
  double t2 = 1.0;
};

struct LqrSpec {
  std::optional<Eigen::MatrixXd> a;
  std::optional<Eigen::MatrixXd> b;
  Eigen::MatrixXd q;
  Eigen::MatrixXd r;
  double tol = 1e-12;
  int max_iter = 10000;
};

struct FuzzySpec {
  double error_range = 1.0;
  double derror_range = 1.0;
  double output_gain = 1.0;
  std::optional<FuzzyRuleTable> rules;
};

using ControllerSpec = std::variant<PidSpec, LeadLagSpec, LqrSpec, FuzzySpec>;

[[nodiscard]] std::string_view controller_kind(const ControllerSpec& spec) noexcept;

/// Builds a controller for `dims` dimensions. An LQR spec without A or B
/// throws Error(Configuration) naming the missing model matrix; Q and R
/// default to identity when empty.
[[nodiscard]] std::unique_ptr<Controller> make_controller(const ControllerSpec& spec, SessionMode mode,
                                                          std::size_t dims);

}  // namespace promptctl
