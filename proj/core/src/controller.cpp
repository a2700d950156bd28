#include "promptctl/controller.hpp"

#include <string>

#include "promptctl/error.hpp"

namespace promptctl {

PidController::PidController(PidGains gains, SessionMode mode, std::size_t dims,
                             std::optional<double> anti_windup_limit)
    : gains_(gains), mode_(mode), initial_(PidState::zero(dims, anti_windup_limit)), state_(initial_) {}

ControlSignal PidController::step(const ErrorSignal& error, double dt) {
  auto r = pid_step(state_, error, dt, gains_, mode_);
  state_ = std::move(r.state);
  return std::move(r.control);
}

void PidController::reset() { state_ = initial_; }

std::unique_ptr<Controller> PidController::clone() const { return std::make_unique<PidController>(*this); }

LeadLagController::LeadLagController(double gain, double t1, double t2, SessionMode mode, std::size_t dims)
    : mode_(mode), initial_(LeadLagParams::make(gain, t1, t2, dims)), state_(initial_) {}

ControlSignal LeadLagController::step(const ErrorSignal& error, double dt) {
  if (mode_ == SessionMode::Stateless) state_ = initial_;
  auto r = lead_lag_step(state_, error, dt);
  state_ = std::move(r.state);
  return std::move(r.control);
}

void LeadLagController::reset() { state_ = initial_; }

std::unique_ptr<Controller> LeadLagController::clone() const {
  return std::make_unique<LeadLagController>(*this);
}

LqrController::LqrController(LqrParams params, std::size_t dims, double tol, int max_iter)
    : params_(std::move(params)) {
  params_.validate();
  if (static_cast<std::size_t>(params_.a.rows()) != dims || static_cast<std::size_t>(params_.b.cols()) != dims)
    throw Error(ErrorKind::Schema, "LQR controller: A must be " + std::to_string(dims) + "x" +
                                       std::to_string(dims) + " and B must have " + std::to_string(dims) +
                                       " inputs to match the metric schema");
  params_.k = lqr_gain(params_, tol, max_iter);
}

ControlSignal LqrController::step(const ErrorSignal& error, double /*dt*/) {
  require_finite(error.values, "lqr error");
  require_length(error.size(), static_cast<std::size_t>(params_.a.rows()), "lqr error");
  Eigen::VectorXd x(static_cast<Eigen::Index>(error.size()));
  for (std::size_t i = 0; i < error.size(); ++i) x[static_cast<Eigen::Index>(i)] = -error[i];
  const Eigen::VectorXd u = lqr_step(params_, x);
  return ControlSignal(std::vector<double>(u.data(), u.data() + u.size()));
}

std::unique_ptr<Controller> LqrController::clone() const { return std::make_unique<LqrController>(*this); }

FuzzyController::FuzzyController(FuzzyRulebase rulebase, SessionMode mode, std::size_t dims)
    : rulebase_(std::move(rulebase)), mode_(mode), dims_(dims) {
  if (!rulebase_.configured) throw Error(ErrorKind::Configuration, "fuzzy controller: empty rulebase");
}

ControlSignal FuzzyController::step(const ErrorSignal& error, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidInput, "fuzzy controller: dt must be positive");
  require_finite(error.values, "fuzzy error");
  require_length(error.size(), dims_, "fuzzy error");
  ControlSignal u = ControlSignal::zeros(dims_);
  for (std::size_t i = 0; i < dims_; ++i) {
    double de = 0.0;
    if (mode_ == SessionMode::Stateful && prev_error_) de = (error[i] - (*prev_error_)[i]) / dt;
    u[i] = fuzzy_step(rulebase_, error[i], de);
  }
  prev_error_ = error.values;
  return u;
}

std::unique_ptr<Controller> FuzzyController::clone() const { return std::make_unique<FuzzyController>(*this); }

std::string_view controller_kind(const ControllerSpec& spec) noexcept {
  struct Visitor {
    std::string_view operator()(const PidSpec&) const { return "pid"; }
    std::string_view operator()(const LeadLagSpec&) const { return "lead_lag"; }
    std::string_view operator()(const LqrSpec&) const { return "lqr"; }
    std::string_view operator()(const FuzzySpec&) const { return "fuzzy"; }
  };
  return std::visit(Visitor{}, spec);
}

std::unique_ptr<Controller> make_controller(const ControllerSpec& spec, SessionMode mode, std::size_t dims) {
  struct Visitor {
    SessionMode mode;
    std::size_t dims;

    std::unique_ptr<Controller> operator()(const PidSpec& s) const {
      return std::make_unique<PidController>(PidGains(s.kp, s.ki, s.kd), mode, dims, s.anti_windup_limit);
    }
    std::unique_ptr<Controller> operator()(const LeadLagSpec& s) const {
      return std::make_unique<LeadLagController>(s.gain, s.t1, s.t2, mode, dims);
    }
    std::unique_ptr<Controller> operator()(const LqrSpec& s) const {
      if (!s.a) throw Error(ErrorKind::Configuration, "LQR requires a system model: matrix A is missing");
      if (!s.b) throw Error(ErrorKind::Configuration, "LQR requires a system model: matrix B is missing");
      LqrParams p;
      p.a = *s.a;
      p.b = *s.b;
      const auto n = static_cast<Eigen::Index>(dims);
      p.q = s.q.size() == 0 ? Eigen::MatrixXd::Identity(n, n) : s.q;
      p.r = s.r.size() == 0 ? Eigen::MatrixXd::Identity(p.b.cols(), p.b.cols()) : s.r;
      return std::make_unique<LqrController>(std::move(p), dims, s.tol, s.max_iter);
    }
    std::unique_ptr<Controller> operator()(const FuzzySpec& s) const {
      auto rb = FuzzyRulebase::symmetric(s.error_range, s.derror_range, s.output_gain);
      if (s.rules) rb.rules = *s.rules;
      return std::make_unique<FuzzyController>(std::move(rb), mode, dims);
    }
  };
  return std::visit(Visitor{mode, dims}, spec);
}

}  // namespace promptctl
