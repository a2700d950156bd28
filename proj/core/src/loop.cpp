#include "promptctl/loop.hpp"

#include <cmath>
#include <thread>

namespace promptctl {

void LoopConfig::validate() const {
  if (setpoint.size() == 0) throw Error(ErrorKind::Configuration, "loop: setpoint has no dimensions");
  if (!std::isfinite(feedback_gain)) throw Error(ErrorKind::Configuration, "loop: feedback gain must be finite");
  if (max_iterations < 1) throw Error(ErrorKind::Configuration, "loop: max_iterations must be at least 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::Configuration, "loop: dt must be positive");
  if (retry.max_retries < 0 || retry.backoff.count() < 0)
    throw Error(ErrorKind::Configuration, "loop: retry policy must be non-negative");
  noise.validate();
  if (!noise.eta_sigma.empty()) require_length(noise.eta_sigma.size(), setpoint.size(), "eta sigma");
  if (!noise.nu_sigma.empty()) require_length(noise.nu_sigma.size(), setpoint.size(), "nu sigma");
  if (const auto* abs = std::get_if<AbsErrorBelow>(&convergence)) {
    require_length(abs->tolerance.size(), setpoint.size(), "convergence tolerance");
    for (double t : abs->tolerance) {
      if (!(t > 0.0)) throw Error(ErrorKind::Configuration, "loop: convergence tolerances must be positive");
    }
  }
}

ErrorSignal compute_error(const MetricVector& setpoint, const MetricVector& observation, double beta) {
  if (!(setpoint.schema() == observation.schema()))
    throw Error(ErrorKind::Schema, "setpoint and observation use different metric schemas");
  ErrorSignal e = ErrorSignal::zeros(setpoint.size());
  for (std::size_t i = 0; i < setpoint.size(); ++i) e[i] = setpoint[i] - beta * observation[i];
  return e;
}

bool check_convergence(const ErrorSignal& e, const ConvergenceCriteria& criteria, const MetricSchema& schema) {
  require_length(e.size(), schema.size(), "convergence check");
  if (const auto* abs = std::get_if<AbsErrorBelow>(&criteria)) {
    require_length(abs->tolerance.size(), e.size(), "convergence tolerance");
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!(std::abs(e[i]) < abs->tolerance[i])) return false;
    }
    return true;
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    const bool ok = schema[i].direction == Direction::LowerIsBetter ? e[i] >= 0.0 : e[i] <= 0.0;
    if (!ok) return false;
  }
  return true;
}

std::string_view to_string(LoopStatus status) noexcept {
  switch (status) {
    case LoopStatus::Converged: return "converged";
    case LoopStatus::BudgetExhausted: return "budget_exhausted";
    case LoopStatus::Aborted: return "aborted";
  }
  return "unknown";
}

namespace {

PlantOutput generate_with_retry(Plant& plant, const std::string& prompt, const ControlSignal& u, Rng& rng,
                                const RetryPolicy& retry) {
  auto delay = retry.backoff;
  for (int tries = 0;; ++tries) {
    try {
      return plant.generate(prompt, u, rng);
    } catch (const Error& e) {
      if (!e.transient() || tries >= retry.max_retries) throw;
    }
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

}  // namespace

LoopResult run_loop(Plant& plant, const TemplateSet& adapter, const LoopConfig& config,
                    const PromptState& initial_prompt) {
  config.validate();
  auto controller = make_controller(config.controller, config.session_mode, config.setpoint.size());
  return run_loop(plant, *controller, adapter, config, initial_prompt);
}

LoopResult run_loop(Plant& plant, Controller& controller, const TemplateSet& adapter, const LoopConfig& config,
                    const PromptState& initial_prompt) {
  config.validate();
  const MetricSchema& schema = config.setpoint.schema();
  if (!(plant.schema() == schema)) throw Error(ErrorKind::Schema, "plant and setpoint use different metric schemas");
  for (const auto& d : schema.dimensions()) (void)adapter.for_dimension(d.name);

  LoopResult result;
  result.seed = config.rng_seed;
  result.controller = std::string(controller.name());
  result.trace.schema = schema;
  result.trace.final_prompt = initial_prompt;

  controller.reset();
  Rng rng(config.rng_seed);
  PromptState prompt = initial_prompt;
  ControlSignal applied = ControlSignal::zeros(schema.size());

  auto abort = [&](ErrorKind kind, std::string message) {
    result.status = LoopStatus::Aborted;
    result.error_kind = kind;
    result.error_message = std::move(message);
    result.trace.final_prompt = prompt;
    return result;
  };

  for (std::size_t t = 0; t < config.max_iterations; ++t) {
    IterationRecord rec;
    rec.step = t;
    rec.prompt = prompt;
    try {
      PlantOutput out = generate_with_retry(plant, prompt.composed(), applied, rng, config.retry);
      if (!(out.observation.schema() == schema))
        return abort(ErrorKind::Schema, "plant returned an observation with a different schema");
      MetricVector y = std::move(out.observation);
      if (plant.simulated()) y = apply_noise(y, config.noise, NoiseStage::Eta, rng);
      y = apply_noise(y, config.noise, NoiseStage::Nu, rng);
      rec.artifact = std::move(out.artifact);
      rec.observation = std::move(y);
    } catch (const Error& e) {
      const auto kind = e.kind() == ErrorKind::InvalidInput ? ErrorKind::Data : e.kind();
      return abort(kind, "plant failed at step " + std::to_string(t) + ": " + e.what());
    } catch (const std::exception& e) {
      return abort(ErrorKind::Plant, "plant failed at step " + std::to_string(t) + ": " + e.what());
    }

    rec.feedback.resize(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) rec.feedback[i] = config.feedback_gain * rec.observation[i];
    rec.error = compute_error(config.setpoint, rec.observation, config.feedback_gain);
    try {
      rec.control = controller.step(rec.error, config.dt);
    } catch (const Error& e) {
      result.trace.records.push_back(std::move(rec));
      return abort(e.kind(), std::string("controller failed: ") + e.what());
    }
    rec.converged = check_convergence(rec.error, config.convergence, schema);
    const bool done = rec.converged;
    if (!done) {
      try {
        prompt = update_prompt(prompt, rec.control, schema, adapter);
      } catch (const Error& e) {
        result.trace.records.push_back(std::move(rec));
        return abort(e.kind(), std::string("prompt update failed: ") + e.what());
      }
      applied = rec.control;
    }
    result.trace.records.push_back(std::move(rec));
    if (done) {
      result.status = LoopStatus::Converged;
      result.trace.final_prompt = prompt;
      return result;
    }
  }
  result.status = LoopStatus::BudgetExhausted;
  result.trace.final_prompt = prompt;
  return result;
}

}  // namespace promptctl
