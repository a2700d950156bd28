#include "cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <promptctl/trace_io.hpp>

#include "cli/config.hpp"

namespace promptctl::cli {

namespace {

int exit_code(LoopStatus status) {
  switch (status) {
    case LoopStatus::Converged: return kExitConverged;
    case LoopStatus::BudgetExhausted: return kExitBudget;
    case LoopStatus::Aborted: return kExitError;
  }
  return kExitError;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::filesystem::path suffixed(const std::filesystem::path& p, const std::string& tag) {
  auto out = p;
  out.replace_filename(p.stem().string() + "." + tag + p.extension().string());
  return out;
}

/// Largest excursion past the setpoint, measured against the sign of e(0).
std::vector<double> overshoot(const IterationTrace& trace) {
  const auto n = trace.schema.size();
  std::vector<double> out(n, 0.0);
  if (trace.records.empty()) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const double e0 = trace.records.front().error[i];
    const double s = e0 > 0.0 ? 1.0 : (e0 < 0.0 ? -1.0 : 0.0);
    for (const auto& r : trace.records) out[i] = std::max(out[i], -s * r.error[i]);
  }
  return out;
}

}  // namespace

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_run_config(opts.config, opts.overrides);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  if (opts.seed) cfg.loop.rng_seed = *opts.seed;
  if (opts.emit_trace) cfg.output.trace_csv = opts.emit_trace;

  LoopResult result;
  try {
    auto plant = make_plant(cfg);
    result = run_loop(*plant, cfg.templates, cfg.loop, PromptState(cfg.initial_prompt));
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (cfg.output.trace_csv) write_text_file(*cfg.output.trace_csv, trace_csv(result.trace));
    const auto summary = summary_json(result);
    if (cfg.output.summary_json) {
      write_text_file(*cfg.output.summary_json, summary);
    } else {
      out << summary;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  if (result.error_kind) err << "error: " << to_string(*result.error_kind) << ": " << result.error_message << '\n';
  err << to_string(result.status) << " after " << result.trace.records.size() << " iteration(s)\n";
  return exit_code(result.status);
}

int cmd_replay_paper(const ReplayOptions& opts, std::ostream& out, std::ostream& err) {
  PidSpec pid;
  for (const auto& g : opts.gains) {
    const auto eq = g.find('=');
    const auto name = g.substr(0, eq);
    double value = 0.0;
    try {
      if (eq == std::string::npos) throw std::invalid_argument("missing '='");
      std::size_t used = 0;
      value = std::stod(g.substr(eq + 1), &used);
      if (used != g.size() - eq - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      err << "error: --gains expects NAME=NUMBER, got '" << g << "'\n";
      return kExitError;
    }
    if (name == "kp") {
      pid.kp = value;
    } else if (name == "ki") {
      pid.ki = value;
    } else if (name == "kd") {
      pid.kd = value;
    } else {
      err << "error: unknown gain '" << name << "' (expected kp, ki or kd)\n";
      return kExitError;
    }
  }

  const auto schema = fpga::schema();
  FpgaSimModel model;
  model.mode = FpgaSimModel::Mode::Scripted;
  model.schema = schema;
  model.script = fpga::example_observations();

  LoopConfig loop;
  loop.setpoint = fpga::example_setpoint();
  loop.controller = pid;
  loop.session_mode = SessionMode::Stateless;
  loop.max_iterations = model.script.size();

  LoopResult result;
  try {
    FpgaSimPlant plant(std::move(model));
    result = run_loop(plant, fpga::templates(), loop, PromptState(fpga::example_prompt()));
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kExitError;
  }
  if (result.status == LoopStatus::Aborted) {
    err << "error: " << result.error_message << '\n';
    return kExitError;
  }

  // Slack: u = kp * e with e = 3 then 1.
  const std::vector<std::vector<double>> expected_e = {{-10, -5, -20, -15, 3}, {-5, -2, -10, -8, 1}};
  const std::vector<std::vector<double>> expected_u = {{-6, -3, -12, -9, 1.8}, {-3, -1.2, -6, -4.8, 0.6}};
  constexpr double kTol = 1e-9;

  std::vector<std::string> mismatches;
  if (result.trace.records.size() != expected_e.size()) {
    mismatches.push_back("expected 2 iterations, got " + std::to_string(result.trace.records.size()));
  }
  for (std::size_t t = 0; t < std::min(result.trace.records.size(), expected_e.size()); ++t) {
    const auto& rec = result.trace.records[t];
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto label = "(" + std::to_string(t) + ")[" + schema[i].name + "]";
      if (!(std::abs(rec.error[i] - expected_e[t][i]) <= kTol))
        mismatches.push_back("e" + label + ": expected " + fmt(expected_e[t][i]) + ", got " + fmt(rec.error[i]));
      if (!(std::abs(rec.control[i] - expected_u[t][i]) <= kTol))
        mismatches.push_back("u" + label + ": expected " + fmt(expected_u[t][i]) + ", got " + fmt(rec.control[i]));
    }
  }

  const auto& records = result.trace.records;
  if (records.size() >= 2) out << "p(1): " << records[1].prompt.composed() << '\n';
  out << "p(" << records.size() << "): " << result.trace.final_prompt.composed() << '\n';

  if (opts.emit_trace) {
    try {
      write_text_file(*opts.emit_trace, trace_csv(result.trace));
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitError;
    }
  }

  if (!mismatches.empty()) {
    for (const auto& m : mismatches) err << "mismatch: " << m << '\n';
    return kExitError;
  }
  err << "replay matches the worked example\n";
  return kExitConverged;
}

int cmd_tune(const TuneOptions& opts, std::ostream& out, std::ostream& err) {
  TuneConfig cfg;
  try {
    cfg = load_tune_config(opts.config, opts.overrides);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  try {
    std::unique_ptr<TunablePlant> plant;
    if (const auto* p = std::get_if<SecondOrderDelayPlant::Params>(&cfg.plant)) {
      plant = std::make_unique<SecondOrderDelayPlant>(*p);
    } else {
      plant = std::make_unique<StaticGainPlant>(std::get<double>(cfg.plant), cfg.static_sample_time);
    }
    const auto relay = relay_autotune(*plant, cfg.relay_amplitude, cfg.max_steps);
    const auto gains = ziegler_nichols_gains(relay.ku, relay.tu);

    nlohmann::ordered_json j;
    j["method"] = "zn-relay";
    j["ku"] = relay.ku;
    j["tu"] = relay.tu;
    j["kp"] = gains.kp();
    j["ki"] = gains.ki();
    j["kd"] = gains.kd();
    out << "ku=" << format_number(relay.ku) << " tu=" << format_number(relay.tu) << '\n'
        << "kp=" << format_number(gains.kp()) << " ki=" << format_number(gains.ki())
        << " kd=" << format_number(gains.kd()) << '\n';
    if (opts.dry_run) {
      err << "dry run: no gains file written\n";
    } else {
      const auto path = cfg.gains_output.value_or(opts.config.parent_path() / "gains.json");
      write_text_file(path, j.dump(2) + "\n");
      err << "gains written to " << path.string() << '\n';
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kExitError;
  }
  return kExitConverged;
}

int cmd_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_run_config(opts.config, opts.overrides);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  if (opts.seed) cfg.loop.rng_seed = *opts.seed;

  std::vector<std::pair<std::string, ControllerSpec>> selected;
  if (opts.controllers.empty()) {
    selected = cfg.controllers;
  } else {
    for (const auto& name : opts.controllers) {
      auto it = std::find_if(cfg.controllers.begin(), cfg.controllers.end(),
                             [&](const auto& c) { return c.first == name; });
      if (it == cfg.controllers.end()) {
        err << "error: unknown controller '" << name << "'";
        if (name == "pid" || name == "lead_lag" || name == "lqr" || name == "fuzzy") {
          err << " (not configured under \"controllers\")";
        }
        err << '\n';
        return kExitError;
      }
      selected.push_back(*it);
    }
  }
  if (selected.empty()) {
    err << "error: no controllers to compare; add a \"controllers\" section\n";
    return kExitError;
  }

  // Construct everything up front so configuration errors fail fast.
  std::vector<std::unique_ptr<Controller>> controllers;
  std::vector<std::unique_ptr<Plant>> plants;
  try {
    for (const auto& [name, spec] : selected) {
      controllers.push_back(make_controller(spec, cfg.loop.session_mode, cfg.schema.size()));
      plants.push_back(make_plant(cfg));
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kExitError;
  }

  std::vector<std::future<LoopResult>> jobs;
  for (std::size_t k = 0; k < selected.size(); ++k) {
    jobs.push_back(std::async(std::launch::async, [&, k] {
      return run_loop(*plants[k], *controllers[k], cfg.templates, cfg.loop, PromptState(cfg.initial_prompt));
    }));
  }
  std::vector<LoopResult> results;
  try {
    for (auto& j : jobs) results.push_back(j.get());
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kExitError;
  }

  nlohmann::ordered_json report;
  report["seed"] = cfg.loop.rng_seed;
  report["controllers"] = nlohmann::ordered_json::array();
  bool any_error = false;
  bool all_converged = true;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    nlohmann::ordered_json entry;
    entry["name"] = selected[k].first;
    entry["seed"] = r.seed;
    entry["converged"] = r.status == LoopStatus::Converged;
    entry["status"] = std::string(to_string(r.status));
    entry["iterations"] = r.trace.records.size();
    if (r.status == LoopStatus::Converged) {
      entry["iterations_to_convergence"] = r.trace.records.size();
    } else {
      entry["iterations_to_convergence"] = nullptr;
    }
    entry["final_error"] = r.trace.records.empty() ? std::vector<double>{} : r.trace.records.back().error.values;
    entry["overshoot"] = overshoot(r.trace);
    if (r.error_kind) {
      entry["error"] = {{"kind", std::string(to_string(*r.error_kind))}, {"message", r.error_message}};
      err << "error: " << selected[k].first << ": " << r.error_message << '\n';
    }
    report["controllers"].push_back(entry);
    any_error = any_error || r.status == LoopStatus::Aborted;
    all_converged = all_converged && r.status == LoopStatus::Converged;
  }

  try {
    if (opts.emit_trace) {
      for (std::size_t k = 0; k < results.size(); ++k)
        write_text_file(suffixed(*opts.emit_trace, selected[k].first), trace_csv(results[k].trace));
    }
    if (cfg.output.report_json) write_text_file(*cfg.output.report_json, report.dump(2) + "\n");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-10s %6s %14s %14s\n", "controller", "converged", "iters", "max|e_final|",
                "max overshoot");
  out << line;
  for (const auto& entry : report["controllers"]) {
    double max_e = 0.0;
    for (double v : entry["final_error"]) max_e = std::max(max_e, std::abs(v));
    double max_o = 0.0;
    for (double v : entry["overshoot"]) max_o = std::max(max_o, v);
    std::snprintf(line, sizeof line, "%-12s %-10s %6zu %14.6g %14.6g\n", entry["name"].get<std::string>().c_str(),
                  entry["converged"].get<bool>() ? "yes" : "no", entry["iterations"].get<std::size_t>(), max_e,
                  max_o);
    out << line;
  }
  if (!cfg.output.report_json) out << report.dump(2) << '\n';

  if (any_error) return kExitError;
  return all_converged ? kExitConverged : kExitBudget;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-loop prompt control for generative models"};
  app.name("promptctl");
  app.require_subcommand(1);

  RunOptions run;
  std::string run_trace;
  auto* run_cmd = app.add_subcommand("run", "Run a control loop from a config file");
  run_cmd->add_option("--config", run.config, "Config JSON file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "Override the RNG seed");
  run_cmd->add_option("--set", run.overrides, "Override a config value, KEY.PATH=VALUE")->allow_extra_args(false);
  run_cmd->add_option("--emit-trace", run_trace, "Write the trace CSV here");

  TuneOptions tune;
  std::string method = "zn-relay";
  auto* tune_cmd = app.add_subcommand("tune", "Relay autotune a simulated plant and derive PID gains");
  tune_cmd->add_option("--config", tune.config, "Tuning config JSON file")->required()->check(CLI::ExistingFile);
  tune_cmd->add_option("--set", tune.overrides, "Override a config value, KEY.PATH=VALUE")->allow_extra_args(false);
  tune_cmd->add_option("--method", method, "Tuning method")->check(CLI::IsMember({"zn-relay"}));
  tune_cmd->add_flag("--dry-run", tune.dry_run, "Print gains without writing the gains file");

  CompareOptions cmp;
  std::string cmp_trace;
  auto* cmp_cmd = app.add_subcommand("compare", "Run several controllers on identically seeded plants");
  cmp_cmd->add_option("--config", cmp.config, "Config JSON file")->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--controllers", cmp.controllers, "Controller names, comma separated")->delimiter(',');
  cmp_cmd->add_option("--seed", cmp.seed, "Override the RNG seed");
  cmp_cmd->add_option("--set", cmp.overrides, "Override a config value, KEY.PATH=VALUE")->allow_extra_args(false);
  cmp_cmd->add_option("--emit-trace", cmp_trace, "Write one trace CSV per controller (NAME inserted before the extension)");

  ReplayOptions replay;
  std::string replay_trace;
  auto* replay_cmd = app.add_subcommand("replay-paper", "Replay the HLS worked example and check it");
  replay_cmd->add_option("--gains", replay.gains, "Controller gain override, e.g. kp=0.5")->allow_extra_args(false);
  replay_cmd->add_option("--emit-trace", replay_trace, "Write the trace CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitError;
  }

  if (*run_cmd) {
    if (!run_trace.empty()) run.emit_trace = run_trace;
    return cmd_run(run, out, err);
  }
  if (*tune_cmd) return cmd_tune(tune, out, err);
  if (*cmp_cmd) {
    if (!cmp_trace.empty()) cmp.emit_trace = cmp_trace;
    return cmd_compare(cmp, out, err);
  }
  if (!replay_trace.empty()) replay.emit_trace = replay_trace;
  return cmd_replay_paper(replay, out, err);
}

}  // namespace promptctl::cli
