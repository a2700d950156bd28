#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include <promptctl/tuning.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"

namespace fs = std::filesystem;
using namespace promptctl;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("promptctl_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "promptctl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = promptctl::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

const char* kLinear = R"({
  "metrics": [{"name": "y", "unit": "unit", "direction": "lower_is_better", "setpoint": 0}],
  "plant": {"type": "linear", "initial": 1},
  "controller": {"type": "pid", "kp": 0.6},
  "controllers": {
    "pid": {"kp": 0.6},
    "lead_lag": {"gain": 0.6, "t1": 1, "t2": 1},
    "lqr": {"q": 1, "r": 1}
  },
  "seed": 3,
  "max_iterations": 60,
  "convergence": {"mode": "abs_error_below", "tolerance": 1e-6}
})";

const char* kExample = R"({
  "metrics": "fpga",
  "plant": {"type": "fpga_scripted", "sequence": [[70, 65, 80, 75, -2], [65, 62, 70, 68, 0]]},
  "controllers": {"pid": {"kp": 0.6}},
  "session_mode": "stateless",
  "max_iterations": 2
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("replay-paper reproduces the worked example") {
  const auto r = invoke({"replay-paper"});
  CHECK(r.code == 0);
  CHECK(r.out.find("p(1): ") != std::string::npos);
  CHECK(r.out.find("Reduce resource usage by 6% LUTs, 3% FFs, 12% DSPs, 9% BRAMs") != std::string::npos);
  CHECK(r.out.find("Further reduce resource usage by 3% LUTs, 1.2% FFs, 6% DSPs, 4.8% BRAMs") != std::string::npos);
}

TEST_CASE("replay-paper with a different gain fails and names the component") {
  const auto r = invoke({"replay-paper", "--gains", "kp=0.5"});
  CHECK(r.code == 1);
  CHECK(r.err.find("u(0)[LUTs]: expected -6, got -5") != std::string::npos);
}

TEST_CASE("replay-paper trace has two steps of five dimensions") {
  TempDir dir;
  const auto path = dir.path / "trace.csv";
  const auto r = invoke({"replay-paper", "--emit-trace", path.string()});
  CHECK(r.code == 0);
  const auto csv = slurp(path);
  CHECK(lines(csv) == 1 + 10);
  CHECK(csv.rfind("step,dimension,y,e,u,converged\n", 0) == 0);
}

TEST_CASE("run: converged, trace rows, summary") {
  TempDir dir;
  const auto cfg = dir.write("c.json", kLinear);
  const auto trace = dir.path / "t.csv";
  const auto r = invoke({"run", "--config", cfg.string(), "--emit-trace", trace.string()});
  CHECK(r.code == 0);
  const auto summary = nlohmann::json::parse(r.out);
  CHECK(summary["converged"] == true);
  CHECK(summary["seed"] == 3);
  const auto steps = summary["iterations"].get<std::size_t>();
  CHECK(lines(slurp(trace)) == 1 + steps * 1);
}

TEST_CASE("run: --seed and --set overrides") {
  TempDir dir;
  const auto cfg = dir.write("c.json", kLinear);
  const auto r = invoke({"run", "--config", cfg.string(), "--seed", "17", "--set", "max_iterations=1"});
  CHECK(r.code == 2);
  const auto summary = nlohmann::json::parse(r.out);
  CHECK(summary["seed"] == 17);
  CHECK(summary["status"] == "budget_exhausted");
}

TEST_CASE("run: outputs configured in the file") {
  TempDir dir;
  std::string text = kLinear;
  text.insert(text.rfind('}'), R"(, "output": {"trace_csv": ")" + (dir.path / "a.csv").string() +
                                   R"(", "summary_json": ")" + (dir.path / "a.json").string() + R"("})");
  const auto cfg = dir.write("c.json", text);
  const auto r = invoke({"run", "--config", cfg.string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(fs::exists(dir.path / "a.csv"));
  CHECK(nlohmann::json::parse(slurp(dir.path / "a.json"))["converged"] == true);
}

TEST_CASE("run: same seed, byte-identical CSV") {
  TempDir dir;
  std::string text = kLinear;
  text.insert(text.rfind('}'), R"(, "noise": {"eta_sigma": 0.01, "nu_sigma": 0.01})");
  const auto cfg = dir.write("c.json", text);
  (void)invoke({"run", "--config", cfg.string(), "--emit-trace", (dir.path / "1.csv").string()});
  (void)invoke({"run", "--config", cfg.string(), "--emit-trace", (dir.path / "2.csv").string()});
  CHECK(slurp(dir.path / "1.csv") == slurp(dir.path / "2.csv"));
  CHECK(!slurp(dir.path / "1.csv").empty());
}

TEST_CASE("config diagnostics name the key and line") {
  TempDir dir;
  const auto cfg = dir.write("bad.json", R"({
  "metrics": "fpga",
  "plant": {"type": "fpga_scripted", "sequence": [[1, 2, 3, 4, 5]]},
  "controller": {"type": "pid", "kp": 0.6, "kq": 1}
})");
  auto r = invoke({"run", "--config", cfg.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("bad.json:4") != std::string::npos);
  CHECK(r.err.find("unknown key 'controller.kq'") != std::string::npos);

  const auto top = dir.write("top.json", "{\n  \"metrics\": \"fpga\",\n  \"plant\": {\"type\": \"linear\", \"initial\": 1},\n  \"colour\": 3\n}");
  r = invoke({"run", "--config", top.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("top.json:4: unknown key 'colour'") != std::string::npos);

  const auto syntax = dir.write("syntax.json", "{\n  \"metrics\": \"fpga\",\n  \"plant\": {\"type\": }\n}");
  r = invoke({"run", "--config", syntax.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("syntax.json:3:") != std::string::npos);

  const auto type = dir.write("type.json", "{\n  \"metrics\": \"fpga\",\n  \"plant\": {\"type\": \"linear\", \"initial\": \"x\"}\n}");
  r = invoke({"run", "--config", type.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("type.json:3") != std::string::npos);
}

TEST_CASE("--set errors point at the override") {
  TempDir dir;
  const auto cfg = dir.write("c.json", kLinear);
  const auto r = invoke({"run", "--config", cfg.string(), "--set", "plant.bogus=1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("--set plant.bogus") != std::string::npos);
}

TEST_CASE("tune: second-order plant gains near the analytic ZN values") {
  TempDir dir;
  const auto cfg = dir.write("t.json", R"({"plant": {"type": "second_order_delay"}, "relay_amplitude": 1})");
  const auto r = invoke({"tune", "--config", cfg.string()});
  CHECK(r.code == 0);
  const auto gains = nlohmann::json::parse(slurp(dir.path / "gains.json"));
  SecondOrderDelayPlant plant({});
  const auto analytic = ziegler_nichols_gains(plant.analytic_ultimate_gain(), plant.analytic_ultimate_period());
  CHECK(std::abs(gains["kp"].get<double>() - analytic.kp()) / analytic.kp() < 0.10);
  CHECK(std::abs(gains["ki"].get<double>() - analytic.ki()) / analytic.ki() < 0.10);
  CHECK(std::abs(gains["kd"].get<double>() - analytic.kd()) / analytic.kd() < 0.10);
  CHECK(r.out.find("kp=") != std::string::npos);
}

TEST_CASE("tune: dry run writes nothing") {
  TempDir dir;
  const auto cfg = dir.write("t.json", R"({"plant": {"type": "second_order_delay"}, "gains_output": "g.json"})");
  const auto r = invoke({"tune", "--config", cfg.string(), "--dry-run"});
  CHECK(r.code == 0);
  CHECK(r.out.find("kd=") != std::string::npos);
  CHECK(!fs::exists(dir.path / "g.json"));
  CHECK(!fs::exists(dir.path / "gains.json"));
}

TEST_CASE("tune: static plant fails") {
  TempDir dir;
  const auto cfg = dir.write("t.json", R"({"plant": {"type": "static", "gain": 3}})");
  const auto r = invoke({"tune", "--config", cfg.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("no oscillation") != std::string::npos);
}

TEST_CASE("compare: PID vs Lead-Lag on the scalar plant") {
  TempDir dir;
  const auto cfg = dir.write("c.json", kLinear);
  const auto r = invoke({"compare", "--config", cfg.string(), "--controllers", "pid,lead_lag"});
  CHECK(r.code == 0);
  const auto report = nlohmann::json::parse(r.out.substr(r.out.find('{')));
  REQUIRE(report["controllers"].size() == 2);
  CHECK(report["controllers"][0]["name"] == "pid");
  CHECK(report["controllers"][1]["name"] == "lead_lag");
  CHECK(report["controllers"][0]["converged"] == true);
  CHECK(report["controllers"][1]["converged"] == true);
  CHECK(report["controllers"][0]["seed"] == report["controllers"][1]["seed"]);
  CHECK(report["controllers"][0].contains("overshoot"));
  CHECK(r.out.find("controller") == 0);
}

TEST_CASE("compare: LQR without a model") {
  TempDir dir;
  const auto cfg = dir.write("c.json", kLinear);
  const auto r = invoke({"compare", "--config", cfg.string(), "--controllers", "pid,lqr"});
  CHECK(r.code == 1);
  CHECK(r.err.find("matrix A is missing") != std::string::npos);
}

TEST_CASE("compare: LQR with a model") {
  TempDir dir;
  const auto cfg = dir.write("c.json", kLinear);
  const auto r = invoke({"compare", "--config", cfg.string(), "--controllers", "lqr", "--set", "controllers.lqr.a=1",
                      "--set", "controllers.lqr.b=1"});
  CHECK(r.code == 0);
}

TEST_CASE("compare: P-only on the scripted worked example") {
  TempDir dir;
  const auto cfg = dir.write("c.json", kExample);
  const auto r = invoke({"compare", "--config", cfg.string(), "--controllers", "pid"});
  CHECK(r.code == 2);
  const auto report = nlohmann::json::parse(r.out.substr(r.out.find('{')));
  CHECK(report["controllers"][0]["iterations"] == 2);
  CHECK(report["controllers"][0]["converged"] == false);
}

TEST_CASE("compare: unknown controller") {
  TempDir dir;
  const auto cfg = dir.write("c.json", kLinear);
  const auto r = invoke({"compare", "--config", cfg.string(), "--controllers", "pid,mpc"});
  CHECK(r.code == 1);
  CHECK(r.err.find("unknown controller 'mpc'") != std::string::npos);
}

TEST_CASE("help lists every flag and unknown flags are errors") {
  const auto run = invoke({"run", "--help"});
  CHECK(run.code == 0);
  for (const char* flag : {"--config", "--seed", "--set", "--emit-trace"}) CHECK(run.out.find(flag) != std::string::npos);
  const auto tune = invoke({"tune", "--help"});
  for (const char* flag : {"--config", "--set", "--dry-run", "--method"}) CHECK(tune.out.find(flag) != std::string::npos);
  const auto cmp = invoke({"compare", "--help"});
  for (const char* flag : {"--config", "--controllers", "--seed", "--set", "--emit-trace"})
    CHECK(cmp.out.find(flag) != std::string::npos);
  const auto rp = invoke({"replay-paper", "--help"});
  for (const char* flag : {"--gains", "--emit-trace"}) CHECK(rp.out.find(flag) != std::string::npos);

  CHECK(invoke({"replay-paper", "--frobnicate"}).code == 1);
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"launch"}).code == 1);
}

TEST_CASE("shipped sample configs parse") {
  const fs::path root = PROMPTCTL_SOURCE_DIR;
  for (const auto& entry : fs::directory_iterator(root / "configs")) {
    const auto name = entry.path().filename().string();
    CAPTURE(name);
    if (name.rfind("tune", 0) == 0) {
      CHECK_NOTHROW((void)cli::load_tune_config(entry.path(), {}));
    } else {
      CHECK_NOTHROW((void)cli::load_run_config(entry.path(), {}));
    }
  }
}

}
