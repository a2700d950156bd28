#include <benchmark/benchmark.h>

#include <promptctl/controller.hpp>
#include <promptctl/fpga_sim.hpp>
#include <promptctl/loop.hpp>
#include <promptctl/surrogate.hpp>

using namespace promptctl;

static void BM_PidStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  PidController pid(PidGains(0.6, 0.1, 0.05), SessionMode::Stateful, n);
  const ErrorSignal e(std::vector<double>(n, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(pid.step(e, 1.0));
}
BENCHMARK(BM_PidStep)->Arg(1)->Arg(5)->Arg(64);

static void BM_FuzzyStep(benchmark::State& state) {
  const auto rb = FuzzyRulebase::symmetric(1.0, 2.0, 4.0);
  double e = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fuzzy_step(rb, e, -0.2));
    e = -e;
  }
}
BENCHMARK(BM_FuzzyStep);

static void BM_LqrGain(benchmark::State& state) {
  const auto n = state.range(0);
  LqrParams p;
  p.a = Eigen::MatrixXd::Identity(n, n) * 1.05;
  p.a.diagonal(1).setConstant(0.1);
  p.b = Eigen::MatrixXd::Ones(n, 1);
  p.q = Eigen::MatrixXd::Identity(n, n);
  p.r = Eigen::MatrixXd::Identity(1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(lqr_gain(p));
}
BENCHMARK(BM_LqrGain)->Arg(1)->Arg(2)->Arg(8);

static void BM_SurrogateGenerate(benchmark::State& state) {
  const auto d = static_cast<int>(state.range(0));
  const auto p = SurrogateParams::random(1, {"<unk>", "generate", "optimized", "code", "reduce", "further"}, d, d, d);
  const std::vector<std::size_t> tokens = {1, 2, 3, 4, 5, 3, 2, 1};
  for (auto _ : state) benchmark::DoNotOptimize(surrogate_generate(tokens, 0.3, p, DecodeMode::Argmax));
}
BENCHMARK(BM_SurrogateGenerate)->Arg(2)->Arg(4)->Arg(8);

static void BM_RunLoopFpga(benchmark::State& state) {
  FpgaSimModel m;
  m.mode = FpgaSimModel::Mode::Parametric;
  m.schema = fpga::schema();
  m.baseline = fpga::example_observations()[0].values();
  m.responsiveness = fpga::example_responsiveness();
  m.floor = std::vector<double>(5, 0.0);
  m.slack_coefficient = fpga::example_slack_coefficient();
  LoopConfig cfg;
  cfg.setpoint = fpga::example_setpoint();
  cfg.controller = PidSpec{0.6, 0.1, 0.0, std::nullopt};
  cfg.max_iterations = 50;
  cfg.noise.nu_sigma = {0.2, 0.2, 0.2, 0.2, 0.02};
  const auto templates = fpga::templates();
  for (auto _ : state) {
    FpgaSimPlant plant(m);
    benchmark::DoNotOptimize(run_loop(plant, templates, cfg, PromptState(fpga::example_prompt())));
  }
}
BENCHMARK(BM_RunLoopFpga);
BENCHMARK_MAIN();
