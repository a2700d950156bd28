#include <doctest.h>

#include <cmath>
#include <sstream>

#include <promptctl/error.hpp>
#include <promptctl/fpga_sim.hpp>
#include <promptctl/loop.hpp>
#include <promptctl/trace_io.hpp>

using namespace promptctl;

namespace {

const MetricSchema& scalar_schema() {
  static const MetricSchema s(std::vector<MetricDimension>{{"y", "unit"}});
  return s;
}

LoopConfig scalar_config(std::size_t iterations) {
  LoopConfig c;
  c.setpoint = MetricVector(scalar_schema(), {0.0});
  c.controller = PidSpec{0.6, 0.0, 0.0, std::nullopt};
  c.max_iterations = iterations;
  c.convergence = AbsErrorBelow{{1e-6}};
  return c;
}

/// Fails the first `failures` calls with a transient error, then delegates.
class FlakyPlant final : public Plant {
 public:
  FlakyPlant(Plant& inner, int failures, bool transient) : inner_(inner), left_(failures), transient_(transient) {}
  const MetricSchema& schema() const override { return inner_.schema(); }
  PlantOutput generate(std::string_view p, const ControlSignal& u, Rng& rng) override {
    ++calls;
    if (left_ > 0) {
      --left_;
      throw Error(ErrorKind::Timeout, "flaky", transient_);
    }
    return inner_.generate(p, u, rng);
  }
  int calls = 0;

 private:
  Plant& inner_;
  int left_;
  bool transient_;
};

class NanPlant final : public Plant {
 public:
  const MetricSchema& schema() const override { return scalar_schema(); }
  PlantOutput generate(std::string_view, const ControlSignal&, Rng&) override {
    return {"", MetricVector(scalar_schema(), {std::nan("")})};
  }
};

}  // namespace

TEST_SUITE("loop") {

TEST_CASE("scalar integrator converges geometrically") {
  LinearPlant plant(scalar_schema(), {1.0});
  const auto r = run_loop(plant, TemplateSet::defaults_for(scalar_schema()), scalar_config(100), PromptState());
  CHECK(r.status == LoopStatus::Converged);
  for (const auto& rec : r.trace.records) {
    CHECK(std::abs(std::abs(rec.error[0]) - std::pow(0.4, static_cast<double>(rec.step))) <= 1e-9);
  }
  REQUIRE(r.trace.records.size() <= 36);
  CHECK(std::abs(r.trace.records.back().error[0]) < 1e-6);
}

TEST_CASE("budget exhaustion") {
  LinearPlant plant(scalar_schema(), {1.0});
  const auto r = run_loop(plant, TemplateSet::defaults_for(scalar_schema()), scalar_config(3), PromptState());
  CHECK(r.status == LoopStatus::BudgetExhausted);
  CHECK(r.trace.records.size() == 3);
}

TEST_CASE("worked example with a stateless P controller") {
  FpgaSimModel m;
  m.schema = fpga::schema();
  m.script = fpga::example_observations();
  FpgaSimPlant plant(m);
  LoopConfig c;
  c.setpoint = fpga::example_setpoint();
  c.controller = PidSpec{};
  c.session_mode = SessionMode::Stateless;
  c.max_iterations = 2;
  const auto r = run_loop(plant, fpga::templates(), c, PromptState(fpga::example_prompt()));
  CHECK(r.status == LoopStatus::BudgetExhausted);
  REQUIRE(r.trace.records.size() == 2);
  const std::vector<double> e0 = {-10, -5, -20, -15, 3};
  const std::vector<double> u0 = {-6, -3, -12, -9, 1.8};
  const std::vector<double> e1 = {-5, -2, -10, -8, 1};
  const std::vector<double> u1 = {-3, -1.2, -6, -4.8, 0.6};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(std::abs(r.trace.records[0].error[i] - e0[i]) <= 1e-9);
    CHECK(std::abs(r.trace.records[0].control[i] - u0[i]) <= 1e-9);
    CHECK(std::abs(r.trace.records[1].error[i] - e1[i]) <= 1e-9);
    CHECK(std::abs(r.trace.records[1].control[i] - u1[i]) <= 1e-9);
  }
  CHECK(r.trace.records[0].prompt.composed() == fpga::example_prompt());
  CHECK(r.trace.records[1].prompt.directives().at(0).rfind("Reduce resource usage by 6% LUTs, 3% FFs", 0) == 0);
  CHECK(r.trace.final_prompt.directives().at(1).rfind("Further reduce resource usage by 3% LUTs", 0) == 0);
}

TEST_CASE("higher-is-better convergence uses the direction") {
  const MetricSchema s(std::vector<MetricDimension>{{"quality", "score", Direction::HigherIsBetter}});
  CHECK(check_convergence(ErrorSignal({-0.1}), SetpointSatisfied{}, s));
  CHECK(!check_convergence(ErrorSignal({0.1}), SetpointSatisfied{}, s));
  const MetricSchema l(std::vector<MetricDimension>{{"cost", "usd"}});
  CHECK(check_convergence(ErrorSignal({0.1}), SetpointSatisfied{}, l));
  CHECK(!check_convergence(ErrorSignal({-0.1}), SetpointSatisfied{}, l));
}

TEST_CASE("feedback gain scales the measurement") {
  const auto e = compute_error(MetricVector(scalar_schema(), {3.0}), MetricVector(scalar_schema(), {2.0}), 0.5);
  CHECK(e[0] == 2.0);
}

TEST_CASE("transient plant errors are retried") {
  LinearPlant inner(scalar_schema(), {1.0});
  FlakyPlant plant(inner, 2, true);
  auto c = scalar_config(5);
  c.retry = {3, std::chrono::milliseconds(0)};
  const auto r = run_loop(plant, TemplateSet::defaults_for(scalar_schema()), c, PromptState());
  CHECK(r.status == LoopStatus::BudgetExhausted);
  CHECK(plant.calls == 7);
}

TEST_CASE("persistent or permanent errors abort the loop") {
  LinearPlant inner(scalar_schema(), {1.0});
  FlakyPlant permanent(inner, 1, false);
  auto c = scalar_config(5);
  c.retry = {3, std::chrono::milliseconds(0)};
  auto r = run_loop(permanent, TemplateSet::defaults_for(scalar_schema()), c, PromptState());
  CHECK(r.status == LoopStatus::Aborted);
  CHECK(r.error_kind == ErrorKind::Timeout);

  FlakyPlant flaky(inner, 10, true);
  r = run_loop(flaky, TemplateSet::defaults_for(scalar_schema()), c, PromptState());
  CHECK(r.status == LoopStatus::Aborted);
  CHECK(flaky.calls == 4);
}

TEST_CASE("non-finite observations abort with a data error") {
  NanPlant plant;
  const auto r = run_loop(plant, TemplateSet::defaults_for(scalar_schema()), scalar_config(5), PromptState());
  CHECK(r.status == LoopStatus::Aborted);
  CHECK(r.error_kind == ErrorKind::Data);
}

TEST_CASE("same seed gives a byte-identical trace") {
  auto c = scalar_config(40);
  c.noise.eta_sigma = {0.01};
  c.noise.nu_sigma = {0.02};
  c.rng_seed = 99;
  c.controller = PidSpec{0.5, 0.1, 0.05, std::nullopt};
  auto run = [&] {
    LinearPlant plant(scalar_schema(), {1.0});
    return trace_csv(run_loop(plant, TemplateSet::defaults_for(scalar_schema()), c, PromptState()).trace);
  };
  const auto a = run();
  CHECK(a == run());
  c.rng_seed = 100;
  CHECK(a != run());
}

TEST_CASE("trace CSV and summary layout") {
  LinearPlant plant(scalar_schema(), {1.0});
  const auto r = run_loop(plant, TemplateSet::defaults_for(scalar_schema()), scalar_config(2), PromptState());
  const auto csv = trace_csv(r.trace);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,dimension,y,e,u,converged");
  std::getline(in, line);
  CHECK(line == "0,y,1,-1,-0.59999999999999998,0");
  const auto summary = summary_json(r);
  CHECK(summary.find("\"status\": \"budget_exhausted\"") != std::string::npos);
  CHECK(summary.find("\"iterations\": 2") != std::string::npos);
}

TEST_CASE("schema mismatches are rejected up front") {
  LinearPlant plant(MetricSchema(std::vector<MetricDimension>{{"z", "unit"}}), {1.0});
  CHECK_THROWS_AS((void)run_loop(plant, TemplateSet::defaults_for(scalar_schema()), scalar_config(2), PromptState()),
                  Error);
}

}
