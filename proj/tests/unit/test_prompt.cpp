#include <doctest.h>

#include <promptctl/error.hpp>
#include <promptctl/fpga_sim.hpp>
#include <promptctl/prompt.hpp>

using namespace promptctl;

TEST_SUITE("prompt") {

TEST_CASE("worked-example directive text") {
  const auto schema = fpga::schema();
  const auto t = fpga::templates();
  CHECK(render_control(ControlSignal({-6, -3, -12, -9, 0.15}), schema, t) ==
        "Reduce resource usage by 6% LUTs, 3% FFs, 12% DSPs, 9% BRAMs, and improve timing by 0.15 ns.");
  CHECK(render_control(ControlSignal({-3, -1.2, -6, -4.8, 0.05}), schema, t, true) ==
        "Further reduce resource usage by 3% LUTs, 1.2% FFs, 6% DSPs, 4.8% BRAMs, and improve timing by 0.05 ns.");
}

TEST_CASE("dead-band dimensions are dropped") {
  const auto schema = fpga::schema();
  const auto t = fpga::templates();
  CHECK(render_control(ControlSignal({0, 0, 0, 0, 0}), schema, t).empty());
  CHECK(render_control(ControlSignal({-2, 0, 0, 0, 0}), schema, t) == "Reduce resource usage by 2% LUTs.");
  CHECK(render_control(ControlSignal({-2, 0, 0, -1, 0}), schema, t) ==
        "Reduce resource usage by 2% LUTs, 1% BRAMs.");
  CHECK(render_control(ControlSignal({1.5, 0, 0, 0, -0.2}), schema, t) ==
        "Allow additional resource usage of 1.5% LUTs, and relax timing by 0.2 ns.");
}

TEST_CASE("magnitudes drop trailing zeros") {
  CHECK(format_magnitude(6.0, 2) == "6");
  CHECK(format_magnitude(1.2, 2) == "1.2");
  CHECK(format_magnitude(0.126, 2) == "0.13");
  CHECK(format_magnitude(4.8000000001, 2) == "4.8");
}

TEST_CASE("prompt history accumulates and truncates") {
  const auto schema = fpga::schema();
  auto t = fpga::templates();
  t.max_history = 2;
  PromptState p("Base.");
  p = update_prompt(p, ControlSignal({-1, 0, 0, 0, 0}), schema, t);
  CHECK(p.composed() == "Base. Reduce resource usage by 1% LUTs.");
  p = update_prompt(p, ControlSignal({-2, 0, 0, 0, 0}), schema, t);
  p = update_prompt(p, ControlSignal({-3, 0, 0, 0, 0}), schema, t);
  CHECK(p.issued() == 3);
  REQUIRE(p.directives().size() == 2);
  CHECK(p.directives()[0] == "Further reduce resource usage by 2% LUTs.");
  CHECK(p.directives()[1] == "Further reduce resource usage by 3% LUTs.");
  const auto same = update_prompt(p, ControlSignal({0, 0, 0, 0, 0}), schema, t);
  CHECK(same == p);
}

TEST_CASE("missing templates are configuration errors") {
  const MetricSchema s(std::vector<MetricDimension>{{"x", "u", Direction::LowerIsBetter}});
  TemplateSet empty;
  try {
    (void)render_control(ControlSignal({1.0}), s, empty);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Configuration);
  }
  CHECK(render_control(ControlSignal({-1.0}), s, TemplateSet::defaults_for(s)).find("x") != std::string::npos);
}

TEST_CASE("observation parsing") {
  const auto os = fpga::observation_schema();
  const auto y = parse_observation(
      R"({"LUTs": 70, "FFs": {"value": 65, "unit": "%"}, "DSPs": 80, "BRAMs": 75, "slack_ns": {"value": -2, "unit": "ns"}})",
      os);
  CHECK(y.values() == std::vector<double>{70, 65, 80, 75, -2});

  try {
    (void)parse_observation(R"({"LUTs": 70, "FFs": 65, "DSPs": 80, "slack_ns": 0})", os);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Observation);
    CHECK(std::string(e.what()).find("BRAMs") != std::string::npos);
  }
  try {
    (void)parse_observation(R"({"LUTs": "many", "FFs": 65, "DSPs": 80, "BRAMs": 1, "slack_ns": 0})", os);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
  }
  CHECK_THROWS_AS((void)parse_observation("{not json", os), Error);
  CHECK_THROWS_AS(
      (void)parse_observation(R"({"LUTs": {"value": 1, "unit": "ns"}, "FFs": 1, "DSPs": 1, "BRAMs": 1, "slack_ns": 0})", os),
      Error);

  const auto z = parse_observation_from_text(
      "Here is the code.\n```\nvoid f() {}\n```\nReport: {\"LUTs\": 1, \"FFs\": 2, \"DSPs\": 3, \"BRAMs\": 4, \"slack_ns\": 0.5}",
      os);
  CHECK(z.values() == std::vector<double>{1, 2, 3, 4, 0.5});
}

}
