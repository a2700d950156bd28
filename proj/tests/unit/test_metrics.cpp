#include <doctest.h>

#include <cmath>
#include <random>

#include <promptctl/error.hpp>
#include <promptctl/metrics.hpp>
#include <promptctl/noise.hpp>

using namespace promptctl;

TEST_SUITE("metrics") {

TEST_CASE("schema validation") {
  CHECK_THROWS_AS(MetricSchema({{"a", "u"}, {"a", "v"}}), Error);
  CHECK_THROWS_AS(MetricSchema(std::vector<MetricDimension>{{"a", ""}}), Error);
  const MetricSchema s({{"a", "u"}, {"b", "v", Direction::HigherIsBetter}});
  CHECK(s.index_of("b") == 1);
  CHECK(!s.index_of("c"));
  CHECK(s == MetricSchema({{"a", "u"}, {"b", "v", Direction::HigherIsBetter}}));
  CHECK(!(s == MetricSchema({{"a", "u"}, {"b", "v"}})));
}

TEST_CASE("vectors check length and finiteness") {
  const MetricSchema s({{"a", "u"}, {"b", "v"}});
  CHECK_THROWS_AS(MetricVector(s, {1.0}), Error);
  try {
    (void)MetricVector(s, {1.0, std::nan("")});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidInput);
  }
  const MetricVector v(s, {1.0, 2.0});
  CHECK(v.at("b") == 2.0);
  CHECK_THROWS_AS((void)v.at("z"), Error);
  CHECK(MetricVector::zeros(s).values() == std::vector<double>{0.0, 0.0});
}

}

TEST_SUITE("noise") {

TEST_CASE("zero sigma is an exact identity that draws nothing") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(-1e6, 1e6);
  const NoiseSpec spec{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  for (int n = 0; n < 1000; ++n) {
    const std::vector<double> y = {val(rng), val(rng), 1e-300};
    Rng a(n);
    Rng b(n);
    const auto eta = apply_noise(y, spec, NoiseStage::Eta, a);
    const auto nu = apply_noise(y, spec, NoiseStage::Nu, a);
    CHECK(eta == y);
    CHECK(nu == y);
    CHECK(a() == b());
  }
  Rng r(1);
  const std::vector<double> y = {1.0, 2.0, 3.0};
  CHECK(apply_noise(y, NoiseSpec{}, NoiseStage::Eta, r) == y);
}

TEST_CASE("gaussian noise has the configured spread") {
  const NoiseSpec spec{{}, {0.5, 2.0}};
  Rng rng(123);
  const int n = 200000;
  double s0 = 0, s1 = 0, q0 = 0, q1 = 0;
  for (int i = 0; i < n; ++i) {
    const auto y = apply_noise(std::vector<double>{10.0, -4.0}, spec, NoiseStage::Nu, rng);
    s0 += y[0] - 10.0;
    s1 += y[1] + 4.0;
    q0 += (y[0] - 10.0) * (y[0] - 10.0);
    q1 += (y[1] + 4.0) * (y[1] + 4.0);
  }
  // 5-sigma bands on the sample mean and variance.
  CHECK(std::abs(s0 / n) < 5 * 0.5 / std::sqrt(n));
  CHECK(std::abs(s1 / n) < 5 * 2.0 / std::sqrt(n));
  CHECK(std::abs(q0 / n - 0.25) < 5 * 0.25 * std::sqrt(2.0 / n));
  CHECK(std::abs(q1 / n - 4.0) < 5 * 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("negative sigma is rejected") {
  const NoiseSpec spec{{-1.0}, {}};
  CHECK_THROWS_AS(spec.validate(), Error);
}

}
