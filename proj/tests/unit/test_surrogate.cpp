#include <doctest.h>

#include <cmath>
#include <random>

#include <promptctl/error.hpp>
#include <promptctl/surrogate.hpp>

#include "support/oracles.hpp"

using namespace promptctl;

namespace {

oracle::Mat to_mat(const Eigen::MatrixXd& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

oracle::Vec to_vec(const Eigen::RowVectorXd& v) { return {v.data(), v.data() + v.size()}; }

oracle::Transformer mirror(const SurrogateParams& p) {
  oracle::Transformer t;
  t.embedding = to_mat(p.embedding);
  t.wq = to_mat(p.w_q);
  t.wk = to_mat(p.w_k);
  t.wv = to_mat(p.w_v);
  t.w1 = to_mat(p.w1);
  t.w2 = to_mat(p.w2);
  t.wo = to_mat(p.w_o);
  t.b1 = to_vec(p.b1);
  t.b2 = to_vec(p.b2);
  t.bo = to_vec(p.b_o);
  t.base = p.pe_base;
  return t;
}

/// Hand-written weights: V = 3, d = dk = h = 2.
SurrogateParams tiny() {
  SurrogateParams p;
  p.vocabulary = {"<unk>", "alpha", "beta"};
  p.embedding.resize(3, 2);
  p.embedding << 0.1, -0.2, 0.5, 0.3, -0.4, 0.8;
  p.w_q.resize(2, 2);
  p.w_q << 0.9, -0.1, 0.2, 0.7;
  p.w_k.resize(2, 2);
  p.w_k << -0.3, 0.6, 0.4, 0.1;
  p.w_v.resize(2, 2);
  p.w_v << 0.5, 0.5, -0.6, 0.2;
  p.w1.resize(2, 2);
  p.w1 << 1.0, -0.5, 0.3, 0.8;
  p.b1.resize(2);
  p.b1 << 0.05, -0.1;
  p.w2.resize(2, 2);
  p.w2 << 0.7, -0.2, 0.1, 0.9;
  p.b2.resize(2);
  p.b2 << 0.0, 0.2;
  p.w_o.resize(2, 3);
  p.w_o << 0.4, -0.7, 0.2, 0.3, 0.5, -0.9;
  p.b_o.resize(3);
  p.b_o << 0.1, 0.0, -0.1;
  p.target_token = 1;
  return p;
}

}  // namespace

TEST_SUITE("surrogate") {

TEST_CASE("3-token forward pass matches the loop oracle") {
  const auto p = tiny();
  const std::vector<std::size_t> tokens = {1, 2, 0};
  for (double u : {0.0, 0.3, -1.7}) {
    const auto got = surrogate_generate(tokens, u, p, DecodeMode::Argmax);
    const auto want = oracle::forward(mirror(p), tokens, u, true);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t w = 0; w < 3; ++w)
        CHECK(std::abs(got.output.probabilities(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(w)) -
                       want[i][w]) <= 1e-10);
    CHECK(std::abs(got.observation - (want[0][1] + want[1][1] + want[2][1]) / 3.0) <= 1e-10);
  }
}

TEST_CASE("random parameter draws match the oracle") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uu(-2.0, 2.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = SurrogateParams::random(seed, {"a", "b", "c", "d", "e", "f"}, 6, 4, 8, 0.7);
    const std::vector<std::size_t> tokens = {3, 1, 4, 1, 5};
    const double u = uu(rng);
    const auto got = surrogate_generate(tokens, u, p, DecodeMode::Argmax);
    const auto want = oracle::forward(mirror(p), tokens, u, true);
    for (std::size_t i = 0; i < tokens.size(); ++i)
      for (std::size_t w = 0; w < 6; ++w)
        CHECK(std::abs(got.output.probabilities(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(w)) -
                       want[i][w]) <= 1e-10);
  }
}

TEST_CASE("softmax rows sum to one across 1000 draws") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_int_distribution<int> vocab(2, 64);
  std::uniform_real_distribution<double> scale(0.1, 4.0);
  std::uniform_real_distribution<double> uu(-5.0, 5.0);
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    const int v = vocab(rng);
    std::vector<std::string> words;
    for (int i = 0; i < v; ++i) words.push_back("w" + std::to_string(i));
    const auto p = SurrogateParams::random(static_cast<std::uint64_t>(draw), words, dim(rng), dim(rng), dim(rng),
                                           scale(rng));
    std::vector<std::size_t> tokens;
    std::uniform_int_distribution<int> tok(0, v - 1);
    const int n = 1 + draw % 7;
    for (int i = 0; i < n; ++i) tokens.push_back(static_cast<std::size_t>(tok(rng)));
    const double u = uu(rng);
    const auto x = surrogate_positional(surrogate_embed(tokens, u, p), u, p);
    const auto a = attention_weights(x, p);
    const auto r = surrogate_generate(tokens, u, p, DecodeMode::Argmax);
    for (Eigen::Index i = 0; i < a.rows(); ++i) worst = std::max(worst, std::abs(a.row(i).sum() - 1.0));
    for (Eigen::Index i = 0; i < r.output.probabilities.rows(); ++i)
      worst = std::max(worst, std::abs(r.output.probabilities.row(i).sum() - 1.0));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("zero control is bit-identical to the uncontrolled pipeline") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto p = SurrogateParams::random(seed, {"a", "b", "c", "d"}, 4, 4, 4, 1.0);
    const std::vector<std::size_t> tokens = {0, 2, 3, 1, 2};
    const auto with = surrogate_generate(tokens, 0.0, p, DecodeMode::Argmax);
    const auto without = surrogate_generate_uncontrolled(tokens, p, DecodeMode::Argmax);
    CHECK(with.output.tokens == without.output.tokens);
    CHECK((with.output.probabilities.array() == without.output.probabilities.array()).all());
    CHECK(with.observation == without.observation);
  }
}

TEST_CASE("positional encoding is Lipschitz in the offset") {
  for (Eigen::Index d : {2, 4, 6, 8}) {
    const double lip = positional_lipschitz(d);
    std::mt19937_64 rng(static_cast<std::uint64_t>(d));
    std::uniform_real_distribution<double> pos(-10.0, 10.0);
    std::uniform_real_distribution<double> eps(-0.5, 0.5);
    for (int n = 0; n < 500; ++n) {
      const double p0 = pos(rng);
      const double e = eps(rng);
      const double diff = (positional_encoding(p0 + e, d) - positional_encoding(p0, d)).norm();
      CHECK(diff <= lip * std::abs(e) + 1e-12);
    }
    const auto pe = positional_encoding(1.3, d);
    const auto want = oracle::positional(1.3, static_cast<std::size_t>(d), 10000.0);
    for (Eigen::Index k = 0; k < d; ++k) CHECK(pe[k] == doctest::Approx(want[static_cast<std::size_t>(k)]));
  }
}

TEST_CASE("observation is continuous in the control") {
  const auto p = SurrogateParams::random(3, {"a", "b", "c", "d", "e"}, 4, 4, 4, 0.8);
  const std::vector<std::size_t> tokens = {1, 2, 3};
  const double y0 = surrogate_generate(tokens, 0.5, p, DecodeMode::Argmax).observation;
  double prev = 1.0;
  for (double h : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    const double dy = std::abs(surrogate_generate(tokens, 0.5 + h, p, DecodeMode::Argmax).observation - y0);
    CHECK(dy <= prev + 1e-15);
    prev = dy;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("sampling is reproducible from the seed") {
  const auto p = SurrogateParams::random(5, {"a", "b", "c", "d"}, 4, 4, 4, 2.0);
  const std::vector<std::size_t> tokens = {0, 1, 2, 3, 0, 1, 2, 3};
  Rng r1(42);
  Rng r2(42);
  const auto a = surrogate_generate(tokens, 0.2, p, DecodeMode::Sample, &r1);
  const auto b = surrogate_generate(tokens, 0.2, p, DecodeMode::Sample, &r2);
  CHECK(a.output.tokens == b.output.tokens);
  CHECK_THROWS_AS((void)surrogate_generate(tokens, 0.2, p, DecodeMode::Sample, nullptr), Error);
}

TEST_CASE("tokenizer maps unknown words to id 0") {
  const auto p = tiny();
  CHECK(tokenize("Alpha, gamma BETA!", p) == std::vector<std::size_t>{1, 0, 2});
}

TEST_CASE("out-of-vocabulary ids and oversize models are rejected") {
  const auto p = tiny();
  const std::vector<std::size_t> bad = {7};
  CHECK_THROWS_AS((void)surrogate_generate(bad, 0.0, p, DecodeMode::Argmax), Error);
  CHECK_THROWS_AS((void)SurrogateParams::random(1, {"a"}, 9, 2, 2), Error);
}

TEST_CASE("plant observes the target token mass") {
  auto params = tiny();
  SurrogatePlant plant(params);
  Rng rng(0);
  const auto out = plant.generate("alpha beta", ControlSignal({0.25}), rng);
  const std::vector<std::size_t> tokens = {1, 2};
  CHECK(out.observation[0] == surrogate_generate(tokens, 0.25, params, DecodeMode::Argmax).observation);
  CHECK(plant.schema()[0].name == "target_mass");
}

}
