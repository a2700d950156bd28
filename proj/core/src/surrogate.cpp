#include "promptctl/surrogate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "promptctl/error.hpp"

namespace promptctl {

namespace {

constexpr std::size_t kMaxVocab = 64;
constexpr Eigen::Index kMaxDim = 8;

void require_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols)
    throw Error(ErrorKind::Schema, std::string("surrogate: ") + name + " must be " + std::to_string(rows) + "x" +
                                       std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                                       std::to_string(m.cols()));
}

double frequency(Eigen::Index pair, Eigen::Index d, double base) {
  return std::pow(base, -2.0 * static_cast<double>(pair) / static_cast<double>(d));
}

}  // namespace

void SurrogateParams::validate() const {
  const auto v = static_cast<Eigen::Index>(vocabulary.size());
  if (vocabulary.empty() || vocabulary.size() > kMaxVocab)
    throw Error(ErrorKind::Schema, "surrogate: vocabulary size must be in [1, 64]");
  const Eigen::Index d = embedding.cols();
  const Eigen::Index dk = w_q.cols();
  const Eigen::Index h = w1.cols();
  if (d < 1 || d > kMaxDim || dk < 1 || dk > kMaxDim || h < 1 || h > kMaxDim)
    throw Error(ErrorKind::Schema, "surrogate: model, key and hidden dimensions must be in [1, 8]");
  require_shape(embedding, v, d, "embedding");
  require_shape(w_q, d, dk, "W_Q");
  require_shape(w_k, d, dk, "W_K");
  require_shape(w_v, d, dk, "W_V");
  require_shape(w1, dk, h, "W1");
  require_shape(b1, 1, h, "b1");
  require_shape(w2, h, dk, "W2");
  require_shape(b2, 1, dk, "b2");
  require_shape(w_o, dk, v, "W_o");
  require_shape(b_o, 1, v, "b_o");
  for (const Eigen::MatrixXd* m : {&embedding, &w_q, &w_k, &w_v, &w1, &w2, &w_o}) {
    if (!m->allFinite()) throw Error(ErrorKind::InvalidInput, "surrogate: weights must be finite");
  }
  if (!b1.allFinite() || !b2.allFinite() || !b_o.allFinite())
    throw Error(ErrorKind::InvalidInput, "surrogate: biases must be finite");
  if (!(pe_base > 1.0)) throw Error(ErrorKind::Parameter, "surrogate: positional base must exceed 1");
  if (target_token >= vocabulary.size()) throw Error(ErrorKind::Parameter, "surrogate: target token out of range");
}

SurrogateParams SurrogateParams::random(std::uint64_t seed, std::vector<std::string> vocabulary, Eigen::Index d,
                                        Eigen::Index dk, Eigen::Index hidden, double scale) {
  Rng rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  auto fill = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = dist(rng);
    return m;
  };
  SurrogateParams p;
  const auto v = static_cast<Eigen::Index>(vocabulary.size());
  p.vocabulary = std::move(vocabulary);
  p.embedding = fill(v, d);
  p.w_q = fill(d, dk);
  p.w_k = fill(d, dk);
  p.w_v = fill(d, dk);
  p.w1 = fill(dk, hidden);
  p.b1 = fill(1, hidden);
  p.w2 = fill(hidden, dk);
  p.b2 = fill(1, dk);
  p.w_o = fill(dk, v);
  p.b_o = fill(1, v);
  p.validate();
  return p;
}

Eigen::RowVectorXd positional_encoding(double position, Eigen::Index d, double base) {
  Eigen::RowVectorXd pe(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double angle = position * frequency(k / 2, d, base);
    pe[k] = (k % 2 == 0) ? std::sin(angle) : std::cos(angle);
  }
  return pe;
}

double positional_lipschitz(Eigen::Index d, double base) {
  double sum = 0.0;
  for (Eigen::Index pair = 0; 2 * pair < d; ++pair) {
    const double w = frequency(pair, d, base);
    sum += w * w;
  }
  return std::sqrt(sum);
}

std::vector<std::size_t> tokenize(std::string_view text, const SurrogateParams& params) {
  std::vector<std::size_t> ids;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    std::string clean;
    for (char c : word) {
      if (std::isalnum(static_cast<unsigned char>(c))) clean += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (clean.empty()) continue;
    const auto it = std::find(params.vocabulary.begin(), params.vocabulary.end(), clean);
    ids.push_back(it == params.vocabulary.end() ? 0 : static_cast<std::size_t>(it - params.vocabulary.begin()));
  }
  return ids;
}

Eigen::MatrixXd surrogate_embed(std::span<const std::size_t> tokens, double u, const SurrogateParams& params) {
  if (!std::isfinite(u)) throw Error(ErrorKind::InvalidInput, "surrogate: control must be finite");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(tokens.size()), params.model_dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= params.vocab_size())
      throw Error(ErrorKind::InvalidInput, "surrogate: token id " + std::to_string(tokens[i]) + " is out of vocabulary");
    out.row(static_cast<Eigen::Index>(i)) = params.embedding.row(static_cast<Eigen::Index>(tokens[i])).array() + u;
  }
  return out;
}

Eigen::MatrixXd surrogate_positional(const Eigen::MatrixXd& embeddings, double u, const SurrogateParams& params) {
  Eigen::MatrixXd out = embeddings;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) += positional_encoding(static_cast<double>(i) + u, out.cols(), params.pe_base);
  }
  return out;
}

Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd ex = (logits.row(i).array() - mx).exp().matrix();
    out.row(i) = ex / ex.sum();
  }
  return out;
}

Eigen::MatrixXd attention_weights(const Eigen::MatrixXd& x, const SurrogateParams& params) {
  const Eigen::MatrixXd q = x * params.w_q;
  const Eigen::MatrixXd k = x * params.w_k;
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.key_dim()));
  return row_softmax((q * k.transpose()) * scale);
}

Eigen::MatrixXd surrogate_attention(const Eigen::MatrixXd& x, const SurrogateParams& params) {
  return attention_weights(x, params) * (x * params.w_v);
}

Eigen::MatrixXd surrogate_ffn(const Eigen::MatrixXd& x, const SurrogateParams& params) {
  Eigen::MatrixXd hidden = x * params.w1;
  hidden.rowwise() += params.b1;
  hidden = hidden.cwiseMax(0.0);
  Eigen::MatrixXd out = hidden * params.w2;
  out.rowwise() += params.b2;
  return out;
}

SurrogateOutput surrogate_output(const Eigen::MatrixXd& h, const SurrogateParams& params, DecodeMode mode,
                                 Rng* rng) {
  if (mode == DecodeMode::Sample && rng == nullptr)
    throw Error(ErrorKind::InvalidInput, "surrogate: sampling requires a random generator");
  Eigen::MatrixXd logits = h * params.w_o;
  logits.rowwise() += params.b_o;
  SurrogateOutput out;
  out.probabilities = row_softmax(logits);
  out.tokens.reserve(static_cast<std::size_t>(h.rows()));
  for (Eigen::Index i = 0; i < out.probabilities.rows(); ++i) {
    Eigen::Index pick = 0;
    if (mode == DecodeMode::Argmax) {
      out.probabilities.row(i).maxCoeff(&pick);
    } else {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double draw = unit(*rng);
      double cumulative = 0.0;
      pick = out.probabilities.cols() - 1;
      for (Eigen::Index j = 0; j < out.probabilities.cols(); ++j) {
        cumulative += out.probabilities(i, j);
        if (draw < cumulative) {
          pick = j;
          break;
        }
      }
    }
    out.tokens.push_back(static_cast<std::size_t>(pick));
  }
  return out;
}

namespace {

SurrogateResult finish(const Eigen::MatrixXd& x, const SurrogateParams& params, DecodeMode mode, Rng* rng) {
  const Eigen::MatrixXd context = surrogate_attention(x, params);
  const Eigen::MatrixXd hidden = surrogate_ffn(context, params);
  SurrogateResult r;
  r.output = surrogate_output(hidden, params, mode, rng);
  const auto target = static_cast<Eigen::Index>(params.target_token);
  r.observation = r.output.probabilities.rows() == 0 ? 0.0 : r.output.probabilities.col(target).mean();
  return r;
}

}  // namespace

SurrogateResult surrogate_generate(std::span<const std::size_t> tokens, double u, const SurrogateParams& params,
                                   DecodeMode mode, Rng* rng) {
  params.validate();
  const Eigen::MatrixXd embedded = surrogate_embed(tokens, u, params);
  return finish(surrogate_positional(embedded, u, params), params, mode, rng);
}

SurrogateResult surrogate_generate_uncontrolled(std::span<const std::size_t> tokens, const SurrogateParams& params,
                                                DecodeMode mode, Rng* rng) {
  params.validate();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(tokens.size()), params.model_dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= params.vocab_size())
      throw Error(ErrorKind::InvalidInput, "surrogate: token id " + std::to_string(tokens[i]) + " is out of vocabulary");
    const auto row = static_cast<Eigen::Index>(i);
    x.row(row) = params.embedding.row(static_cast<Eigen::Index>(tokens[i])) +
                 positional_encoding(static_cast<double>(i), params.model_dim(), params.pe_base);
  }
  return finish(x, params, mode, rng);
}

SurrogatePlant::SurrogatePlant(SurrogateParams params, DecodeMode mode, std::string dimension)
    : params_(std::move(params)),
      mode_(mode),
      schema_({{std::move(dimension), "probability", Direction::HigherIsBetter}}) {
  params_.validate();
}

PlantOutput SurrogatePlant::generate(std::string_view prompt, const ControlSignal& u, Rng& rng) {
  require_length(u.size(), 1, "surrogate plant control");
  auto tokens = tokenize(prompt, params_);
  if (tokens.empty()) tokens.push_back(0);
  const auto result = surrogate_generate(tokens, u[0], params_, mode_, &rng);
  std::string artifact;
  for (std::size_t id : result.output.tokens) {
    if (!artifact.empty()) artifact += ' ';
    artifact += params_.vocabulary[id];
  }
  return {std::move(artifact), MetricVector(schema_, {result.observation})};
}

}  // namespace promptctl
