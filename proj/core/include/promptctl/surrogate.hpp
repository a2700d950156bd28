#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "promptctl/plant.hpp"

namespace promptctl {

/// Weights of a single-layer, single-head toy transformer.
///
/// Shapes: embedding V x d; w_q, w_k, w_v d x dk; w1 dk x h, b1 1 x h;
/// w2 h x dk, b2 1 x dk; w_o dk x V, b_o 1 x V. V <= 64 and d, dk, h <= 8.
struct SurrogateParams {
  std::vector<std::string> vocabulary;
  Eigen::MatrixXd embedding;
  Eigen::MatrixXd w_q, w_k, w_v;
  Eigen::MatrixXd w1;
  Eigen::RowVectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::RowVectorXd b2;
  Eigen::MatrixXd w_o;
  Eigen::RowVectorXd b_o;
  double pe_base = 10000.0;
  /// Token whose mean probability is reported as the observation.
  std::size_t target_token = 0;

  [[nodiscard]] std::size_t vocab_size() const noexcept { return vocabulary.size(); }
  [[nodiscard]] Eigen::Index model_dim() const noexcept { return embedding.cols(); }
  [[nodiscard]] Eigen::Index key_dim() const noexcept { return w_q.cols(); }

  /// Throws Error(Schema) for non-conformable shapes or oversize dimensions,
  /// Error(InvalidInput) for non-finite weights.
  void validate() const;

  /// Gaussian weights N(0, scale^2), reproducible from `seed`.
  static SurrogateParams random(std::uint64_t seed, std::vector<std::string> vocabulary, Eigen::Index d,
                                Eigen::Index dk, Eigen::Index hidden, double scale = 0.5);
};

/// Sinusoidal encoding at a real-valued position:
/// PE[2i] = sin(pos / base^(2i/d)), PE[2i+1] = cos(pos / base^(2i/d)).
[[nodiscard]] Eigen::RowVectorXd positional_encoding(double position, Eigen::Index d, double base = 10000.0);

/// Root-sum-square of the encoder's angular frequencies, a Lipschitz bound:
/// ||PE(p + eps) - PE(p)||_2 <= positional_lipschitz(d, base) * |eps|.
[[nodiscard]] double positional_lipschitz(Eigen::Index d, double base = 10000.0);

/// Whitespace tokenizer: lower-cased words looked up in the vocabulary,
/// unknown words map to id 0.
[[nodiscard]] std::vector<std::size_t> tokenize(std::string_view text, const SurrogateParams& params);

/// Embedding rows plus the control as an additive bias on every coordinate.
/// Throws Error(InvalidInput) for an out-of-vocabulary id.
[[nodiscard]] Eigen::MatrixXd surrogate_embed(std::span<const std::size_t> tokens, double u,
                                              const SurrogateParams& params);

/// e_i' = e_i + PE(i + u), positions counted from 0.
[[nodiscard]] Eigen::MatrixXd surrogate_positional(const Eigen::MatrixXd& embeddings, double u,
                                                   const SurrogateParams& params);

/// Row-softmax(Q K^T / sqrt(dk)).
[[nodiscard]] Eigen::MatrixXd attention_weights(const Eigen::MatrixXd& x, const SurrogateParams& params);

/// attention_weights(x) * (x W_V).
[[nodiscard]] Eigen::MatrixXd surrogate_attention(const Eigen::MatrixXd& x, const SurrogateParams& params);

/// ReLU(x W1 + b1) W2 + b2, row-wise.
[[nodiscard]] Eigen::MatrixXd surrogate_ffn(const Eigen::MatrixXd& x, const SurrogateParams& params);

/// Numerically stable softmax of each row.
[[nodiscard]] Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& logits);

enum class DecodeMode { Argmax, Sample };

struct SurrogateOutput {
  std::vector<std::size_t> tokens;
  Eigen::MatrixXd probabilities;  // one row per position, V columns
};

/// o_i = softmax(h_i W_o + b_o), then argmax or a seeded draw per row.
/// Sample mode requires `rng`.
[[nodiscard]] SurrogateOutput surrogate_output(const Eigen::MatrixXd& h, const SurrogateParams& params,
                                               DecodeMode mode, Rng* rng = nullptr);

struct SurrogateResult {
  SurrogateOutput output;
  /// Mean probability assigned to the target token across positions.
  double observation = 0.0;
};

/// embed -> positional -> attention -> FFN -> output, with the control
/// injected into the embedding bias and the positional offset.
[[nodiscard]] SurrogateResult surrogate_generate(std::span<const std::size_t> tokens, double u,
                                                 const SurrogateParams& params, DecodeMode mode,
                                                 Rng* rng = nullptr);

/// The same composition with no control injection at all.
[[nodiscard]] SurrogateResult surrogate_generate_uncontrolled(std::span<const std::size_t> tokens,
                                                              const SurrogateParams& params, DecodeMode mode,
                                                              Rng* rng = nullptr);

/// One-dimensional plant around the surrogate. The observation dimension is
/// "target_mass" (unit "probability", higher is better); u[0] is injected.
class SurrogatePlant final : public Plant {
 public:
  SurrogatePlant(SurrogateParams params, DecodeMode mode = DecodeMode::Argmax,
                 std::string dimension = "target_mass");

  [[nodiscard]] const MetricSchema& schema() const override { return schema_; }
  PlantOutput generate(std::string_view prompt, const ControlSignal& u, Rng& rng) override;
  [[nodiscard]] bool reentrant() const noexcept override { return true; }

  [[nodiscard]] const SurrogateParams& params() const noexcept { return params_; }

 private:
  SurrogateParams params_;
  DecodeMode mode_;
  MetricSchema schema_;
};

}  // namespace promptctl
