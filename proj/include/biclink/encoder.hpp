#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "biclink/rng.hpp"

namespace biclink {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Architecture of the set-input encoder classifier. There is no positional
/// table: a token's embedding does not depend on where it sits.
struct EncoderConfig {
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t model_dim = 64;
  std::size_t ffn_dim = 128;
  std::size_t mlp_hidden = 64;
  std::size_t vocab_size = 0;
  std::size_t max_seq_len = 0;
  double dropout = 0.1;
  double init_std = 0.02;
  double layer_norm_eps = 1e-5;
  std::uint64_t seed = 0;

  /// d_model 64, 2 layers, 4 heads, FFN 128, MLP 64.
  static EncoderConfig desk();
  /// d_model 768, 9 layers, 12 heads, FFN 3072, MLP 512.
  static EncoderConfig paper();

  std::size_t head_dim() const { return model_dim / num_heads; }
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct LayerParams {
  Matrix wq, bq, wk, bk, wv, bv, wo, bo;
  Matrix ln1_gamma, ln1_beta;
  Matrix ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  Matrix ln2_gamma, ln2_beta;
};

struct NamedTensor {
  std::string name;
  Matrix* value;
};

struct ConstNamedTensor {
  std::string name;
  const Matrix* value;
};

/// Learned tensors. Biases and layer-norm vectors are 1 x n matrices.
struct ModelParams {
  Matrix embedding;  // vocab_size x d_model
  std::vector<LayerParams> layers;
  Matrix head_w1;  // d_model x mlp_hidden
  Matrix head_b1;  // 1 x mlp_hidden
  Matrix head_w2;  // mlp_hidden x 1
  Matrix head_b2;  // 1 x 1

  /// Every tensor zero (gradient buffers, or the all-zero model).
  static ModelParams zeros(const EncoderConfig& cfg);
  /// Gaussian(0, init_std) weights, zero biases and offsets, unit scales.
  static ModelParams initialize(const EncoderConfig& cfg, std::uint64_t seed);

  std::vector<NamedTensor> tensors();
  std::vector<ConstNamedTensor> tensors() const;
  std::size_t parameter_count() const;
  bool all_finite() const;
  void set_zero();
  /// this += scale * other
  void add_scaled(const ModelParams& other, double scale);
};

/// Token-id rows of the embedding table.
Matrix embed(std::span<const std::uint32_t> tokens, const ModelParams& params);

/// Runs the encoder stack over `embeddings`. `pad_mask[i]` marks positions
/// that must not be attended to as keys; an empty mask means none.
/// Throws std::runtime_error on non-finite activations.
Matrix encoder_forward(const Matrix& embeddings, const std::vector<bool>& pad_mask,
                       const ModelParams& params, const EncoderConfig& cfg);

/// Pre-sigmoid output of the MLP head for one [CLS] vector.
double classify_logit(const Eigen::Ref<const Eigen::RowVectorXd>& cls, const ModelParams& params);
double classify(const Eigen::Ref<const Eigen::RowVectorXd>& cls, const ModelParams& params);

double sigmoid(double z);

/// [CLS] logit of a token sequence with every [PAD] position key-masked.
double sequence_logit(std::span<const std::uint32_t> tokens, const ModelParams& params,
                      const EncoderConfig& cfg);

/// Same value as sequence_logit, computed on the sequence with its [PAD]
/// tokens removed. Masked pads never reach an unmasked row, so the two agree
/// up to rounding while this path does less work.
double compact_logit(std::span<const std::uint32_t> tokens, const ModelParams& params,
                     const EncoderConfig& cfg);

/// Binary cross-entropy from a logit, stable for large |z|.
double bce_with_logit(double logit, int label);

/// Loss of one sample, with gradients scaled by `weight` added into `grads`.
/// Dropout is applied when `dropout_rng` is given and cfg.dropout > 0.
/// [PAD] tokens are removed before the pass.
double accumulate_gradients(std::span<const std::uint32_t> tokens, int label,
                            const ModelParams& params, const EncoderConfig& cfg, double weight,
                            ModelParams& grads, Rng* dropout_rng = nullptr);

/// Attention weights of every head in the first layer, for inspection:
/// result[h] is seq_len x seq_len, rows summing to one over unmasked keys.
std::vector<Matrix> first_layer_attention(const Matrix& embeddings, const std::vector<bool>& pad_mask,
                                          const ModelParams& params, const EncoderConfig& cfg);

}  // namespace biclink
