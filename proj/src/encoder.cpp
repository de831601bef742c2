#include "biclink/encoder.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "biclink/samples.hpp"

namespace biclink {

EncoderConfig EncoderConfig::desk() { return EncoderConfig{}; }

EncoderConfig EncoderConfig::paper() {
  EncoderConfig cfg;
  cfg.num_layers = 9;
  cfg.num_heads = 12;
  cfg.model_dim = 768;
  cfg.ffn_dim = 3072;
  cfg.mlp_hidden = 512;
  return cfg;
}

void EncoderConfig::validate() const {
  if (num_layers == 0 || num_heads == 0 || model_dim == 0 || ffn_dim == 0 || mlp_hidden == 0 ||
      vocab_size == 0)
    throw std::invalid_argument("encoder dimensions must all be at least 1");
  if (model_dim % num_heads != 0)
    throw std::invalid_argument("model_dim must be divisible by num_heads");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (!(init_std > 0.0)) throw std::invalid_argument("init_std must be positive");
}

// ---------------------------------------------------------------------------

namespace {

Matrix zeros(std::size_t r, std::size_t c) {
  return Matrix::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

Matrix ones(std::size_t r, std::size_t c) {
  return Matrix::Ones(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

template <class Params, class Out, class Fn>
void visit_tensors(Params& p, Out& out, Fn make) {
  out.push_back(make("embedding", p.embedding));
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& L = p.layers[l];
    const std::string pre = "layers." + std::to_string(l) + ".";
    out.push_back(make(pre + "attn.wq", L.wq));
    out.push_back(make(pre + "attn.bq", L.bq));
    out.push_back(make(pre + "attn.wk", L.wk));
    out.push_back(make(pre + "attn.bk", L.bk));
    out.push_back(make(pre + "attn.wv", L.wv));
    out.push_back(make(pre + "attn.bv", L.bv));
    out.push_back(make(pre + "attn.wo", L.wo));
    out.push_back(make(pre + "attn.bo", L.bo));
    out.push_back(make(pre + "ln1.gamma", L.ln1_gamma));
    out.push_back(make(pre + "ln1.beta", L.ln1_beta));
    out.push_back(make(pre + "ffn.w1", L.ffn_w1));
    out.push_back(make(pre + "ffn.b1", L.ffn_b1));
    out.push_back(make(pre + "ffn.w2", L.ffn_w2));
    out.push_back(make(pre + "ffn.b2", L.ffn_b2));
    out.push_back(make(pre + "ln2.gamma", L.ln2_gamma));
    out.push_back(make(pre + "ln2.beta", L.ln2_beta));
  }
  out.push_back(make("head.w1", p.head_w1));
  out.push_back(make("head.b1", p.head_b1));
  out.push_back(make("head.w2", p.head_w2));
  out.push_back(make("head.b2", p.head_b2));
}

}  // namespace

ModelParams ModelParams::zeros(const EncoderConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.model_dim;
  ModelParams p;
  p.embedding = biclink::zeros(cfg.vocab_size, d);
  p.layers.resize(cfg.num_layers);
  for (auto& L : p.layers) {
    L.wq = biclink::zeros(d, d);
    L.wk = biclink::zeros(d, d);
    L.wv = biclink::zeros(d, d);
    L.wo = biclink::zeros(d, d);
    L.bq = biclink::zeros(1, d);
    L.bk = biclink::zeros(1, d);
    L.bv = biclink::zeros(1, d);
    L.bo = biclink::zeros(1, d);
    L.ln1_gamma = biclink::zeros(1, d);
    L.ln1_beta = biclink::zeros(1, d);
    L.ffn_w1 = biclink::zeros(d, cfg.ffn_dim);
    L.ffn_b1 = biclink::zeros(1, cfg.ffn_dim);
    L.ffn_w2 = biclink::zeros(cfg.ffn_dim, d);
    L.ffn_b2 = biclink::zeros(1, d);
    L.ln2_gamma = biclink::zeros(1, d);
    L.ln2_beta = biclink::zeros(1, d);
  }
  p.head_w1 = biclink::zeros(d, cfg.mlp_hidden);
  p.head_b1 = biclink::zeros(1, cfg.mlp_hidden);
  p.head_w2 = biclink::zeros(cfg.mlp_hidden, 1);
  p.head_b2 = biclink::zeros(1, 1);
  return p;
}

ModelParams ModelParams::initialize(const EncoderConfig& cfg, std::uint64_t seed) {
  ModelParams p = zeros(cfg);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, cfg.init_std);
  auto fill = [&](Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  };
  fill(p.embedding);
  for (auto& L : p.layers) {
    fill(L.wq);
    fill(L.wk);
    fill(L.wv);
    fill(L.wo);
    fill(L.ffn_w1);
    fill(L.ffn_w2);
    L.ln1_gamma = ones(1, cfg.model_dim);
    L.ln2_gamma = ones(1, cfg.model_dim);
  }
  fill(p.head_w1);
  fill(p.head_w2);
  return p;
}

std::vector<NamedTensor> ModelParams::tensors() {
  std::vector<NamedTensor> out;
  visit_tensors(*this, out, [](std::string name, Matrix& m) { return NamedTensor{std::move(name), &m}; });
  return out;
}

std::vector<ConstNamedTensor> ModelParams::tensors() const {
  std::vector<ConstNamedTensor> out;
  visit_tensors(*this, out,
                [](std::string name, const Matrix& m) { return ConstNamedTensor{std::move(name), &m}; });
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += static_cast<std::size_t>(t.value->size());
  return n;
}

bool ModelParams::all_finite() const {
  for (const auto& t : tensors())
    if (!t.value->allFinite()) return false;
  return true;
}

void ModelParams::set_zero() {
  for (auto& t : tensors()) t.value->setZero();
}

void ModelParams::add_scaled(const ModelParams& other, double scale) {
  auto mine = tensors();
  auto theirs = other.tensors();
  for (std::size_t i = 0; i < mine.size(); ++i) *mine[i].value += scale * *theirs[i].value;
}

// ---------------------------------------------------------------------------

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_with_logit(double logit, int label) {
  return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

struct LayerCache {
  Matrix x_in;
  Matrix q, k, v;
  std::vector<Matrix> probs;
  Matrix attn_concat;
  Matrix drop1;
  Matrix x1_hat;
  Eigen::VectorXd inv_std1;
  Matrix x1;
  Matrix h_pre, h_act;
  Matrix drop2;
  Matrix x2_hat;
  Eigen::VectorXd inv_std2;
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  Matrix output;
  Eigen::RowVectorXd head_pre;
  Eigen::RowVectorXd head_act;
};

Matrix layer_norm(const Matrix& x, const Matrix& gamma, const Matrix& beta, double eps,
                  Matrix* x_hat_out, Eigen::VectorXd* inv_std_out) {
  const auto d = static_cast<double>(x.cols());
  Matrix x_hat(x.rows(), x.cols());
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).sum() / d;
    const auto centered = (x.row(i).array() - mean).matrix();
    const double var = centered.squaredNorm() / d;
    inv_std(i) = 1.0 / std::sqrt(var + eps);
    x_hat.row(i) = centered * inv_std(i);
  }
  Matrix y = (x_hat.array().rowwise() * gamma.row(0).array()).matrix();
  y.rowwise() += beta.row(0);
  if (x_hat_out) *x_hat_out = std::move(x_hat);
  if (inv_std_out) *inv_std_out = std::move(inv_std);
  return y;
}

/// dL/dx from dL/dy of y = gamma * x_hat + beta; accumulates dgamma, dbeta.
Matrix layer_norm_backward(const Matrix& dy, const Matrix& x_hat, const Eigen::VectorXd& inv_std,
                           const Matrix& gamma, Matrix& dgamma, Matrix& dbeta) {
  dgamma.row(0) += (dy.array() * x_hat.array()).colwise().sum().matrix();
  dbeta.row(0) += dy.colwise().sum();
  const Matrix dx_hat = (dy.array().rowwise() * gamma.row(0).array()).matrix();
  const auto d = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double mean_dxh = dx_hat.row(i).sum() / d;
    const double mean_dxh_xh = dx_hat.row(i).dot(x_hat.row(i)) / d;
    dx.row(i) = inv_std(i) *
                (dx_hat.row(i).array() - mean_dxh - x_hat.row(i).array() * mean_dxh_xh).matrix();
  }
  return dx;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Matrix mask(rows, cols);
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? scale : 0.0;
  return mask;
}

/// Row-wise softmax of scaled scores; masked key columns get weight 0.
Matrix masked_softmax(const Matrix& scores, const std::vector<bool>& mask) {
  Matrix p = Matrix::Zero(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    double max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < scores.cols(); ++j)
      if (mask.empty() || !mask[static_cast<std::size_t>(j)]) max = std::max(max, scores(i, j));
    double sum = 0.0;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (!mask.empty() && mask[static_cast<std::size_t>(j)]) continue;
      p(i, j) = std::exp(scores(i, j) - max);
      sum += p(i, j);
    }
    p.row(i) /= sum;
  }
  return p;
}

Matrix layer_forward(const Matrix& x, const std::vector<bool>& mask, const LayerParams& p,
                     const EncoderConfig& cfg, Rng* rng, LayerCache* cache) {
  const Eigen::Index L = x.rows();
  const auto dh = static_cast<Eigen::Index>(cfg.head_dim());
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const bool use_dropout = rng != nullptr && cfg.dropout > 0.0;

  Matrix q = x * p.wq;
  q.rowwise() += p.bq.row(0);
  Matrix k = x * p.wk;
  k.rowwise() += p.bk.row(0);
  Matrix v = x * p.wv;
  v.rowwise() += p.bv.row(0);

  Matrix concat(L, x.cols());
  std::vector<Matrix> probs;
  probs.reserve(cfg.num_heads);
  for (std::size_t h = 0; h < cfg.num_heads; ++h) {
    const Eigen::Index off = static_cast<Eigen::Index>(h) * dh;
    const Matrix scores = (q.middleCols(off, dh) * k.middleCols(off, dh).transpose()) * scale;
    Matrix pr = masked_softmax(scores, mask);
    concat.middleCols(off, dh) = pr * v.middleCols(off, dh);
    probs.push_back(std::move(pr));
  }
  Matrix attn = concat * p.wo;
  attn.rowwise() += p.bo.row(0);
  Matrix drop1;
  if (use_dropout) {
    drop1 = dropout_mask(attn.rows(), attn.cols(), cfg.dropout, *rng);
    attn = attn.cwiseProduct(drop1);
  }
  Matrix x1_hat;
  Eigen::VectorXd inv1;
  Matrix x1 = layer_norm(x + attn, p.ln1_gamma, p.ln1_beta, cfg.layer_norm_eps, &x1_hat, &inv1);

  Matrix h_pre = x1 * p.ffn_w1;
  h_pre.rowwise() += p.ffn_b1.row(0);
  Matrix h_act = h_pre.unaryExpr([](double t) { return gelu(t); });
  Matrix ffn = h_act * p.ffn_w2;
  ffn.rowwise() += p.ffn_b2.row(0);
  Matrix drop2;
  if (use_dropout) {
    drop2 = dropout_mask(ffn.rows(), ffn.cols(), cfg.dropout, *rng);
    ffn = ffn.cwiseProduct(drop2);
  }
  Matrix x2_hat;
  Eigen::VectorXd inv2;
  Matrix out = layer_norm(x1 + ffn, p.ln2_gamma, p.ln2_beta, cfg.layer_norm_eps, &x2_hat, &inv2);

  if (!out.allFinite()) throw std::runtime_error("non-finite activation in encoder layer");

  if (cache) {
    cache->x_in = x;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->probs = std::move(probs);
    cache->attn_concat = std::move(concat);
    cache->drop1 = std::move(drop1);
    cache->x1_hat = std::move(x1_hat);
    cache->inv_std1 = std::move(inv1);
    cache->x1 = std::move(x1);
    cache->h_pre = std::move(h_pre);
    cache->h_act = std::move(h_act);
    cache->drop2 = std::move(drop2);
    cache->x2_hat = std::move(x2_hat);
    cache->inv_std2 = std::move(inv2);
  }
  return out;
}

/// Backward through one layer; returns dL/dx_in and accumulates parameter
/// gradients into `g`.
Matrix layer_backward(const Matrix& d_out, const LayerCache& c, const LayerParams& p,
                      const EncoderConfig& cfg, LayerParams& g) {
  const auto dh = static_cast<Eigen::Index>(cfg.head_dim());
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // x2 = LN2(x1 + ffn * drop2)
  const Matrix d_r2 = layer_norm_backward(d_out, c.x2_hat, c.inv_std2, p.ln2_gamma, g.ln2_gamma, g.ln2_beta);
  Matrix d_x1 = d_r2;
  Matrix d_ffn = c.drop2.size() ? Matrix(d_r2.cwiseProduct(c.drop2)) : d_r2;
  g.ffn_w2.noalias() += c.h_act.transpose() * d_ffn;
  g.ffn_b2.row(0) += d_ffn.colwise().sum();
  Matrix d_h = d_ffn * p.ffn_w2.transpose();
  d_h.array() *= c.h_pre.unaryExpr([](double t) { return gelu_grad(t); }).array();
  g.ffn_w1.noalias() += c.x1.transpose() * d_h;
  g.ffn_b1.row(0) += d_h.colwise().sum();
  d_x1.noalias() += d_h * p.ffn_w1.transpose();

  // x1 = LN1(x + attn * drop1)
  const Matrix d_r1 = layer_norm_backward(d_x1, c.x1_hat, c.inv_std1, p.ln1_gamma, g.ln1_gamma, g.ln1_beta);
  Matrix d_x = d_r1;
  Matrix d_attn = c.drop1.size() ? Matrix(d_r1.cwiseProduct(c.drop1)) : d_r1;
  g.wo.noalias() += c.attn_concat.transpose() * d_attn;
  g.bo.row(0) += d_attn.colwise().sum();
  const Matrix d_concat = d_attn * p.wo.transpose();

  Matrix d_q(c.q.rows(), c.q.cols()), d_k(c.k.rows(), c.k.cols()), d_v(c.v.rows(), c.v.cols());
  for (std::size_t h = 0; h < cfg.num_heads; ++h) {
    const Eigen::Index off = static_cast<Eigen::Index>(h) * dh;
    const Matrix& pr = c.probs[h];
    const auto d_oh = d_concat.middleCols(off, dh);
    d_v.middleCols(off, dh) = pr.transpose() * d_oh;
    const Matrix d_p = d_oh * c.v.middleCols(off, dh).transpose();
    const Eigen::VectorXd row_dot = (d_p.array() * pr.array()).rowwise().sum();
    Matrix d_s = (pr.array() * (d_p.array().colwise() - row_dot.array())).matrix() * scale;
    d_q.middleCols(off, dh) = d_s * c.k.middleCols(off, dh);
    d_k.middleCols(off, dh) = d_s.transpose() * c.q.middleCols(off, dh);
  }
  g.wq.noalias() += c.x_in.transpose() * d_q;
  g.bq.row(0) += d_q.colwise().sum();
  g.wk.noalias() += c.x_in.transpose() * d_k;
  g.bk.row(0) += d_k.colwise().sum();
  g.wv.noalias() += c.x_in.transpose() * d_v;
  g.bv.row(0) += d_v.colwise().sum();
  d_x.noalias() += d_q * p.wq.transpose();
  d_x.noalias() += d_k * p.wk.transpose();
  d_x.noalias() += d_v * p.wv.transpose();
  return d_x;
}

std::vector<std::uint32_t> strip_padding(std::span<const std::uint32_t> tokens) {
  std::vector<std::uint32_t> out;
  out.reserve(tokens.size());
  for (auto t : tokens)
    if (t != Vocabulary::kPad) out.push_back(t);
  return out;
}

std::vector<bool> padding_mask(std::span<const std::uint32_t> tokens) {
  std::vector<bool> mask(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) mask[i] = tokens[i] == Vocabulary::kPad;
  return mask;
}

}  // namespace

// ---------------------------------------------------------------------------

Matrix embed(std::span<const std::uint32_t> tokens, const ModelParams& params) {
  Matrix out(static_cast<Eigen::Index>(tokens.size()), params.embedding.cols());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= params.embedding.rows())
      throw std::out_of_range("token id " + std::to_string(tokens[i]) + " outside the vocabulary");
    out.row(static_cast<Eigen::Index>(i)) = params.embedding.row(tokens[i]);
  }
  return out;
}

Matrix encoder_forward(const Matrix& embeddings, const std::vector<bool>& pad_mask,
                       const ModelParams& params, const EncoderConfig& cfg) {
  if (!pad_mask.empty() && pad_mask.size() != static_cast<std::size_t>(embeddings.rows()))
    throw std::invalid_argument("pad mask length differs from the sequence length");
  Matrix x = embeddings;
  for (const auto& layer : params.layers) x = layer_forward(x, pad_mask, layer, cfg, nullptr, nullptr);
  return x;
}

std::vector<Matrix> first_layer_attention(const Matrix& embeddings, const std::vector<bool>& pad_mask,
                                          const ModelParams& params, const EncoderConfig& cfg) {
  LayerCache cache;
  layer_forward(embeddings, pad_mask, params.layers.at(0), cfg, nullptr, &cache);
  return cache.probs;
}

double classify_logit(const Eigen::Ref<const Eigen::RowVectorXd>& cls, const ModelParams& params) {
  Eigen::RowVectorXd hidden = cls * params.head_w1 + params.head_b1.row(0);
  hidden = hidden.unaryExpr([](double t) { return gelu(t); });
  return (hidden * params.head_w2)(0, 0) + params.head_b2(0, 0);
}

double classify(const Eigen::Ref<const Eigen::RowVectorXd>& cls, const ModelParams& params) {
  return sigmoid(classify_logit(cls, params));
}

double sequence_logit(std::span<const std::uint32_t> tokens, const ModelParams& params,
                      const EncoderConfig& cfg) {
  const Matrix hidden = encoder_forward(embed(tokens, params), padding_mask(tokens), params, cfg);
  return classify_logit(hidden.row(0), params);
}

double compact_logit(std::span<const std::uint32_t> tokens, const ModelParams& params,
                     const EncoderConfig& cfg) {
  const auto compact = strip_padding(tokens);
  const Matrix hidden = encoder_forward(embed(compact, params), {}, params, cfg);
  return classify_logit(hidden.row(0), params);
}

double accumulate_gradients(std::span<const std::uint32_t> tokens, int label,
                            const ModelParams& params, const EncoderConfig& cfg, double weight,
                            ModelParams& grads, Rng* dropout_rng) {
  const auto compact = strip_padding(tokens);
  ForwardCache cache;
  cache.layers.resize(params.layers.size());
  Matrix x = embed(compact, params);
  for (std::size_t l = 0; l < params.layers.size(); ++l)
    x = layer_forward(x, {}, params.layers[l], cfg, dropout_rng, &cache.layers[l]);

  const Eigen::RowVectorXd cls = x.row(0);
  const Eigen::RowVectorXd head_pre = cls * params.head_w1 + params.head_b1.row(0);
  const Eigen::RowVectorXd head_act = head_pre.unaryExpr([](double t) { return gelu(t); });
  const double logit = (head_act * params.head_w2)(0, 0) + params.head_b2(0, 0);
  const double loss = bce_with_logit(logit, label);
  if (!std::isfinite(loss)) throw std::runtime_error("non-finite loss");

  const double d_logit = weight * (sigmoid(logit) - label);
  grads.head_w2.col(0) += d_logit * head_act.transpose();
  grads.head_b2(0, 0) += d_logit;
  Eigen::RowVectorXd d_hidden = d_logit * params.head_w2.col(0).transpose();
  d_hidden.array() *= head_pre.unaryExpr([](double t) { return gelu_grad(t); }).array();
  grads.head_w1.noalias() += cls.transpose() * d_hidden;
  grads.head_b1.row(0) += d_hidden;

  Matrix d_x = Matrix::Zero(x.rows(), x.cols());
  d_x.row(0) = d_hidden * params.head_w1.transpose();
  for (std::size_t l = params.layers.size(); l-- > 0;)
    d_x = layer_backward(d_x, cache.layers[l], params.layers[l], cfg, grads.layers[l]);

  for (std::size_t i = 0; i < compact.size(); ++i)
    grads.embedding.row(compact[i]) += d_x.row(static_cast<Eigen::Index>(i));
  return loss;
}

}  // namespace biclink
