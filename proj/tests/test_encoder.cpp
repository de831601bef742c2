#include <doctest.h>

#include <algorithm>
#include <random>

#include "biclink/encoder.hpp"
#include "gradcheck.hpp"

using namespace biclink;

namespace {

EncoderConfig small_config(std::size_t vocab = 12) {
  EncoderConfig cfg = EncoderConfig::desk();
  cfg.model_dim = 16;
  cfg.num_heads = 4;
  cfg.ffn_dim = 32;
  cfg.mlp_hidden = 16;
  cfg.vocab_size = vocab;
  cfg.max_seq_len = 16;
  cfg.dropout = 0.0;
  cfg.init_std = 0.2;
  cfg.seed = 4;
  return cfg;
}

std::vector<bool> pad_mask(std::span<const std::uint32_t> tokens) {
  std::vector<bool> m;
  for (auto t : tokens) m.push_back(t == 0);
  return m;
}

}  // namespace

TEST_CASE("config validation and profiles") {
  auto cfg = EncoderConfig::paper();
  CHECK(cfg.num_layers == 9);
  CHECK(cfg.num_heads == 12);
  CHECK(cfg.model_dim == 768);
  CHECK(cfg.ffn_dim == 3072);
  CHECK(cfg.mlp_hidden == 512);
  cfg.vocab_size = 10;
  cfg.max_seq_len = 4;
  CHECK_NOTHROW(cfg.validate());
  cfg.num_heads = 7;
  CHECK_THROWS(cfg.validate());
  auto d = small_config();
  d.dropout = 1.0;
  CHECK_THROWS(d.validate());
}

TEST_CASE("no positional parameters exist") {
  const auto cfg = small_config();
  const auto params = ModelParams::initialize(cfg, 1);
  for (const auto& t : params.tensors()) CHECK(t.name.find("pos") == std::string::npos);
  CHECK(params.embedding.rows() == static_cast<Eigen::Index>(cfg.vocab_size));
}

TEST_CASE("embedding is a position-free lookup") {
  const auto cfg = small_config();
  const auto params = ModelParams::initialize(cfg, 1);
  const std::vector<std::uint32_t> a = {1, 5, 5, 7};
  const Matrix e = embed(a, params);
  CHECK(e.rows() == 4);
  CHECK(e.cols() == 16);
  CHECK(e.row(1) == e.row(2));
  const std::vector<std::uint32_t> b = {1, 7, 5, 5};
  const Matrix f = embed(b, params);
  CHECK(f.row(1) == e.row(3));
  CHECK(f.row(0) == e.row(0));
  const std::vector<std::uint32_t> bad = {1, 12};
  CHECK_THROWS(embed(bad, params));
}

TEST_CASE("encoder output shape and attention rows") {
  const auto cfg = small_config();
  const auto params = ModelParams::initialize(cfg, 2);
  const std::vector<std::uint32_t> t = {1, 4, 5, 0, 2, 8, 0};
  const Matrix h = encoder_forward(embed(t, params), pad_mask(t), params, cfg);
  CHECK(h.rows() == 7);
  CHECK(h.cols() == 16);
  for (const auto& a : first_layer_attention(embed(t, params), pad_mask(t), params, cfg)) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      CHECK(a.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(a(r, 3) == 0.0);
      CHECK(a(r, 6) == 0.0);
    }
  }
}

TEST_CASE("permutation and padding invariance") {
  const auto cfg = small_config();
  const auto params = ModelParams::initialize(cfg, 3);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint32_t> t = {1, 3, 4, 5, 0, 2, 8, 9, 0, 0};
    const double base = sequence_logit(t, params, cfg);
    std::shuffle(t.begin() + 1, t.end(), rng);
    CHECK(std::abs(sequence_logit(t, params, cfg) - base) <= 1e-5);
    CHECK(std::abs(compact_logit(t, params, cfg) - base) <= 1e-9);
    t.insert(t.end(), 1 + trial % 5, 0U);
    CHECK(std::abs(sequence_logit(t, params, cfg) - base) <= 1e-6);
  }
}

TEST_CASE("classifier head") {
  const auto cfg = small_config();
  const auto zero = ModelParams::zeros(cfg);
  const Eigen::RowVectorXd v = Eigen::RowVectorXd::Random(16);
  CHECK(classify(v, zero) == 0.5);
  const std::vector<std::uint32_t> t = {1, 3, 2, 9};
  CHECK(sigmoid(sequence_logit(t, zero, cfg)) == 0.5);

  const auto params = ModelParams::initialize(cfg, 5);
  const double p = classify(v * 100.0, params);
  CHECK(p > 0.0);
  CHECK(p < 1.0);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(sigmoid(1.0) < sigmoid(2.0));
}

TEST_CASE("stable cross-entropy") {
  CHECK(bce_with_logit(0.0, 1) == doctest::Approx(std::log(2.0)));
  CHECK(bce_with_logit(1000.0, 1) == doctest::Approx(0.0));
  CHECK(bce_with_logit(-1000.0, 1) == doctest::Approx(1000.0));
  CHECK(bce_with_logit(-1000.0, 0) == doctest::Approx(0.0));
  CHECK(std::isfinite(bce_with_logit(1e6, 0)));
}

TEST_CASE("dropout-free passes are pure") {
  const auto cfg = small_config();
  const auto params = ModelParams::initialize(cfg, 6);
  const std::vector<std::uint32_t> t = {1, 3, 4, 2, 8};
  CHECK(sequence_logit(t, params, cfg) == sequence_logit(t, params, cfg));
  ModelParams g1 = ModelParams::zeros(cfg), g2 = ModelParams::zeros(cfg);
  accumulate_gradients(t, 1, params, cfg, 1.0, g1);
  accumulate_gradients(t, 1, params, cfg, 1.0, g2);
  CHECK(g1.embedding == g2.embedding);
}

TEST_CASE("back-propagation matches finite differences") {
  const auto cfg = testutil::tiny_config();
  const auto params = ModelParams::initialize(cfg, 17);
  const std::vector<std::uint32_t> t = {1, 3, 4, 2, 6, 7};
  for (int label : {0, 1}) {
    const auto r = testutil::gradient_check(t, label, params, cfg);
    CHECK(r.pass_fraction() >= 0.99);
    MESSAGE("checked " << r.checked << " worst relative error " << r.worst);
  }
}

TEST_CASE("gradients ignore padding") {
  const auto cfg = small_config();
  const auto params = ModelParams::initialize(cfg, 7);
  const std::vector<std::uint32_t> a = {1, 3, 2, 8}, b = {1, 3, 0, 0, 2, 8, 0};
  ModelParams ga = ModelParams::zeros(cfg), gb = ModelParams::zeros(cfg);
  const double la = accumulate_gradients(a, 0, params, cfg, 1.0, ga);
  const double lb = accumulate_gradients(b, 0, params, cfg, 1.0, gb);
  CHECK(la == doctest::Approx(lb).epsilon(1e-12));
  CHECK((ga.head_w1 - gb.head_w1).cwiseAbs().maxCoeff() <= 1e-12);
}
