#include "biclink/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace biclink {

Adam::Adam(const EncoderConfig& cfg, AdamSettings settings)
    : settings_(settings), m_(ModelParams::zeros(cfg)), v_(ModelParams::zeros(cfg)) {}

void Adam::step(ModelParams& params, const ModelParams& grads) {
  ++t_;
  const double b1 = settings_.beta1, b2 = settings_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  auto p = params.tensors();
  auto g = grads.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto& mi = *m[i].value;
    auto& vi = *v[i].value;
    const auto& gi = *g[i].value;
    mi = b1 * mi + (1.0 - b1) * gi;
    vi = b2 * vi + (1.0 - b2) * gi.cwiseProduct(gi);
    p[i].value->array() -=
        settings_.lr * (mi.array() / c1) / ((vi.array() / c2).sqrt() + settings_.eps);
  }
}

namespace {

void validate_samples(std::span<const TokenizedSample> samples, const EncoderConfig& cfg) {
  if (samples.empty()) throw std::invalid_argument("no training samples");
  const std::size_t len = samples.front().tokens.size();
  for (const auto& s : samples) {
    if (s.tokens.size() != len) throw std::invalid_argument("training samples differ in length");
    for (auto t : s.tokens)
      if (t >= cfg.vocab_size) throw std::out_of_range("training sample token outside the vocabulary");
  }
}

}  // namespace

TrainResult train(std::span<const TokenizedSample> samples, const EncoderConfig& cfg,
                  const TrainOptions& options) {
  cfg.validate();
  return train(samples, cfg, options, ModelParams::initialize(cfg, derive_seed(cfg.seed, "init")));
}

TrainResult train(std::span<const TokenizedSample> samples, const EncoderConfig& cfg,
                  const TrainOptions& options, ModelParams initial) {
  cfg.validate();
  validate_samples(samples, cfg);
  if (options.batch_size == 0) throw std::invalid_argument("batch size must be at least 1");

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();

  TrainResult result{std::move(initial), {}};
  ModelParams& params = result.params;
  Adam adam(cfg, options.adam);
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  const std::uint64_t dropout_root = derive_seed(cfg.seed, "dropout");

  const unsigned threads = std::max(1U, options.threads);
  std::vector<ModelParams> grads(threads, ModelParams::zeros(cfg));
  std::vector<double> losses(threads);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto epoch_start = clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;

    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      const double weight = 1.0 / static_cast<double>(end - begin);

      auto run_chunk = [&](unsigned t, std::size_t lo, std::size_t hi) {
        grads[t].set_zero();
        losses[t] = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
          const auto& s = samples[order[i]];
          Rng dropout_rng(derive_seed(dropout_root, epoch, order[i]));
          losses[t] += accumulate_gradients(s.tokens, s.label, params, cfg, weight, grads[t],
                                            cfg.dropout > 0.0 ? &dropout_rng : nullptr);
        }
      };

      const std::size_t n = end - begin;
      const unsigned used = static_cast<unsigned>(std::min<std::size_t>(threads, n));
      if (used <= 1) {
        run_chunk(0, begin, end);
      } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < used; ++t)
          pool.emplace_back(run_chunk, t, begin + n * t / used, begin + n * (t + 1) / used);
      }
      for (unsigned t = 1; t < used; ++t) {
        grads[0].add_scaled(grads[t], 1.0);
        losses[0] += losses[t];
      }
      if (!std::isfinite(losses[0]))
        throw std::runtime_error("non-finite training loss in epoch " + std::to_string(epoch));
      loss_sum += losses[0];
      adam.step(params, grads[0]);
    }
    if (!params.all_finite())
      throw std::runtime_error("non-finite parameters after epoch " + std::to_string(epoch));

    EpochStats stats{epoch, loss_sum / static_cast<double>(samples.size()),
                     std::chrono::duration<double>(clock::now() - epoch_start).count()};
    result.report.epochs.push_back(stats);
    result.report.epochs_run = epoch;
    if (options.on_epoch) options.on_epoch(stats);
  }
  result.report.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
  return result;
}

double predict(const LinkModel& model, std::span<const std::string> objects,
               std::span<const std::string> attributes) {
  std::vector<std::string> x, y;
  x.reserve(objects.size());
  y.reserve(attributes.size());
  for (const auto& o : objects) x.push_back("o:" + o);
  for (const auto& a : attributes) y.push_back("a:" + a);
  const auto tokens = tokenize(x, y, model.vocab, model.l_ext, model.l_int);
  return sigmoid(compact_logit(tokens, model.params, model.config));
}

}  // namespace biclink
