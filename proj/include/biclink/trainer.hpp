#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "biclink/encoder.hpp"
#include "biclink/samples.hpp"

namespace biclink {

struct AdamSettings {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adaptive-moment optimizer over every tensor of a ModelParams.
class Adam {
 public:
  Adam(const EncoderConfig& cfg, AdamSettings settings);
  void step(ModelParams& params, const ModelParams& grads);
  std::size_t steps() const noexcept { return t_; }

 private:
  AdamSettings settings_;
  ModelParams m_;
  ModelParams v_;
  std::size_t t_ = 0;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double seconds = 0.0;
};

struct TrainOptions {
  std::size_t epochs = 180;
  std::size_t batch_size = 24;
  AdamSettings adam;
  /// 1 gives bit-reproducible results; more threads split each batch.
  unsigned threads = 1;
  /// Called after every epoch.
  std::function<void(const EpochStats&)> on_epoch;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t epochs_run = 0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

/// Minimizes mean binary cross-entropy of the [CLS] classifier over shuffled
/// mini-batches. Initialization, shuffling and dropout draw from the "init",
/// "shuffle" and "dropout" sub-streams of cfg.seed.
TrainResult train(std::span<const TokenizedSample> samples, const EncoderConfig& cfg,
                  const TrainOptions& options);

/// Continues from given parameters instead of a fresh initialization.
TrainResult train(std::span<const TokenizedSample> samples, const EncoderConfig& cfg,
                  const TrainOptions& options, ModelParams initial);

/// A trained classifier together with the vocabulary and padded lengths it
/// expects.
struct LinkModel {
  EncoderConfig config;
  ModelParams params;
  Vocabulary vocab;
  std::size_t l_ext = 1;
  std::size_t l_int = 1;
};

/// Probability that every object is linked to every attribute. Members are
/// raw identifiers (no "o:"/"a:" prefix). Unknown members are errors.
double predict(const LinkModel& model, std::span<const std::string> objects,
               std::span<const std::string> attributes);

}  // namespace biclink
