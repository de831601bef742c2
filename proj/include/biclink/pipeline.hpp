#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "biclink/encoder.hpp"
#include "biclink/metrics.hpp"
#include "biclink/miner.hpp"

namespace biclink {

/// Parameters shared by every subcommand. Empty paths resolve to default file
/// names inside out_dir.
struct RunConfig {
  std::filesystem::path data;  // original edge list, read by split
  std::filesystem::path out_dir = ".";
  std::filesystem::path input;       // input.tsv
  std::filesystem::path removed;     // removed.tsv
  std::filesystem::path test;        // test.tsv
  std::filesystem::path concepts;    // concepts.tsv
  std::filesystem::path samples;     // samples.jsonl
  std::filesystem::path checkpoint;  // model.ckpt
  std::filesystem::path train_log;   // train_log.csv
  std::filesystem::path predictions; // predictions_<method>.tsv
  std::filesystem::path report;      // report_<method>.json

  std::optional<std::size_t> l1, u1, l2, u2;
  double k = 0.5;
  double fraction = 0.1;
  std::string profile = "desk";  // desk | paper | custom
  std::size_t model_dim = 64;
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t ffn_dim = 128;
  std::size_t mlp_hidden = 64;
  double dropout = 0.1;
  std::size_t epochs = 180;
  std::size_t batch = 24;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string method = "model";  // cn | jc | aa | ra | svd | model
  std::optional<std::size_t> svd_rank;
  std::optional<double> threshold;
  bool verbose = false;

  std::filesystem::path resolve(const std::filesystem::path& given, const std::string& name) const;
  std::filesystem::path input_path() const { return resolve(input, "input.tsv"); }
  std::filesystem::path removed_path() const { return resolve(removed, "removed.tsv"); }
  std::filesystem::path test_path() const { return resolve(test, "test.tsv"); }
  std::filesystem::path split_meta_path() const { return resolve({}, "split.meta.json"); }
  std::filesystem::path concepts_path() const { return resolve(concepts, "concepts.tsv"); }
  std::filesystem::path samples_path() const { return resolve(samples, "samples.jsonl"); }
  std::filesystem::path checkpoint_path() const { return resolve(checkpoint, "model.ckpt"); }
  std::filesystem::path train_log_path() const { return resolve(train_log, "train_log.csv"); }
  std::filesystem::path predictions_path() const;
  std::filesystem::path report_path() const;

  /// Throws unless all four bounds are set and consistent.
  SizeBounds bounds() const;
  EncoderConfig encoder_config(std::size_t vocab_size, std::size_t max_seq_len) const;
};

/// Reads a JSON object whose keys are RunConfig field names. Unknown keys are
/// errors. Upper bounds may be the string "inf".
RunConfig load_run_config(const std::filesystem::path& path);
void apply_run_config_json(RunConfig& cfg, const std::string& json_text);

/// Parses a size bound; "inf" means unbounded when allow_inf is set.
std::size_t parse_bound(const std::string& text, bool allow_inf);

/// The non-path parameters, echoed into every artifact's metadata.
std::string effective_config_json(const RunConfig& cfg);

struct SplitSummary {
  std::size_t input_edges = 0;
  std::size_t removed_edges = 0;
  std::size_t test_negatives = 0;
};

/// Each command reads its inputs, writes its outputs and throws on any error.
/// Warnings go to `log`.
SplitSummary cmd_split(const RunConfig& cfg, std::ostream& log);
std::size_t cmd_mine(const RunConfig& cfg, std::ostream& log);
std::size_t cmd_prepare(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
EvalReport cmd_evaluate(const RunConfig& cfg, std::ostream& log);
/// split, mine, prepare, train, evaluate.
EvalReport cmd_pipeline(const RunConfig& cfg, std::ostream& log);

/// The context downstream stages see: the input edges plus isolated nodes for
/// every node that occurs only among the removed edges.
FormalContext load_downstream_context(const RunConfig& cfg);

}  // namespace biclink
