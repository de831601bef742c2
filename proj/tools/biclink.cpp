#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "biclink/context.hpp"
#include "biclink/pipeline.hpp"

namespace {

struct Flags {
  std::optional<std::string> config, data, out_dir, input, removed, test, concepts, samples, checkpoint,
      train_log, predictions, report;
  std::optional<std::string> l1, u1, l2, u2;
  std::optional<double> k, fraction, lr, dropout, threshold;
  std::optional<std::string> profile, method;
  std::optional<std::size_t> model_dim, num_layers, num_heads, ffn_dim, mlp_hidden, epochs, batch, svd_rank;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool verbose = false;
};

void add_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "JSON config file; flags override its values");
  cmd.add_option("--seed", f.seed, "root seed");
  cmd.add_option("--threads", f.threads, "worker threads (1 = bit-reproducible)");
  cmd.add_option("--out-dir", f.out_dir, "directory for default artifact paths");
  cmd.add_option("--data", f.data, "original edge list (split)");
  cmd.add_option("--input", f.input, "input context edge list");
  cmd.add_option("--removed", f.removed, "removed edges file");
  cmd.add_option("--test", f.test, "labeled test pairs");
  cmd.add_option("--concepts", f.concepts, "concepts file");
  cmd.add_option("--samples", f.samples, "samples file");
  cmd.add_option("--checkpoint", f.checkpoint, "model checkpoint");
  cmd.add_option("--train-log", f.train_log, "training log CSV");
  cmd.add_option("--predictions", f.predictions, "predictions TSV");
  cmd.add_option("--report", f.report, "report JSON");
  cmd.add_option("--l1", f.l1, "minimum extent size");
  cmd.add_option("--u1", f.u1, "maximum extent size or inf");
  cmd.add_option("--l2", f.l2, "minimum intent size");
  cmd.add_option("--u2", f.u2, "maximum intent size or inf");
  cmd.add_option("-k,--k", f.k, "fraction of members replaced in a distractor");
  cmd.add_option("--fraction", f.fraction, "fraction of edges held out");
  cmd.add_option("--profile", f.profile, "encoder size: desk, paper or custom")
      ->check(CLI::IsMember({"desk", "paper", "custom"}));
  cmd.add_option("--model-dim", f.model_dim, "custom profile: model width");
  cmd.add_option("--layers", f.num_layers, "custom profile: encoder layers");
  cmd.add_option("--heads", f.num_heads, "custom profile: attention heads");
  cmd.add_option("--ffn-dim", f.ffn_dim, "custom profile: feed-forward width");
  cmd.add_option("--mlp-hidden", f.mlp_hidden, "custom profile: classifier hidden width");
  cmd.add_option("--dropout", f.dropout, "dropout rate");
  cmd.add_option("--epochs", f.epochs, "training epochs");
  cmd.add_option("--batch", f.batch, "mini-batch size");
  cmd.add_option("--lr", f.lr, "learning rate");
  cmd.add_option("--method", f.method, "scorer: cn, jc, aa, ra, svd or model")
      ->check(CLI::IsMember({"cn", "jc", "aa", "ra", "svd", "model"}));
  cmd.add_option("--svd-rank", f.svd_rank, "MF-SVD rank (default min(64, |G|, |M|))");
  cmd.add_option("--threshold", f.threshold, "decision threshold for F1");
  cmd.add_flag("-v,--verbose", f.verbose, "print per-epoch loss");
}

biclink::RunConfig resolve(const Flags& f) {
  biclink::RunConfig cfg = f.config ? biclink::load_run_config(*f.config) : biclink::RunConfig{};
  auto set = [](auto& dst, const auto& src) {
    if (src) dst = *src;
  };
  set(cfg.data, f.data);
  set(cfg.out_dir, f.out_dir);
  set(cfg.input, f.input);
  set(cfg.removed, f.removed);
  set(cfg.test, f.test);
  set(cfg.concepts, f.concepts);
  set(cfg.samples, f.samples);
  set(cfg.checkpoint, f.checkpoint);
  set(cfg.train_log, f.train_log);
  set(cfg.predictions, f.predictions);
  set(cfg.report, f.report);
  if (f.l1) cfg.l1 = biclink::parse_bound(*f.l1, false);
  if (f.u1) cfg.u1 = biclink::parse_bound(*f.u1, true);
  if (f.l2) cfg.l2 = biclink::parse_bound(*f.l2, false);
  if (f.u2) cfg.u2 = biclink::parse_bound(*f.u2, true);
  set(cfg.k, f.k);
  set(cfg.fraction, f.fraction);
  set(cfg.profile, f.profile);
  set(cfg.model_dim, f.model_dim);
  set(cfg.num_layers, f.num_layers);
  set(cfg.num_heads, f.num_heads);
  set(cfg.ffn_dim, f.ffn_dim);
  set(cfg.mlp_hidden, f.mlp_hidden);
  set(cfg.dropout, f.dropout);
  set(cfg.epochs, f.epochs);
  set(cfg.batch, f.batch);
  set(cfg.lr, f.lr);
  set(cfg.seed, f.seed);
  set(cfg.threads, f.threads);
  set(cfg.method, f.method);
  if (f.svd_rank) cfg.svd_rank = *f.svd_rank;
  if (f.threshold) cfg.threshold = *f.threshold;
  if (f.verbose) cfg.verbose = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link prediction in bipartite graphs from formal concepts"};
  app.require_subcommand(1);
  Flags flags;
  std::string chosen;
  for (const char* name : {"split", "mine", "prepare", "train", "evaluate", "pipeline"}) {
    static const std::map<std::string, std::string> help = {
        {"split", "hold out edges and build the labeled test set"},
        {"mine", "extract size-bounded formal concepts"},
        {"prepare", "generate padded training samples"},
        {"train", "train the encoder classifier"},
        {"evaluate", "score the test set with a model or baseline"},
        {"pipeline", "run split, mine, prepare, train and evaluate"}};
    auto* cmd = app.add_subcommand(name, help.at(name));
    add_flags(*cmd, flags);
    cmd->callback([&chosen, name] { chosen = name; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const biclink::RunConfig cfg = resolve(flags);
    if (chosen == "split") {
      const auto s = biclink::cmd_split(cfg, std::cerr);
      std::cerr << "split: " << s.input_edges << " input edges, " << s.removed_edges << " held out, "
                << s.test_negatives << " test negatives\n";
    } else if (chosen == "mine") {
      std::cerr << "mine: " << biclink::cmd_mine(cfg, std::cerr) << " concepts\n";
    } else if (chosen == "prepare") {
      std::cerr << "prepare: " << biclink::cmd_prepare(cfg, std::cerr) << " samples\n";
    } else if (chosen == "train") {
      biclink::cmd_train(cfg, std::cerr);
    } else if (chosen == "evaluate") {
      biclink::cmd_evaluate(cfg, std::cerr);
    } else {
      biclink::cmd_pipeline(cfg, std::cerr);
    }
  } catch (const biclink::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
