#include "biclink/pipeline.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "biclink/baselines.hpp"
#include "biclink/checkpoint.hpp"
#include "biclink/samples.hpp"
#include "biclink/trainer.hpp"

namespace biclink {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::filesystem::path RunConfig::resolve(const fs::path& given, const std::string& name) const {
  return given.empty() ? out_dir / name : given;
}

std::filesystem::path RunConfig::predictions_path() const {
  return resolve(predictions, "predictions_" + method + ".tsv");
}

std::filesystem::path RunConfig::report_path() const {
  return resolve(report, "report_" + method + ".json");
}

SizeBounds RunConfig::bounds() const {
  if (!l1 || !u1 || !l2 || !u2) throw std::invalid_argument("all four bounds --l1 --u1 --l2 --u2 are required");
  SizeBounds b{*l1, *u1, *l2, *u2};
  b.validate();
  return b;
}

EncoderConfig RunConfig::encoder_config(std::size_t vocab_size, std::size_t max_seq_len) const {
  EncoderConfig e;
  if (profile == "desk") {
    e = EncoderConfig::desk();
  } else if (profile == "paper") {
    e = EncoderConfig::paper();
  } else if (profile == "custom") {
    e.model_dim = model_dim;
    e.num_layers = num_layers;
    e.num_heads = num_heads;
    e.ffn_dim = ffn_dim;
    e.mlp_hidden = mlp_hidden;
  } else {
    throw std::invalid_argument("unknown profile: " + profile);
  }
  e.dropout = dropout;
  e.vocab_size = vocab_size;
  e.max_seq_len = max_seq_len;
  e.seed = seed;
  e.validate();
  return e;
}

std::size_t parse_bound(const std::string& text, bool allow_inf) {
  if (text == "inf") {
    if (!allow_inf) throw std::invalid_argument("lower bounds cannot be inf");
    return SizeBounds::kUnbounded;
  }
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || text.empty() || text.front() == '-')
    throw std::invalid_argument("bad bound: " + text);
  return static_cast<std::size_t>(v);
}

namespace {

std::size_t bound_from_json(const ojson& v, bool allow_inf) {
  if (v.is_string()) return parse_bound(v.get<std::string>(), allow_inf);
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  throw std::invalid_argument("bounds must be non-negative integers or \"inf\"");
}

ojson bound_json(const std::optional<std::size_t>& b) {
  if (!b) return nullptr;
  return *b == SizeBounds::kUnbounded ? ojson("inf") : ojson(*b);
}

}  // namespace

void apply_run_config_json(RunConfig& cfg, const std::string& json_text) {
  const ojson j = ojson::parse(json_text);
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "data") cfg.data = v.get<std::string>();
    else if (key == "out_dir") cfg.out_dir = v.get<std::string>();
    else if (key == "input") cfg.input = v.get<std::string>();
    else if (key == "removed") cfg.removed = v.get<std::string>();
    else if (key == "test") cfg.test = v.get<std::string>();
    else if (key == "concepts") cfg.concepts = v.get<std::string>();
    else if (key == "samples") cfg.samples = v.get<std::string>();
    else if (key == "checkpoint") cfg.checkpoint = v.get<std::string>();
    else if (key == "train_log") cfg.train_log = v.get<std::string>();
    else if (key == "predictions") cfg.predictions = v.get<std::string>();
    else if (key == "report") cfg.report = v.get<std::string>();
    else if (key == "l1") cfg.l1 = bound_from_json(v, false);
    else if (key == "u1") cfg.u1 = bound_from_json(v, true);
    else if (key == "l2") cfg.l2 = bound_from_json(v, false);
    else if (key == "u2") cfg.u2 = bound_from_json(v, true);
    else if (key == "k") cfg.k = v.get<double>();
    else if (key == "fraction") cfg.fraction = v.get<double>();
    else if (key == "profile") cfg.profile = v.get<std::string>();
    else if (key == "model_dim") cfg.model_dim = v.get<std::size_t>();
    else if (key == "num_layers") cfg.num_layers = v.get<std::size_t>();
    else if (key == "num_heads") cfg.num_heads = v.get<std::size_t>();
    else if (key == "ffn_dim") cfg.ffn_dim = v.get<std::size_t>();
    else if (key == "mlp_hidden") cfg.mlp_hidden = v.get<std::size_t>();
    else if (key == "dropout") cfg.dropout = v.get<double>();
    else if (key == "epochs") cfg.epochs = v.get<std::size_t>();
    else if (key == "batch") cfg.batch = v.get<std::size_t>();
    else if (key == "lr") cfg.lr = v.get<double>();
    else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
    else if (key == "threads") cfg.threads = v.get<unsigned>();
    else if (key == "method") cfg.method = v.get<std::string>();
    else if (key == "svd_rank") cfg.svd_rank = v.get<std::size_t>();
    else if (key == "threshold") cfg.threshold = v.get<double>();
    else if (key == "verbose") cfg.verbose = v.get<bool>();
    else throw std::invalid_argument("unknown config key: " + key);
  }
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  RunConfig cfg;
  apply_run_config_json(cfg, text);
  return cfg;
}

std::string effective_config_json(const RunConfig& cfg) {
  ojson j;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["fraction"] = cfg.fraction;
  j["l1"] = bound_json(cfg.l1);
  j["u1"] = bound_json(cfg.u1);
  j["l2"] = bound_json(cfg.l2);
  j["u2"] = bound_json(cfg.u2);
  j["k"] = cfg.k;
  j["profile"] = cfg.profile;
  if (cfg.profile == "custom") {
    j["model_dim"] = cfg.model_dim;
    j["num_layers"] = cfg.num_layers;
    j["num_heads"] = cfg.num_heads;
    j["ffn_dim"] = cfg.ffn_dim;
    j["mlp_hidden"] = cfg.mlp_hidden;
  }
  j["dropout"] = cfg.dropout;
  j["epochs"] = cfg.epochs;
  j["batch"] = cfg.batch;
  j["lr"] = cfg.lr;
  return j.dump();
}

namespace {

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw std::runtime_error("missing input file: " + p.string());
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, mode);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p, std::ios::openmode mode = std::ios::in) {
  require_file(p);
  std::ifstream in(p, mode);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return in;
}

void finish(std::ofstream& out, const fs::path& p) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + p.string());
}

void warn_all(std::ostream& log, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) log << "warning: " << w << '\n';
}

std::string metadata(const RunConfig& cfg, ojson extra = ojson::object()) {
  ojson j;
  j["seed"] = cfg.seed;
  j["config"] = ojson::parse(effective_config_json(cfg));
  for (auto& [key, v] : extra.items()) j[key] = v;
  return j.dump();
}

std::vector<Incidence> map_edges(const FormalContext& from, const FormalContext& to,
                                 std::span<const Incidence> edges) {
  std::vector<Incidence> out;
  out.reserve(edges.size());
  for (const auto& e : edges)
    out.push_back({to.object_index(from.objects()[e.object]), to.attribute_index(from.attributes()[e.attribute])});
  return out;
}

}  // namespace

FormalContext load_downstream_context(const RunConfig& cfg) {
  const fs::path input = cfg.input_path();
  require_file(input);
  std::vector<EdgeName> extra;
  const fs::path removed = cfg.removed_path();
  if (fs::exists(removed)) {
    std::ifstream in(removed);
    extra = read_edge_list(in);
  }
  return load_context_with_nodes(input, extra);
}

SplitSummary cmd_split(const RunConfig& cfg, std::ostream& log) {
  if (cfg.data.empty()) throw std::invalid_argument("split needs --data");
  const FormalContext original = load_context_file(cfg.data);
  const SplitResult split = split_input_target(original, cfg.fraction, derive_seed(cfg.seed, "split"));

  const fs::path input = cfg.input_path(), removed = cfg.removed_path();
  {
    auto out = open_out(input);
    write_context(out, split.input_context);
    finish(out, input);
  }
  {
    auto out = open_out(removed);
    write_edges(out, split.input_context, split.removed_edges);
    finish(out, removed);
  }

  // The context negatives are drawn later from the context as downstream
  // stages reload it, so replay that draw here to keep them out of the test set.
  const FormalContext downstream = load_downstream_context(cfg);
  const ContextSamples ctx_samples = generate_context_samples(downstream, derive_seed(cfg.seed, "context-negatives"));
  const auto context_negatives = map_edges(downstream, split.input_context, as_incidences(ctx_samples.negatives));
  const TestSet test = generate_test_set(split, context_negatives, derive_seed(cfg.seed, "test-negatives"));
  warn_all(log, test.warnings);

  const fs::path test_path = cfg.test_path();
  {
    auto out = open_out(test_path);
    write_test_set(out, split.input_context, test);
    finish(out, test_path);
  }
  SplitSummary s{split.input_context.num_incidences(), split.removed_edges.size(), test.negatives.size()};
  const fs::path meta = cfg.split_meta_path();
  {
    auto out = open_out(meta);
    out << metadata(cfg, {{"input_edges", s.input_edges},
                          {"removed_edges", s.removed_edges},
                          {"test_positives", test.positives.size()},
                          {"test_negatives", s.test_negatives},
                          {"warnings", test.warnings}})
        << '\n';
    finish(out, meta);
  }
  return s;
}

std::size_t cmd_mine(const RunConfig& cfg, std::ostream& log) {
  const SizeBounds bounds = cfg.bounds();
  const FormalContext ctx = load_downstream_context(cfg);
  const ConceptSet concepts = mine_significant(ctx, bounds, {cfg.threads});
  if (concepts.concepts.empty()) log << "warning: no concept satisfies the size bounds\n";
  const fs::path path = cfg.concepts_path();
  auto out = open_out(path);
  write_concepts(out, ctx, concepts, metadata(cfg));
  finish(out, path);
  return concepts.concepts.size();
}

std::size_t cmd_prepare(const RunConfig& cfg, std::ostream& log) {
  const FormalContext ctx = load_downstream_context(cfg);
  ConceptSet concepts;
  {
    auto in = open_in(cfg.concepts_path());
    concepts = read_concepts(in, ctx);
  }
  const SampleSet set = prepare_samples(concepts, ctx, cfg.k, cfg.seed);
  warn_all(log, set.intermediate.warnings);
  warn_all(log, set.concept_samples.warnings);
  warn_all(log, set.context_samples.warnings);
  if (set.concept_samples.unbalanced > 0)
    log << "warning: " << set.concept_samples.unbalanced << " concept samples have no negative partner\n";

  const fs::path path = cfg.samples_path();
  auto out = open_out(path);
  write_samples(out, set.padded, Vocabulary::from_context(ctx),
                metadata(cfg, {{"concept_positives", set.concept_samples.positives.size()},
                               {"concept_negatives", set.concept_samples.negatives.size()},
                               {"context_positives", set.context_samples.positives.size()},
                               {"context_negatives", set.context_samples.negatives.size()},
                               {"unbalanced", set.concept_samples.unbalanced}}));
  finish(out, path);
  return set.padded.samples.size();
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  SampleFile file;
  {
    auto in = open_in(cfg.samples_path());
    file = read_samples(in);
  }
  const EncoderConfig enc = cfg.encoder_config(file.vocab.size(), file.l_ext + file.l_int + 2);

  const fs::path log_path = cfg.train_log_path();
  auto csv = open_out(log_path);
  csv << "epoch,mean_loss,seconds\n";
  csv << std::setprecision(10);

  TrainOptions opts;
  opts.epochs = cfg.epochs;
  opts.batch_size = cfg.batch;
  opts.adam.lr = cfg.lr;
  opts.threads = cfg.threads;
  opts.on_epoch = [&](const EpochStats& s) {
    csv << s.epoch << ',' << s.mean_loss << ',' << s.seconds << '\n';
    if (cfg.verbose) log << "epoch " << s.epoch << " loss " << s.mean_loss << '\n';
  };
  TrainResult result = train(file.samples, enc, opts);
  finish(csv, log_path);

  LinkModel model{enc, std::move(result.params), file.vocab, file.l_ext, file.l_int};
  const fs::path path = cfg.checkpoint_path();
  auto out = open_out(path, std::ios::binary);
  write_checkpoint(out, model, metadata(cfg, {{"epochs_run", result.report.epochs_run}}));
  finish(out, path);
}

EvalReport cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  std::vector<LabeledEdge> test;
  {
    auto in = open_in(cfg.test_path());
    test = read_test_set(in);
  }
  std::vector<ScoredPair> pairs;
  pairs.reserve(test.size());
  double threshold = 0.5;
  ojson extra;

  if (cfg.method == "model") {
    const LinkModel model = read_checkpoint(cfg.checkpoint_path());
    for (const auto& t : test) {
      const std::string o[] = {t.object};
      const std::string a[] = {t.attribute};
      pairs.push_back({t.object, t.attribute, predict(model, o, a), t.label});
    }
  } else {
    const FormalContext ctx = load_downstream_context(cfg);
    if (cfg.method == "svd") {
      const std::size_t rank = cfg.svd_rank.value_or(
          std::min<std::size_t>(64, std::min(ctx.num_objects(), ctx.num_attributes())));
      const SvdScorer scorer(ctx, rank);
      extra["svd_rank"] = rank;
      for (const auto& t : test)
        pairs.push_back({t.object, t.attribute,
                         scorer.score(ctx.object_index(t.object), ctx.attribute_index(t.attribute)), t.label});
    } else {
      const Heuristic h = parse_heuristic(cfg.method);
      for (const auto& t : test)
        pairs.push_back({t.object, t.attribute,
                         score_heuristic(ctx, ctx.object_index(t.object), ctx.attribute_index(t.attribute), h),
                         t.label});
    }
    threshold = median_threshold(pairs);
  }
  if (cfg.threshold) threshold = *cfg.threshold;

  const EvalReport report = compute_metrics(pairs, threshold);
  const fs::path pred = cfg.predictions_path();
  {
    auto out = open_out(pred);
    write_predictions(out, pairs);
    finish(out, pred);
  }
  const fs::path rep = cfg.report_path();
  {
    auto out = open_out(rep);
    ojson meta = ojson::parse(metadata(cfg));
    for (auto& [key, v] : extra.items()) meta[key] = v;
    out << report_to_json(report, cfg.method, meta.dump()) << '\n';
    finish(out, rep);
  }
  log << cfg.method << ": f1 " << report.f1 << " auc " << report.auc << " aupr " << report.aupr << '\n';
  return report;
}

EvalReport cmd_pipeline(const RunConfig& cfg, std::ostream& log) {
  cfg.bounds();
  cmd_split(cfg, log);
  cmd_mine(cfg, log);
  cmd_prepare(cfg, log);
  if (cfg.method == "model") cmd_train(cfg, log);
  return cmd_evaluate(cfg, log);
}

}  // namespace biclink
