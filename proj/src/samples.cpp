#include "biclink/samples.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

namespace biclink {

using nlohmann::json;

std::size_t replacement_count(double k, std::size_t n) {
  const auto floored = static_cast<std::size_t>(std::floor(k * static_cast<double>(n)));
  return std::min(n, std::max<std::size_t>(1, floored));
}

namespace {

/// One corruption attempt: replace replacement_count(k, |source|) randomly
/// chosen members, each by a uniformly drawn element of the universe other
/// than the member it replaces.
std::optional<IndexSet> corrupt_once(const IndexSet& source, std::size_t universe, double k,
                                     Rng& rng) {
  if (source.empty() || universe < 2) return std::nullopt;
  const std::size_t n = source.size();
  const std::size_t replace = replacement_count(k, n);

  std::vector<std::size_t> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = i;
  for (std::size_t i = 0; i < replace; ++i) std::swap(positions[i], positions[i + uniform_index(rng, n - i)]);
  std::sort(positions.begin(), positions.begin() + static_cast<std::ptrdiff_t>(replace));

  std::set<std::uint32_t> out(source.begin(), source.end());
  for (std::size_t i = 0; i < replace; ++i) {
    const std::uint32_t removed = source[positions[i]];
    auto pick = static_cast<std::uint32_t>(uniform_index(rng, universe - 1));
    if (pick >= removed) ++pick;
    out.erase(removed);
    out.insert(pick);
  }
  return IndexSet(out.begin(), out.end());
}

std::optional<IndexSet> find_distractor(const IndexSet& source, std::size_t universe, double k,
                                        Rng& rng, const std::set<IndexSet>& forbidden_a,
                                        const std::set<IndexSet>& forbidden_b) {
  for (int attempt = 0; attempt < kDistractorRetries; ++attempt) {
    auto candidate = corrupt_once(source, universe, k, rng);
    if (!candidate) return std::nullopt;
    if (!forbidden_a.contains(*candidate) && !forbidden_b.contains(*candidate)) return candidate;
  }
  return std::nullopt;
}

std::string describe(const IndexSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "}";
}

}  // namespace

IntermediateSets build_intermediate_sets(const ConceptSet& concepts, const FormalContext& ctx,
                                         double k, std::uint64_t seed) {
  if (!(k > 0.0 && k < 1.0)) throw std::invalid_argument("replacement fraction k must lie in (0, 1)");
  if (concepts.empty()) throw std::invalid_argument("no concepts to build intermediate sets from");

  IntermediateSets sets;
  sets.k = k;
  std::set<IndexSet> extent_pool, intent_pool;
  for (const auto& c : concepts.concepts) {
    if (extent_pool.insert(c.extent).second) sets.extents.push_back(c.extent);
    if (intent_pool.insert(c.intent).second) sets.intents.push_back(c.intent);
  }

  Rng rng(seed);
  std::set<IndexSet> extent_distractors, intent_distractors;

  sets.extent_distractor_of.assign(sets.extents.size(), std::nullopt);
  for (std::size_t i = 0; i < sets.extents.size(); ++i) {
    auto d = find_distractor(sets.extents[i], ctx.num_objects(), k, rng, extent_pool,
                             extent_distractors);
    if (!d) {
      sets.warnings.push_back("no distractor found for extent " + describe(sets.extents[i]));
      continue;
    }
    extent_distractors.insert(*d);
    sets.extent_distractor_of[i] = sets.extent_distractors.size();
    sets.extent_source_of.push_back(i);
    sets.extent_distractors.push_back(std::move(*d));
  }

  sets.intent_distractor_of.assign(sets.intents.size(), std::nullopt);
  for (std::size_t i = 0; i < sets.intents.size(); ++i) {
    auto d = find_distractor(sets.intents[i], ctx.num_attributes(), k, rng, intent_pool,
                             intent_distractors);
    if (!d) {
      sets.warnings.push_back("no distractor found for intent " + describe(sets.intents[i]));
      continue;
    }
    intent_distractors.insert(*d);
    sets.intent_distractor_of[i] = sets.intent_distractors.size();
    sets.intent_source_of.push_back(i);
    sets.intent_distractors.push_back(std::move(*d));
  }
  return sets;
}

bool fully_connected(const FormalContext& ctx, const SetPair& pair) {
  const Bitset shared = intent_of(ctx, Bitset::from_indices(ctx.num_objects(), pair.objects));
  for (auto m : pair.attributes)
    if (!shared.test(m)) return false;
  return true;
}

ConceptSamples generate_concept_samples(const IntermediateSets& sets, const FormalContext& ctx,
                                        std::uint64_t seed) {
  ConceptSamples out;

  // A x B lies in I exactly when B is inside the attributes shared by A.
  std::vector<Bitset> shared;
  shared.reserve(sets.extents.size());
  for (const auto& a : sets.extents)
    shared.push_back(intent_of(ctx, Bitset::from_indices(ctx.num_objects(), a)));
  std::vector<Bitset> intent_bits;
  intent_bits.reserve(sets.intents.size());
  for (const auto& b : sets.intents)
    intent_bits.push_back(Bitset::from_indices(ctx.num_attributes(), b));

  std::vector<std::pair<std::size_t, std::size_t>> positive_sources;
  for (std::size_t i = 0; i < sets.extents.size(); ++i)
    for (std::size_t j = 0; j < sets.intents.size(); ++j)
      if (intent_bits[j].is_subset_of(shared[i])) {
        out.positives.push_back({sets.extents[i], sets.intents[j]});
        positive_sources.emplace_back(i, j);
      }

  const std::set<IndexSet> extent_pool(sets.extents.begin(), sets.extents.end());
  const std::set<IndexSet> intent_pool(sets.intents.begin(), sets.intents.end());
  const std::set<IndexSet> none;
  Rng rng(seed);

  std::vector<std::pair<std::size_t, std::size_t>> failed;
  for (const auto& [i, j] : positive_sources) {
    const auto di = sets.extent_distractor_of[i];
    const auto dj = sets.intent_distractor_of[j];
    if (di && dj) {
      SetPair candidate{sets.extent_distractors[*di], sets.intent_distractors[*dj]};
      if (!fully_connected(ctx, candidate)) {
        out.negatives.push_back(std::move(candidate));
        continue;
      }
    }
    failed.emplace_back(i, j);
  }

  for (const auto& [i, j] : failed) {
    bool resolved = false;
    for (int attempt = 0; attempt < kResampleRetries && !resolved; ++attempt) {
      auto a = corrupt_once(sets.extents[i], ctx.num_objects(), sets.k, rng);
      auto b = corrupt_once(sets.intents[j], ctx.num_attributes(), sets.k, rng);
      if (!a || !b) break;
      if (extent_pool.contains(*a) || intent_pool.contains(*b)) continue;
      SetPair candidate{std::move(*a), std::move(*b)};
      if (fully_connected(ctx, candidate)) continue;
      out.negatives.push_back(std::move(candidate));
      resolved = true;
    }
    if (!resolved) ++out.unbalanced;
  }
  if (out.unbalanced > 0)
    out.warnings.push_back(std::to_string(out.unbalanced) +
                           " positive concept samples have no negative counterpart");
  return out;
}

ContextSamples generate_context_samples(const FormalContext& ctx, std::uint64_t seed) {
  if (ctx.num_incidences() == 0) throw std::invalid_argument("context has no incidences");
  ContextSamples out;
  std::vector<Incidence> edges = ctx.incidence();
  std::sort(edges.begin(), edges.end());
  std::unordered_set<std::uint64_t> excluded;
  for (const auto& e : edges) {
    out.positives.push_back({{e.object}, {e.attribute}});
    excluded.insert(pair_key(e, ctx.num_attributes()));
  }
  Rng rng(seed);
  const std::size_t needed = out.positives.size();
  for (const auto& e : sample_absent_pairs(ctx.num_objects(), ctx.num_attributes(), excluded, needed,
                                           1000 * needed, rng, out.warnings))
    out.negatives.push_back({{e.object}, {e.attribute}});
  return out;
}

std::vector<Incidence> as_incidences(std::span<const SetPair> singletons) {
  std::vector<Incidence> out;
  out.reserve(singletons.size());
  for (const auto& p : singletons) {
    if (p.objects.size() != 1 || p.attributes.size() != 1)
      throw std::invalid_argument("context sample is not a singleton pair");
    out.push_back({p.objects[0], p.attributes[0]});
  }
  return out;
}

std::string_view to_string(SampleKind kind) {
  return kind == SampleKind::concept_sample ? "concept" : "context";
}

PaddedSet pad_samples(const ConceptSamples& concept_samples, const ContextSamples& context_samples) {
  PaddedSet out;
  for (const auto* group : {&concept_samples.positives, &concept_samples.negatives})
    for (const auto& p : *group) {
      out.l_ext = std::max(out.l_ext, p.objects.size());
      out.l_int = std::max(out.l_int, p.attributes.size());
    }

  auto pad = [](const IndexSet& members, std::size_t length) {
    std::vector<std::uint32_t> v(members.begin(), members.end());
    v.resize(length, kPadSlot);
    return v;
  };
  auto append = [&](const std::vector<SetPair>& group, int label, SampleKind kind) {
    for (const auto& p : group) {
      if (p.objects.size() > out.l_ext || p.attributes.size() > out.l_int)
        throw std::logic_error("context sample longer than the padded length");
      out.samples.push_back({pad(p.objects, out.l_ext), pad(p.attributes, out.l_int), label, kind});
    }
  };
  append(concept_samples.positives, 1, SampleKind::concept_sample);
  append(concept_samples.negatives, 0, SampleKind::concept_sample);
  append(context_samples.positives, 1, SampleKind::context_sample);
  append(context_samples.negatives, 0, SampleKind::context_sample);
  return out;
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < kNumSpecial || tokens_[kPad] != "[PAD]" || tokens_[kCls] != "[CLS]" ||
      tokens_[kSep] != "[SEP]")
    throw std::invalid_argument("vocabulary must start with [PAD], [CLS], [SEP]");
  bool in_attributes = false;
  for (std::uint32_t i = 0; i < tokens_.size(); ++i) {
    if (!lookup_.emplace(tokens_[i], i).second)
      throw std::invalid_argument("duplicate vocabulary token: " + tokens_[i]);
    if (i < kNumSpecial) continue;
    const auto prefix = tokens_[i].substr(0, 2);
    if (prefix == "o:" && !in_attributes) {
      ++num_objects_;
    } else if (prefix == "a:") {
      in_attributes = true;
    } else {
      throw std::invalid_argument("vocabulary token out of order or unprefixed: " + tokens_[i]);
    }
  }
}

Vocabulary Vocabulary::from_context(const FormalContext& ctx) {
  std::vector<std::string> tokens{"[PAD]", "[CLS]", "[SEP]"};
  for (std::uint32_t g = 0; g < ctx.num_objects(); ++g) tokens.push_back(ctx.object_token(g));
  for (std::uint32_t m = 0; m < ctx.num_attributes(); ++m) tokens.push_back(ctx.attribute_token(m));
  return Vocabulary(std::move(tokens));
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view token) const {
  auto it = lookup_.find(std::string(token));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t Vocabulary::id(std::string_view token) const {
  if (auto i = find(token)) return *i;
  throw std::out_of_range("token not in vocabulary: " + std::string(token));
}

std::uint32_t Vocabulary::object_id(std::uint32_t object) const {
  if (object >= num_objects_) throw std::out_of_range("object index outside vocabulary");
  return kNumSpecial + object;
}

std::uint32_t Vocabulary::attribute_id(std::uint32_t attribute) const {
  const std::size_t id = kNumSpecial + num_objects_ + attribute;
  if (id >= tokens_.size()) throw std::out_of_range("attribute index outside vocabulary");
  return static_cast<std::uint32_t>(id);
}

TokenSequence tokenize(const PaddedSample& sample, const Vocabulary& vocab) {
  TokenSequence out;
  out.reserve(2 + sample.objects.size() + sample.attributes.size());
  out.push_back(Vocabulary::kCls);
  for (auto g : sample.objects) out.push_back(g == kPadSlot ? Vocabulary::kPad : vocab.object_id(g));
  out.push_back(Vocabulary::kSep);
  for (auto m : sample.attributes)
    out.push_back(m == kPadSlot ? Vocabulary::kPad : vocab.attribute_id(m));
  return out;
}

TokenSequence tokenize(std::span<const std::string> objects, std::span<const std::string> attributes,
                       const Vocabulary& vocab, std::size_t l_ext, std::size_t l_int) {
  if (objects.size() > l_ext || attributes.size() > l_int)
    throw std::invalid_argument("set larger than the padded length of the model");
  TokenSequence out;
  out.reserve(2 + l_ext + l_int);
  out.push_back(Vocabulary::kCls);
  for (const auto& t : objects) out.push_back(vocab.id(t));
  out.resize(1 + l_ext, Vocabulary::kPad);
  out.push_back(Vocabulary::kSep);
  for (const auto& t : attributes) out.push_back(vocab.id(t));
  out.resize(2 + l_ext + l_int, Vocabulary::kPad);
  return out;
}

SampleSet prepare_samples(const ConceptSet& concepts, const FormalContext& ctx, double k,
                          std::uint64_t seed) {
  SampleSet s;
  const std::uint64_t distractor_seed = derive_seed(seed, "distractor");
  if (!concepts.empty()) {
    s.intermediate = build_intermediate_sets(concepts, ctx, k, distractor_seed);
    s.concept_samples =
        generate_concept_samples(s.intermediate, ctx, derive_seed(distractor_seed, "resample"));
  } else {
    s.intermediate.k = k;
    s.intermediate.warnings.push_back("no concepts supplied; only context samples are generated");
  }
  s.context_samples = generate_context_samples(ctx, derive_seed(seed, "context-negatives"));
  s.padded = pad_samples(s.concept_samples, s.context_samples);
  return s;
}

// ---------------------------------------------------------------------------

void write_samples(std::ostream& out, const PaddedSet& padded, const Vocabulary& vocab,
                   const std::string& metadata_json) {
  json meta = json::parse(metadata_json);
  meta["l_ext"] = padded.l_ext;
  meta["l_int"] = padded.l_int;
  meta["count"] = padded.samples.size();
  meta["vocab"] = vocab.tokens();
  out << json{{"meta", meta}}.dump() << '\n';
  for (const auto& s : padded.samples) {
    json x = json::array(), y = json::array();
    for (auto g : s.objects) x.push_back(g == kPadSlot ? "[PAD]" : vocab.token(vocab.object_id(g)));
    for (auto m : s.attributes)
      y.push_back(m == kPadSlot ? "[PAD]" : vocab.token(vocab.attribute_id(m)));
    json rec;
    rec["x"] = std::move(x);
    rec["y"] = std::move(y);
    rec["label"] = s.label;
    rec["kind"] = to_string(s.kind);
    out << rec.dump() << '\n';
  }
}

SampleFile read_samples(std::istream& in) {
  SampleFile file;
  std::string line;
  std::size_t lineno = 0;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    }
    if (!have_meta) {
      if (!rec.contains("meta")) throw ParseError(lineno, "samples file must start with a meta record");
      const auto& meta = rec["meta"];
      file.metadata_json = meta.dump();
      file.l_ext = meta.at("l_ext").get<std::size_t>();
      file.l_int = meta.at("l_int").get<std::size_t>();
      file.vocab = Vocabulary(meta.at("vocab").get<std::vector<std::string>>());
      have_meta = true;
      continue;
    }
    try {
      const auto x = rec.at("x").get<std::vector<std::string>>();
      const auto y = rec.at("y").get<std::vector<std::string>>();
      if (x.size() != file.l_ext || y.size() != file.l_int)
        throw ParseError(lineno, "sample length does not match l_ext/l_int");
      TokenizedSample s;
      s.tokens = tokenize(x, y, file.vocab, file.l_ext, file.l_int);
      s.label = rec.at("label").get<int>();
      if (s.label != 0 && s.label != 1) throw ParseError(lineno, "label must be 0 or 1");
      const auto kind = rec.at("kind").get<std::string>();
      if (kind == "concept")
        s.kind = SampleKind::concept_sample;
      else if (kind == "context")
        s.kind = SampleKind::context_sample;
      else
        throw ParseError(lineno, "kind must be concept or context");
      file.samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    } catch (const std::out_of_range& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (!have_meta) throw std::invalid_argument("samples file is empty");
  return file;
}

}  // namespace biclink
