#include "biclink/context.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

namespace biclink {

FormalContext::FormalContext(std::vector<std::string> objects, std::vector<std::string> attributes,
                             std::vector<Incidence> incidence)
    : objects_(std::move(objects)), attributes_(std::move(attributes)) {
  for (std::uint32_t i = 0; i < objects_.size(); ++i)
    if (!object_lookup_.emplace(objects_[i], i).second)
      throw std::invalid_argument("duplicate object identifier: " + objects_[i]);
  for (std::uint32_t i = 0; i < attributes_.size(); ++i)
    if (!attribute_lookup_.emplace(attributes_[i], i).second)
      throw std::invalid_argument("duplicate attribute identifier: " + attributes_[i]);

  rows_.assign(objects_.size(), Bitset(attributes_.size()));
  columns_.assign(attributes_.size(), Bitset(objects_.size()));
  incidence_.reserve(incidence.size());
  for (const auto& e : incidence) {
    if (e.object >= objects_.size() || e.attribute >= attributes_.size())
      throw std::out_of_range("incidence references an unknown object or attribute");
    if (rows_[e.object].test(e.attribute)) continue;
    rows_[e.object].set(e.attribute);
    columns_[e.attribute].set(e.object);
    incidence_.push_back(e);
  }
}

std::optional<std::uint32_t> FormalContext::find_object(std::string_view id) const {
  auto it = object_lookup_.find(std::string(id));
  if (it == object_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> FormalContext::find_attribute(std::string_view id) const {
  auto it = attribute_lookup_.find(std::string(id));
  if (it == attribute_lookup_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t FormalContext::object_index(std::string_view id) const {
  if (auto i = find_object(id)) return *i;
  throw std::out_of_range("unknown object: " + std::string(id));
}

std::uint32_t FormalContext::attribute_index(std::string_view id) const {
  if (auto i = find_attribute(id)) return *i;
  throw std::out_of_range("unknown attribute: " + std::string(id));
}

std::uint64_t FormalContext::fingerprint() const {
  std::uint64_t h = fnv1a("objects\n");
  for (const auto& o : objects_) h = fnv1a(o + "\n", h);
  h = fnv1a("attributes\n", h);
  for (const auto& a : attributes_) h = fnv1a(a + "\n", h);
  h = fnv1a("incidence\n", h);
  for (const auto& e : incidence_)
    h = fnv1a(std::to_string(e.object) + "\t" + std::to_string(e.attribute) + "\n", h);
  return h;
}

// ---------------------------------------------------------------------------

std::uint32_t ContextBuilder::add_object(std::string_view id) {
  auto [it, inserted] =
      object_lookup_.emplace(std::string(id), static_cast<std::uint32_t>(objects_.size()));
  if (inserted) objects_.emplace_back(id);
  return it->second;
}

std::uint32_t ContextBuilder::add_attribute(std::string_view id) {
  auto [it, inserted] =
      attribute_lookup_.emplace(std::string(id), static_cast<std::uint32_t>(attributes_.size()));
  if (inserted) attributes_.emplace_back(id);
  return it->second;
}

bool ContextBuilder::add_incidence(std::string_view object, std::string_view attribute) {
  const auto g = add_object(object);
  const auto m = add_attribute(attribute);
  const std::uint64_t key = (static_cast<std::uint64_t>(g) << 32) | m;
  if (!seen_.insert(key).second) return false;
  incidence_.push_back({g, m});
  return true;
}

FormalContext ContextBuilder::build() && {
  return FormalContext(std::move(objects_), std::move(attributes_), std::move(incidence_));
}

// ---------------------------------------------------------------------------

std::vector<EdgeName> read_edge_list(std::istream& in) {
  std::vector<EdgeName> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(lineno, "expected object<TAB>attribute");
    if (line.find('\t', tab + 1) != std::string::npos)
      throw ParseError(lineno, "more than one tab in edge line");
    if (tab == 0 || tab + 1 == line.size()) throw ParseError(lineno, "empty identifier");
    edges.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return edges;
}

FormalContext load_context(std::istream& in) {
  ContextBuilder builder;
  for (const auto& e : read_edge_list(in)) builder.add_incidence(e.object, e.attribute);
  if (builder.num_incidences() == 0)
    throw std::invalid_argument("context is empty: at least one incidence is required");
  return std::move(builder).build();
}

FormalContext load_context_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open context file: " + path.string());
  return load_context(in);
}

FormalContext load_context_with_nodes(const std::filesystem::path& path,
                                      std::span<const EdgeName> extra_nodes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open context file: " + path.string());
  ContextBuilder builder;
  for (const auto& e : read_edge_list(in)) builder.add_incidence(e.object, e.attribute);
  if (builder.num_incidences() == 0)
    throw std::invalid_argument("context is empty: at least one incidence is required");
  for (const auto& e : extra_nodes) {
    builder.add_object(e.object);
    builder.add_attribute(e.attribute);
  }
  return std::move(builder).build();
}

void write_context(std::ostream& out, const FormalContext& ctx) {
  write_edges(out, ctx, ctx.incidence());
}

void write_edges(std::ostream& out, const FormalContext& ctx, std::span<const Incidence> edges) {
  for (const auto& e : edges)
    out << ctx.objects()[e.object] << '\t' << ctx.attributes()[e.attribute] << '\n';
}

// ---------------------------------------------------------------------------

Bitset intent_of(const FormalContext& ctx, const Bitset& extent) {
  Bitset out = ctx.all_attributes();
  extent.for_each([&](std::uint32_t g) { out &= ctx.row(g); });
  return out;
}

Bitset extent_of(const FormalContext& ctx, const Bitset& intent) {
  Bitset out = ctx.all_objects();
  intent.for_each([&](std::uint32_t m) { out &= ctx.column(m); });
  return out;
}

IndexSet derive_intent(const FormalContext& ctx, std::span<const std::uint32_t> objects) {
  return intent_of(ctx, Bitset::from_indices(ctx.num_objects(), objects)).to_indices();
}

IndexSet derive_extent(const FormalContext& ctx, std::span<const std::uint32_t> attributes) {
  return extent_of(ctx, Bitset::from_indices(ctx.num_attributes(), attributes)).to_indices();
}

FormalConcept closure(const FormalContext& ctx, std::span<const std::uint32_t> attributes) {
  const Bitset extent = extent_of(ctx, Bitset::from_indices(ctx.num_attributes(), attributes));
  return {extent.to_indices(), intent_of(ctx, extent).to_indices()};
}

// ---------------------------------------------------------------------------

std::size_t removal_count(std::size_t num_incidences, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(num_incidences) + 0.5));
}

SplitResult split_input_target(const FormalContext& ctx, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split fraction must lie in (0, 1)");
  const std::size_t n = ctx.num_incidences();
  const std::size_t k = removal_count(n, fraction);
  if (k == 0)
    throw std::invalid_argument("split fraction removes no edges from " + std::to_string(n) +
                                " incidences; use a larger fraction");

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // partial Fisher-Yates: the first k slots become a uniform k-subset
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(rng, n - i);
    std::swap(order[i], order[j]);
  }
  std::vector<bool> removed(n, false);
  for (std::size_t i = 0; i < k; ++i) removed[order[i]] = true;

  SplitResult result;
  result.seed = seed;
  std::vector<Incidence> kept;
  kept.reserve(n - k);
  for (std::size_t i = 0; i < n; ++i) {
    if (removed[i])
      result.removed_edges.push_back(ctx.incidence()[i]);
    else
      kept.push_back(ctx.incidence()[i]);
  }
  result.input_context = FormalContext(ctx.objects(), ctx.attributes(), std::move(kept));
  return result;
}

std::vector<Incidence> sample_absent_pairs(std::size_t num_objects, std::size_t num_attributes,
                                           const std::unordered_set<std::uint64_t>& excluded,
                                           std::size_t needed, std::size_t max_draws, Rng& rng,
                                           std::vector<std::string>& warnings) {
  std::vector<Incidence> out;
  if (needed == 0) return out;
  const std::uint64_t total = static_cast<std::uint64_t>(num_objects) * num_attributes;
  const std::uint64_t eligible = total > excluded.size() ? total - excluded.size() : 0;

  auto enumerate_remaining = [&](const std::unordered_set<std::uint64_t>& taken) {
    std::vector<Incidence> pool;
    for (std::uint32_t g = 0; g < num_objects; ++g)
      for (std::uint32_t m = 0; m < num_attributes; ++m) {
        const std::uint64_t key = static_cast<std::uint64_t>(g) * num_attributes + m;
        if (!excluded.contains(key) && !taken.contains(key)) pool.push_back({g, m});
      }
    return pool;
  };

  if (eligible <= needed) {
    out = enumerate_remaining({});
    if (out.size() < needed)
      warnings.push_back("only " + std::to_string(out.size()) + " eligible non-edges for " +
                         std::to_string(needed) + " requested negatives");
    return out;
  }

  std::unordered_set<std::uint64_t> taken;
  std::size_t draws = 0;
  while (out.size() < needed && draws < max_draws) {
    ++draws;
    const auto g = static_cast<std::uint32_t>(uniform_index(rng, num_objects));
    const auto m = static_cast<std::uint32_t>(uniform_index(rng, num_attributes));
    const std::uint64_t key = static_cast<std::uint64_t>(g) * num_attributes + m;
    if (excluded.contains(key) || taken.contains(key)) continue;
    taken.insert(key);
    out.push_back({g, m});
  }
  if (out.size() < needed) {
    warnings.push_back("rejection sampling hit its draw cap after " + std::to_string(draws) +
                       " draws; completing negatives by enumeration");
    auto pool = enumerate_remaining(taken);
    const std::size_t missing = needed - out.size();
    for (std::size_t i = 0; i < missing; ++i) {
      const std::size_t j = i + uniform_index(rng, pool.size() - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
  }
  return out;
}

TestSet generate_test_set(const SplitResult& split, std::span<const Incidence> context_negatives,
                          std::uint64_t seed) {
  const auto& ctx = split.input_context;
  if (split.removed_edges.empty())
    throw std::invalid_argument("split has no removed edges to use as test positives");
  const std::size_t nattr = ctx.num_attributes();

  std::unordered_set<std::uint64_t> excluded;
  for (const auto& e : ctx.incidence()) excluded.insert(pair_key(e, nattr));
  for (const auto& e : split.removed_edges) excluded.insert(pair_key(e, nattr));
  for (const auto& e : context_negatives) excluded.insert(pair_key(e, nattr));

  TestSet test;
  test.positives = split.removed_edges;
  Rng rng(seed);
  const std::size_t needed = test.positives.size();
  test.negatives = sample_absent_pairs(ctx.num_objects(), nattr, excluded, needed, 1000 * needed,
                                       rng, test.warnings);
  return test;
}

void write_test_set(std::ostream& out, const FormalContext& ctx, const TestSet& test) {
  for (const auto& e : test.positives)
    out << ctx.objects()[e.object] << '\t' << ctx.attributes()[e.attribute] << "\t1\n";
  for (const auto& e : test.negatives)
    out << ctx.objects()[e.object] << '\t' << ctx.attributes()[e.attribute] << "\t0\n";
}

std::vector<LabeledEdge> read_test_set(std::istream& in) {
  std::vector<LabeledEdge> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos)
      throw ParseError(lineno, "expected object<TAB>attribute<TAB>label");
    const std::string label = line.substr(t2 + 1);
    if (label != "0" && label != "1") throw ParseError(lineno, "label must be 0 or 1");
    out.push_back({line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), label == "1" ? 1 : 0});
  }
  return out;
}

}  // namespace biclink
