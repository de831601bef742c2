#include "biclink/miner.hpp"

#include <algorithm>
#include <atomic>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace biclink {

void SizeBounds::validate() const {
  if (min_extent > max_extent)
    throw std::invalid_argument("invalid bounds: min extent size exceeds max extent size");
  if (min_intent > max_intent)
    throw std::invalid_argument("invalid bounds: min intent size exceeds max intent size");
}

void ConceptSet::canonicalize() { std::sort(concepts.begin(), concepts.end()); }

std::string bound_to_string(std::size_t bound) {
  return bound == SizeBounds::kUnbounded ? "inf" : std::to_string(bound);
}

namespace {

struct Node {
  Bitset extent;
  Bitset intent;
  std::int64_t next;       // next candidate attribute, counting down
  std::int64_t generator;  // attribute that produced this node (-1 at the root)
};

class BoundedMiner {
 public:
  BoundedMiner(const FormalContext& ctx, const SizeBounds& bounds) : ctx_(ctx), bounds_(bounds) {}

  Node root() const {
    Bitset extent = ctx_.all_objects();
    Bitset intent = intent_of(ctx_, extent);
    return {std::move(extent), std::move(intent), last_attribute(), -1};
  }

  /// Closure of intent + {m_j} if it is a prefix-preserving extension that
  /// survives the monotone bounds.
  std::optional<Node> extend(const Node& parent, std::int64_t j) const {
    const auto attr = static_cast<std::uint32_t>(j);
    if (parent.intent.test(attr)) return std::nullopt;
    Bitset extent = parent.extent & ctx_.column(attr);
    if (extent.count() < bounds_.min_extent) return std::nullopt;
    Bitset intent = intent_of(ctx_, extent);
    if (intent.has_new_member_below(parent.intent, attr)) return std::nullopt;
    if (intent.count() > bounds_.max_intent) return std::nullopt;
    return Node{std::move(extent), std::move(intent), last_attribute(), j};
  }

  void visit(const Node& n, std::vector<FormalConcept>& out) const {
    const std::size_t a = n.extent.count();
    const std::size_t b = n.intent.count();
    if (bounds_.admits(a, b)) out.push_back({n.extent.to_indices(), n.intent.to_indices()});
  }

  /// Visits `start` and its whole subtree depth-first.
  void run(Node start, std::vector<FormalConcept>& out) const {
    std::vector<Node> stack;
    visit(start, out);
    stack.push_back(std::move(start));
    while (!stack.empty()) {
      Node& top = stack.back();
      if (top.next <= top.generator) {
        stack.pop_back();
        continue;
      }
      const std::int64_t j = top.next--;
      if (auto child = extend(top, j)) {
        visit(*child, out);
        stack.push_back(std::move(*child));
      }
    }
  }

  std::vector<Node> children(Node& parent) const {
    std::vector<Node> out;
    for (; parent.next > parent.generator; --parent.next)
      if (auto child = extend(parent, parent.next)) out.push_back(std::move(*child));
    return out;
  }

 private:
  std::int64_t last_attribute() const { return static_cast<std::int64_t>(ctx_.num_attributes()) - 1; }

  const FormalContext& ctx_;
  const SizeBounds& bounds_;
};

}  // namespace

ConceptSet mine_significant(const FormalContext& ctx, const SizeBounds& bounds,
                            const MineOptions& options) {
  bounds.validate();
  ConceptSet result;
  result.bounds = bounds;
  result.context_fingerprint = ctx.fingerprint();

  BoundedMiner miner(ctx, bounds);
  Node root = miner.root();

  if (options.threads <= 1) {
    miner.run(std::move(root), result.concepts);
    return result;
  }

  // The root is always visited; its subtrees are independent work items.
  miner.visit(root, result.concepts);
  std::vector<Node> branches = miner.children(root);
  std::vector<std::vector<FormalConcept>> partial(branches.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < branches.size(); i = next++)
      miner.run(std::move(branches[i]), partial[i]);
  };
  std::vector<std::jthread> pool;
  const unsigned n = std::min<unsigned>(options.threads, static_cast<unsigned>(branches.size()));
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  pool.clear();
  for (auto& p : partial)
    result.concepts.insert(result.concepts.end(), std::make_move_iterator(p.begin()),
                           std::make_move_iterator(p.end()));
  return result;
}

ConceptSet enumerate_all_bruteforce(const FormalContext& ctx) {
  const std::size_t nattr = ctx.num_attributes();
  if (nattr > kBruteForceMaxAttributes)
    throw std::invalid_argument("brute-force enumeration supports at most " +
                                std::to_string(kBruteForceMaxAttributes) + " attributes, got " +
                                std::to_string(nattr));
  std::set<FormalConcept> found;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nattr); ++mask) {
    Bitset subset(nattr);
    for (std::size_t m = 0; m < nattr; ++m)
      if ((mask >> m) & 1U) subset.set(m);
    const Bitset extent = extent_of(ctx, subset);
    found.insert({extent.to_indices(), intent_of(ctx, extent).to_indices()});
  }
  ConceptSet result;
  result.concepts.assign(found.begin(), found.end());
  result.context_fingerprint = ctx.fingerprint();
  return result;
}

bool is_concept(const FormalContext& ctx, std::span<const std::uint32_t> extent,
                std::span<const std::uint32_t> intent) {
  const Bitset a = Bitset::from_indices(ctx.num_objects(), extent);
  const Bitset b = Bitset::from_indices(ctx.num_attributes(), intent);
  return intent_of(ctx, a) == b && extent_of(ctx, b) == a;
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json bound_json(std::size_t b) {
  return b == SizeBounds::kUnbounded ? json("inf") : json(b);
}

std::size_t bound_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return SizeBounds::kUnbounded;
  return j.get<std::size_t>();
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

std::string join_sorted(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].find(',') != std::string::npos)
      throw std::invalid_argument("identifier contains ',' and cannot be written: " + names[i]);
    if (i) out += ',';
    out += names[i];
  }
  return out;
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(s.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

void write_concepts(std::ostream& out, const FormalContext& ctx, const ConceptSet& concepts,
                    const std::string& extra_metadata_json) {
  json header = json::parse(extra_metadata_json);
  header["bounds"] = {{"l1", bound_json(concepts.bounds.min_extent)},
                      {"u1", bound_json(concepts.bounds.max_extent)},
                      {"l2", bound_json(concepts.bounds.min_intent)},
                      {"u2", bound_json(concepts.bounds.max_intent)}};
  header["context"] = hex64(ctx.fingerprint());
  header["count"] = concepts.size();

  std::vector<std::string> lines;
  lines.reserve(concepts.size());
  for (const auto& c : concepts.concepts) {
    std::vector<std::string> objs, attrs;
    for (auto g : c.extent) objs.push_back(ctx.objects().at(g));
    for (auto m : c.intent) attrs.push_back(ctx.attributes().at(m));
    lines.push_back(join_sorted(std::move(objs)) + '\t' + join_sorted(std::move(attrs)));
  }
  std::sort(lines.begin(), lines.end());
  out << "# " << header.dump() << '\n';
  for (const auto& l : lines) out << l << '\n';
}

ConceptSet read_concepts(std::istream& in, const FormalContext& ctx) {
  ConceptSet result;
  result.context_fingerprint = ctx.fingerprint();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto brace = line.find('{');
      if (brace == std::string::npos) continue;
      json header;
      try {
        header = json::parse(line.substr(brace));
      } catch (const json::exception& e) {
        throw ParseError(lineno, std::string("bad concepts header: ") + e.what());
      }
      if (header.contains("bounds")) {
        const auto& b = header["bounds"];
        result.bounds = {bound_from_json(b.at("l1")), bound_from_json(b.at("u1")),
                         bound_from_json(b.at("l2")), bound_from_json(b.at("u2"))};
      }
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw ParseError(lineno, "expected extent<TAB>intent");
    FormalConcept c;
    try {
      for (const auto& name : split_names(line.substr(0, tab)))
        c.extent.push_back(ctx.object_index(name));
      for (const auto& name : split_names(line.substr(tab + 1)))
        c.intent.push_back(ctx.attribute_index(name));
    } catch (const std::out_of_range& e) {
      throw ParseError(lineno, e.what());
    }
    std::sort(c.extent.begin(), c.extent.end());
    std::sort(c.intent.begin(), c.intent.end());
    if (!is_concept(ctx, c.extent, c.intent))
      throw ParseError(lineno, "pair is not a formal concept of the context");
    result.concepts.push_back(std::move(c));
  }
  return result;
}

}  // namespace biclink
