#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "biclink/context.hpp"

namespace biclink {

/// Size window of a significant concept: min_extent <= |A| <= max_extent and
/// min_intent <= |B| <= max_intent. The lower extent bound and upper intent
/// bound cut the upward iceberg; the other two cut the downward one.
struct SizeBounds {
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

  std::size_t min_extent = 0;
  std::size_t max_extent = kUnbounded;
  std::size_t min_intent = 0;
  std::size_t max_intent = kUnbounded;

  static SizeBounds unbounded() { return {}; }

  bool admits(std::size_t extent_size, std::size_t intent_size) const noexcept {
    return extent_size >= min_extent && extent_size <= max_extent && intent_size >= min_intent &&
           intent_size <= max_intent;
  }
  bool admits(const FormalConcept& c) const noexcept {
    return admits(c.extent.size(), c.intent.size());
  }
  /// Throws std::invalid_argument when a lower bound exceeds its upper bound.
  void validate() const;

  friend bool operator==(const SizeBounds&, const SizeBounds&) = default;
};

struct ConceptSet {
  std::vector<FormalConcept> concepts;
  SizeBounds bounds;
  std::uint64_t context_fingerprint = 0;

  std::size_t size() const noexcept { return concepts.size(); }
  bool empty() const noexcept { return concepts.empty(); }
  /// Sorts by extent (then intent) index sequence.
  void canonicalize();
};

struct MineOptions {
  /// Worker threads for independent top-level branches; 1 runs inline.
  unsigned threads = 1;
};

/// Every formal concept (A, B) of `ctx` admitted by `bounds`, each emitted
/// exactly once. Depth-first closure enumeration with prefix-preserving
/// extensions; the subtree below a node is skipped as soon as its extent falls
/// under min_extent or its intent exceeds max_intent, because extents only
/// shrink and intents only grow along a branch. With threads == 1 the order is
/// the deterministic emission order; otherwise it is unspecified.
ConceptSet mine_significant(const FormalContext& ctx, const SizeBounds& bounds,
                            const MineOptions& options = {});

inline constexpr std::size_t kBruteForceMaxAttributes = 20;

/// Reference enumeration: closes every subset of M. Limited to
/// kBruteForceMaxAttributes attributes.
ConceptSet enumerate_all_bruteforce(const FormalContext& ctx);

bool is_concept(const FormalContext& ctx, std::span<const std::uint32_t> extent,
                std::span<const std::uint32_t> intent);

/// One line per concept, "obj1,obj2<TAB>attr1,attr2", member names and lines
/// sorted lexicographically, preceded by a '#' header carrying a JSON object
/// with the bounds, the context fingerprint and any `extra_metadata_json`
/// fields.
void write_concepts(std::ostream& out, const FormalContext& ctx, const ConceptSet& concepts,
                    const std::string& extra_metadata_json = "{}");

/// Parses a concepts file against `ctx`. Each line must be a concept of ctx.
ConceptSet read_concepts(std::istream& in, const FormalContext& ctx);

std::string bound_to_string(std::size_t bound);

}  // namespace biclink
