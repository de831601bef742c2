#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "biclink/bitset.hpp"
#include "biclink/rng.hpp"

namespace biclink {

/// Sorted, duplicate-free list of object or attribute indices.
using IndexSet = std::vector<std::uint32_t>;

struct Incidence {
  std::uint32_t object = 0;
  std::uint32_t attribute = 0;

  friend auto operator<=>(const Incidence&, const Incidence&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A formal context (G, M, I), equivalently a bipartite network. Objects and
/// attributes live in separate namespaces, so one identifier string may name
/// both an object and an attribute. Immutable once built; the relation is kept
/// both row-wise (attributes of each object) and column-wise (objects of each
/// attribute).
class FormalContext {
 public:
  FormalContext() = default;
  FormalContext(std::vector<std::string> objects, std::vector<std::string> attributes,
                std::vector<Incidence> incidence);

  std::size_t num_objects() const noexcept { return objects_.size(); }
  std::size_t num_attributes() const noexcept { return attributes_.size(); }
  std::size_t num_incidences() const noexcept { return incidence_.size(); }

  const std::vector<std::string>& objects() const noexcept { return objects_; }
  const std::vector<std::string>& attributes() const noexcept { return attributes_; }
  /// Incidences in insertion order.
  const std::vector<Incidence>& incidence() const noexcept { return incidence_; }

  std::optional<std::uint32_t> find_object(std::string_view id) const;
  std::optional<std::uint32_t> find_attribute(std::string_view id) const;
  std::uint32_t object_index(std::string_view id) const;
  std::uint32_t attribute_index(std::string_view id) const;

  bool has(std::uint32_t object, std::uint32_t attribute) const noexcept {
    return rows_[object].test(attribute);
  }
  /// Attributes of one object.
  const Bitset& row(std::uint32_t object) const noexcept { return rows_[object]; }
  /// Objects having one attribute.
  const Bitset& column(std::uint32_t attribute) const noexcept { return columns_[attribute]; }

  Bitset all_objects() const { return Bitset(num_objects(), true); }
  Bitset all_attributes() const { return Bitset(num_attributes(), true); }

  /// Internal token of an object or attribute: "o:<id>" / "a:<id>".
  std::string object_token(std::uint32_t object) const { return "o:" + objects_.at(object); }
  std::string attribute_token(std::uint32_t attribute) const {
    return "a:" + attributes_.at(attribute);
  }

  /// Content hash over node lists and incidences (insertion order).
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> objects_;
  std::vector<std::string> attributes_;
  std::vector<Incidence> incidence_;
  std::unordered_map<std::string, std::uint32_t> object_lookup_;
  std::unordered_map<std::string, std::uint32_t> attribute_lookup_;
  std::vector<Bitset> rows_;
  std::vector<Bitset> columns_;
};

/// Registers identifiers in first-appearance order and drops duplicate edges.
class ContextBuilder {
 public:
  std::uint32_t add_object(std::string_view id);
  std::uint32_t add_attribute(std::string_view id);
  /// Returns false when the edge was already present.
  bool add_incidence(std::string_view object, std::string_view attribute);
  std::size_t num_incidences() const noexcept { return incidence_.size(); }

  FormalContext build() &&;

 private:
  std::vector<std::string> objects_;
  std::vector<std::string> attributes_;
  std::unordered_map<std::string, std::uint32_t> object_lookup_;
  std::unordered_map<std::string, std::uint32_t> attribute_lookup_;
  std::vector<Incidence> incidence_;
  std::unordered_set<std::uint64_t> seen_;
};

struct EdgeName {
  std::string object;
  std::string attribute;
};

/// Reads "object<TAB>attribute" lines. Blank lines are skipped; a trailing CR
/// is tolerated. Throws ParseError on malformed lines.
std::vector<EdgeName> read_edge_list(std::istream& in);

/// Parses an edge list into a context. An empty stream is an error.
FormalContext load_context(std::istream& in);
FormalContext load_context_file(const std::filesystem::path& path);

/// Loads a context and registers every node mentioned in `extra_nodes` that is
/// not already present as an isolated node (no incidences added).
FormalContext load_context_with_nodes(const std::filesystem::path& path,
                                      std::span<const EdgeName> extra_nodes);

void write_context(std::ostream& out, const FormalContext& ctx);
void write_edges(std::ostream& out, const FormalContext& ctx, std::span<const Incidence> edges);

// --- derivation operators --------------------------------------------------

/// Attributes shared by every object of `extent` (all attributes when empty).
Bitset intent_of(const FormalContext& ctx, const Bitset& extent);
/// Objects having every attribute of `intent` (all objects when empty).
Bitset extent_of(const FormalContext& ctx, const Bitset& intent);

IndexSet derive_intent(const FormalContext& ctx, std::span<const std::uint32_t> objects);
IndexSet derive_extent(const FormalContext& ctx, std::span<const std::uint32_t> attributes);

struct FormalConcept {
  IndexSet extent;
  IndexSet intent;

  friend auto operator<=>(const FormalConcept&, const FormalConcept&) = default;
};

/// (B', B'') for an attribute set B.
FormalConcept closure(const FormalContext& ctx, std::span<const std::uint32_t> attributes);

// --- train/target split and test set ---------------------------------------

struct SplitResult {
  /// Same node lists as the original, with the removed edges missing.
  FormalContext input_context;
  std::vector<Incidence> removed_edges;
  std::uint64_t seed = 0;
};

/// round-half-up(fraction * n)
std::size_t removal_count(std::size_t num_incidences, double fraction);

/// Removes exactly removal_count(|I|, fraction) incidences chosen uniformly
/// without replacement.
SplitResult split_input_target(const FormalContext& ctx, double fraction, std::uint64_t seed);

struct TestSet {
  std::vector<Incidence> positives;
  std::vector<Incidence> negatives;
  std::vector<std::string> warnings;
};

/// Positives are the removed edges; negatives are drawn uniformly from pairs
/// that are neither an original incidence, nor an earlier negative, nor a
/// member of `context_negatives`.
TestSet generate_test_set(const SplitResult& split, std::span<const Incidence> context_negatives,
                          std::uint64_t seed);

void write_test_set(std::ostream& out, const FormalContext& ctx, const TestSet& test);

struct LabeledEdge {
  std::string object;
  std::string attribute;
  int label = 0;
};

/// Reads "object<TAB>attribute<TAB>label" lines.
std::vector<LabeledEdge> read_test_set(std::istream& in);

/// Draws up to `needed` distinct pairs (g, m) uniformly from G x M minus
/// `excluded` (keys g * |M| + m). Rejection sampling is used while eligible
/// pairs are plentiful; after `max_draws` failed draws, or when fewer than
/// `needed` pairs are eligible, the remaining eligible pairs are enumerated.
/// A warning is appended whenever fewer than `needed` pairs could be drawn.
std::vector<Incidence> sample_absent_pairs(std::size_t num_objects, std::size_t num_attributes,
                                           const std::unordered_set<std::uint64_t>& excluded,
                                           std::size_t needed, std::size_t max_draws, Rng& rng,
                                           std::vector<std::string>& warnings);

inline std::uint64_t pair_key(const Incidence& e, std::size_t num_attributes) {
  return static_cast<std::uint64_t>(e.object) * num_attributes + e.attribute;
}

}  // namespace biclink
