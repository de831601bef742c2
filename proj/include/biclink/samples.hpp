#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "biclink/context.hpp"
#include "biclink/miner.hpp"

namespace biclink {

/// Extents and intents of the mined concepts plus one corrupted copy
/// ("distractor") of each. The source/distractor association is stored in both
/// directions.
struct IntermediateSets {
  std::vector<IndexSet> extents;             // E_p
  std::vector<IndexSet> intents;             // I_p
  std::vector<IndexSet> extent_distractors;  // E_n
  std::vector<IndexSet> intent_distractors;  // I_n
  std::vector<std::optional<std::size_t>> extent_distractor_of;  // extent -> E_n index
  std::vector<std::optional<std::size_t>> intent_distractor_of;  // intent -> I_n index
  std::vector<std::size_t> extent_source_of;                     // E_n index -> extent
  std::vector<std::size_t> intent_source_of;                     // I_n index -> intent
  double k = 0.5;
  std::vector<std::string> warnings;
};

inline constexpr int kDistractorRetries = 100;
inline constexpr int kResampleRetries = 100;

/// Number of members replaced in a distractor of an n-element set:
/// max(1, floor(k * n)), never more than n.
std::size_t replacement_count(double k, std::size_t n);

IntermediateSets build_intermediate_sets(const ConceptSet& concepts, const FormalContext& ctx,
                                         double k, std::uint64_t seed);

struct SetPair {
  IndexSet objects;
  IndexSet attributes;

  friend bool operator==(const SetPair&, const SetPair&) = default;
};

/// True when objects x attributes is contained in the incidence relation.
bool fully_connected(const FormalContext& ctx, const SetPair& pair);

struct ConceptSamples {
  std::vector<SetPair> positives;  // C_p
  std::vector<SetPair> negatives;  // C_n
  /// Positive pairs left without a matching negative after resampling.
  std::size_t unbalanced = 0;
  std::vector<std::string> warnings;
};

/// C_p holds every (extent, intent) combination whose product lies in I,
/// including cross-concept combinations. Each positive whose two distractors
/// form a pair that is not fully connected contributes that pair to C_n;
/// failing positives get freshly drawn distractors (up to kResampleRetries
/// attempts, `seed` drives the draws).
ConceptSamples generate_concept_samples(const IntermediateSets& sets, const FormalContext& ctx,
                                        std::uint64_t seed);

struct ContextSamples {
  std::vector<SetPair> positives;  // T_p, one ({g}, {m}) per incidence
  std::vector<SetPair> negatives;  // T_n, distinct non-incidences
  std::vector<std::string> warnings;
};

ContextSamples generate_context_samples(const FormalContext& ctx, std::uint64_t seed);

std::vector<Incidence> as_incidences(std::span<const SetPair> singletons);

enum class SampleKind { concept_sample, context_sample };

std::string_view to_string(SampleKind kind);

/// Member index used for padding slots.
inline constexpr std::uint32_t kPadSlot = std::numeric_limits<std::uint32_t>::max();

struct PaddedSample {
  std::vector<std::uint32_t> objects;     // length l_ext, real members first
  std::vector<std::uint32_t> attributes;  // length l_int
  int label = 0;
  SampleKind kind = SampleKind::context_sample;
};

struct PaddedSet {
  std::size_t l_ext = 1;
  std::size_t l_int = 1;
  std::vector<PaddedSample> samples;
};

/// Pads every sample to the longest concept-sample object and attribute set
/// (at least 1 each). Order: C_p, C_n, T_p, T_n.
PaddedSet pad_samples(const ConceptSamples& concept_samples, const ContextSamples& context_samples);

/// Closed token vocabulary: [PAD], [CLS], [SEP], then "o:<id>" for every
/// object and "a:<id>" for every attribute in context order.
class Vocabulary {
 public:
  static constexpr std::uint32_t kPad = 0;
  static constexpr std::uint32_t kCls = 1;
  static constexpr std::uint32_t kSep = 2;
  static constexpr std::uint32_t kNumSpecial = 3;

  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);
  static Vocabulary from_context(const FormalContext& ctx);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t num_objects() const noexcept { return num_objects_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::string& token(std::uint32_t id) const { return tokens_.at(id); }
  /// Throws std::out_of_range for unknown tokens.
  std::uint32_t id(std::string_view token) const;
  std::optional<std::uint32_t> find(std::string_view token) const;

  std::uint32_t object_id(std::uint32_t object) const;
  std::uint32_t attribute_id(std::uint32_t attribute) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
  std::size_t num_objects_ = 0;
};

using TokenSequence = std::vector<std::uint32_t>;

/// [CLS], objects, [SEP], attributes. Length 2 + l_ext + l_int.
TokenSequence tokenize(const PaddedSample& sample, const Vocabulary& vocab);

/// Same layout from token strings ("o:g1", "a:m1", "[PAD]"), padded on the
/// right to l_ext / l_int. Unknown tokens and oversize sets are errors.
TokenSequence tokenize(std::span<const std::string> objects, std::span<const std::string> attributes,
                       const Vocabulary& vocab, std::size_t l_ext, std::size_t l_int);

struct TokenizedSample {
  TokenSequence tokens;
  int label = 0;
  SampleKind kind = SampleKind::context_sample;
};

/// Everything the sample generator produces for one context.
struct SampleSet {
  IntermediateSets intermediate;
  ConceptSamples concept_samples;
  ContextSamples context_samples;
  PaddedSet padded;
};

/// Runs the whole generator: intermediate sets, concept samples, context
/// samples, padding. Sub-streams "distractor" and "context-negatives" of
/// `seed` drive the randomness.
SampleSet prepare_samples(const ConceptSet& concepts, const FormalContext& ctx, double k,
                          std::uint64_t seed);

/// JSON-lines: a {"meta": {...}} header carrying l_ext, l_int and the
/// vocabulary, then one {"x", "y", "label", "kind"} record per sample.
void write_samples(std::ostream& out, const PaddedSet& padded, const Vocabulary& vocab,
                   const std::string& metadata_json = "{}");

struct SampleFile {
  std::string metadata_json;
  Vocabulary vocab;
  std::size_t l_ext = 1;
  std::size_t l_int = 1;
  std::vector<TokenizedSample> samples;
};

SampleFile read_samples(std::istream& in);

}  // namespace biclink
