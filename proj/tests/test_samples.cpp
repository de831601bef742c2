#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "biclink/samples.hpp"
#include "helpers.hpp"

using namespace biclink;
using testutil::k1;

namespace {

bool product_in_relation(const FormalContext& ctx, const IndexSet& a, const IndexSet& b) {
  for (auto g : a)
    for (auto m : b)
      if (!ctx.has(g, m)) return false;
  return true;
}

std::size_t symmetric_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet d;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(d));
  return d.size();
}

}  // namespace

TEST_CASE("replacement count") {
  CHECK(replacement_count(0.5, 2) == 1);
  CHECK(replacement_count(0.5, 1) == 1);
  CHECK(replacement_count(0.1, 5) == 1);
  CHECK(replacement_count(0.5, 9) == 4);
  CHECK(replacement_count(0.99, 3) == 2);
}

TEST_CASE("intermediate sets on K1") {
  const auto ctx = k1();
  const auto cs = mine_significant(ctx, {2, 3, 1, 2});
  const auto sets = build_intermediate_sets(cs, ctx, 0.5, 7);
  std::set<IndexSet> ep(sets.extents.begin(), sets.extents.end());
  std::set<IndexSet> ip(sets.intents.begin(), sets.intents.end());
  CHECK(ep == std::set<IndexSet>{{0, 1}, {1, 2}});
  CHECK(ip == std::set<IndexSet>{{0, 1}, {2}});

  for (std::size_t i = 0; i < sets.extent_distractors.size(); ++i) {
    const auto& d = sets.extent_distractors[i];
    const auto& src = sets.extents[sets.extent_source_of[i]];
    CHECK(d.size() <= src.size());
    CHECK(symmetric_difference(src, d) == 1);
    CHECK(ep.count(d) == 0);
    CHECK(sets.extent_distractor_of[sets.extent_source_of[i]] == i);
  }

  CHECK_THROWS_AS(build_intermediate_sets(cs, ctx, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_intermediate_sets(cs, ctx, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_intermediate_sets(ConceptSet{}, ctx, 0.5, 1), std::invalid_argument);
}

TEST_CASE("a distractor is impossible with a single object") {
  const auto ctx = testutil::from_matrix({{1, 1}});
  const auto cs = mine_significant(ctx, SizeBounds::unbounded());
  const auto sets = build_intermediate_sets(cs, ctx, 0.5, 1);
  CHECK(sets.extent_distractors.empty());
  CHECK_FALSE(sets.warnings.empty());
}

TEST_CASE("concept samples on K1") {
  const auto ctx = k1();
  const auto cs = mine_significant(ctx, {2, 3, 1, 2});
  const auto sets = build_intermediate_sets(cs, ctx, 0.5, 7);
  const auto s = generate_concept_samples(sets, ctx, 9);
  std::set<std::pair<IndexSet, IndexSet>> cp;
  for (const auto& p : s.positives) cp.insert({p.objects, p.attributes});
  CHECK(cp == std::set<std::pair<IndexSet, IndexSet>>{{{0, 1}, {0, 1}}, {{1, 2}, {2}}});
  for (const auto& n : s.negatives) CHECK_FALSE(fully_connected(ctx, n));
  CHECK(s.negatives.size() + s.unbalanced == s.positives.size());
}

TEST_CASE("cross combinations of extents and intents are positives") {
  // Two concepts whose extent/intent cross pairs are also connected.
  const auto ctx = testutil::from_matrix({{1, 1, 1}, {1, 1, 1}, {1, 1, 0}});
  const auto cs = mine_significant(ctx, SizeBounds::unbounded());
  const auto sets = build_intermediate_sets(cs, ctx, 0.5, 2);
  const auto s = generate_concept_samples(sets, ctx, 3);
  std::size_t expected = 0;
  for (const auto& a : sets.extents)
    for (const auto& b : sets.intents) expected += product_in_relation(ctx, a, b);
  CHECK(s.positives.size() == expected);
  CHECK(expected > cs.concepts.size());
}

TEST_CASE("context samples on K1 use every non-edge") {
  const auto ctx = k1();
  const auto s = generate_context_samples(ctx, 4);
  CHECK(s.positives.size() == 6);
  std::set<Incidence> tn;
  for (const auto& e : as_incidences(s.negatives)) tn.insert(e);
  std::set<Incidence> complement;
  for (std::uint32_t g = 0; g < 3; ++g)
    for (std::uint32_t m = 0; m < 3; ++m)
      if (!ctx.has(g, m)) complement.insert({g, m});
  CHECK(tn == complement);
  CHECK(tn.size() == 3);
  CHECK_FALSE(s.warnings.empty());

  const auto full = testutil::from_matrix({{1, 1}, {1, 1}});
  const auto f = generate_context_samples(full, 1);
  CHECK(f.negatives.empty());
  CHECK_FALSE(f.warnings.empty());

  std::mt19937_64 rng(1);
  const auto big = testutil::random_context(rng, 20, 20, 0.2);
  const auto a = generate_context_samples(big, 12);
  const auto b = generate_context_samples(big, 12);
  CHECK(a.negatives == b.negatives);
  CHECK(a.negatives.size() == a.positives.size());
}

TEST_CASE("padding and tokenization") {
  const auto ctx = k1();
  ConceptSamples cs;
  cs.positives.push_back({{0, 1}, {0, 1}});
  ContextSamples ts;
  ts.positives.push_back({{0}, {0}});
  const auto padded = pad_samples(cs, ts);
  CHECK(padded.l_ext == 2);
  CHECK(padded.l_int == 2);
  REQUIRE(padded.samples.size() == 2);
  CHECK(padded.samples[0].objects == std::vector<std::uint32_t>{0, 1});
  CHECK(padded.samples[1].objects == std::vector<std::uint32_t>{0, kPadSlot});

  const auto vocab = Vocabulary::from_context(ctx);
  CHECK(vocab.size() == 3 + 3 + 3);
  const auto tokens = tokenize(padded.samples[1], vocab);
  const TokenSequence expected = {Vocabulary::kCls, vocab.id("o:g1"), Vocabulary::kPad, Vocabulary::kSep,
                                  vocab.id("a:m1"), Vocabulary::kPad};
  CHECK(tokens == expected);

  const std::vector<std::string> objs = {"o:g1"}, attrs = {"a:m1"};
  CHECK(tokenize(objs, attrs, vocab, 2, 2) == expected);
  const std::vector<std::string> unknown = {"o:zz"};
  CHECK_THROWS(tokenize(unknown, attrs, vocab, 2, 2));
  const std::vector<std::string> too_many = {"o:g1", "o:g2", "o:g3"};
  CHECK_THROWS(tokenize(too_many, attrs, vocab, 2, 2));

  const auto empty = pad_samples({}, ts);
  CHECK(empty.l_ext == 1);
  CHECK(empty.l_int == 1);
}

TEST_CASE("prepared samples satisfy their invariants on random contexts") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ctx = testutil::random_context(rng, 4 + rng() % 8, 4 + rng() % 8, 0.4);
    const auto cs = mine_significant(ctx, {1, SizeBounds::kUnbounded, 1, SizeBounds::kUnbounded});
    if (cs.concepts.empty()) continue;
    const auto s = prepare_samples(cs, ctx, 0.5, trial);
    for (const auto& p : s.concept_samples.positives) CHECK(fully_connected(ctx, p));
    for (const auto& n : s.concept_samples.negatives) CHECK_FALSE(fully_connected(ctx, n));
    for (const auto& e : as_incidences(s.context_samples.negatives)) CHECK_FALSE(ctx.has(e.object, e.attribute));
    CHECK(s.concept_samples.negatives.size() <= s.concept_samples.positives.size());
    const auto& in = s.intermediate;
    std::set<IndexSet> ep(in.extents.begin(), in.extents.end()), ip(in.intents.begin(), in.intents.end());
    for (const auto& d : in.extent_distractors) CHECK(ep.count(d) == 0);
    for (const auto& d : in.intent_distractors) CHECK(ip.count(d) == 0);
    CHECK(s.padded.samples.size() ==
          s.concept_samples.positives.size() + s.concept_samples.negatives.size() +
              s.context_samples.positives.size() + s.context_samples.negatives.size());
    for (const auto& p : s.padded.samples) {
      CHECK(p.objects.size() == s.padded.l_ext);
      CHECK(p.attributes.size() == s.padded.l_int);
      CHECK(std::is_partitioned(p.objects.begin(), p.objects.end(), [](auto x) { return x != kPadSlot; }));
    }
  }
}

TEST_CASE("samples file round trip is byte-stable") {
  std::mt19937_64 rng(3);
  const auto ctx = testutil::random_context(rng, 8, 8, 0.5);
  const auto cs = mine_significant(ctx, {2, SizeBounds::kUnbounded, 2, SizeBounds::kUnbounded});
  const auto vocab = Vocabulary::from_context(ctx);
  std::ostringstream a, b;
  write_samples(a, prepare_samples(cs, ctx, 0.5, 5).padded, vocab, R"({"seed":5})");
  write_samples(b, prepare_samples(cs, ctx, 0.5, 5).padded, vocab, R"({"seed":5})");
  CHECK(a.str() == b.str());

  std::istringstream in(a.str());
  const auto file = read_samples(in);
  const auto s = prepare_samples(cs, ctx, 0.5, 5);
  REQUIRE(file.samples.size() == s.padded.samples.size());
  CHECK(file.l_ext == s.padded.l_ext);
  CHECK(file.vocab.tokens() == vocab.tokens());
  for (std::size_t i = 0; i < file.samples.size(); ++i) {
    CHECK(file.samples[i].tokens == tokenize(s.padded.samples[i], vocab));
    CHECK(file.samples[i].label == s.padded.samples[i].label);
  }
}
