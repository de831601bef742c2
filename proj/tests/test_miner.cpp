#include <doctest.h>

#include <array>
#include <random>
#include <set>
#include <sstream>

#include "biclink/miner.hpp"
#include "helpers.hpp"

using namespace biclink;
using testutil::k1;
using testutil::NaiveConcept;

namespace {

constexpr std::size_t inf = SizeBounds::kUnbounded;

std::set<NaiveConcept> filtered(const std::set<NaiveConcept>& all, const SizeBounds& b) {
  std::set<NaiveConcept> out;
  for (const auto& c : all)
    if (b.admits(c.first.size(), c.second.size())) out.insert(c);
  return out;
}

}  // namespace

TEST_CASE("K1 unbounded gives its four concepts") {
  const auto ctx = k1();
  const auto cs = mine_significant(ctx, SizeBounds::unbounded());
  // g1,g2,g3 = 0,1,2 and m1,m2,m3 = 0,1,2
  const std::set<NaiveConcept> expected = {
      {{0, 1, 2}, {}}, {{0, 1}, {0, 1}}, {{1, 2}, {2}}, {{1}, {0, 1, 2}}};
  CHECK(testutil::naive_concepts(ctx) == expected);
  CHECK(testutil::as_set(cs.concepts) == expected);
  CHECK(cs.concepts.size() == 4);
  CHECK(testutil::as_set(enumerate_all_bruteforce(ctx).concepts) == expected);
}

TEST_CASE("K1 bounded (2,3,1,2)") {
  const auto cs = mine_significant(k1(), {2, 3, 1, 2});
  const std::set<NaiveConcept> expected = {{{0, 1}, {0, 1}}, {{1, 2}, {2}}};
  CHECK(testutil::as_set(cs.concepts) == expected);
}

TEST_CASE("complete context has the single concept (G, M)") {
  const auto ctx = testutil::from_matrix({{1, 1, 1}, {1, 1, 1}});
  const auto all = mine_significant(ctx, SizeBounds::unbounded());
  REQUIRE(all.concepts.size() == 1);
  CHECK(all.concepts[0].extent == IndexSet{0, 1});
  CHECK(all.concepts[0].intent == IndexSet{0, 1, 2});
  CHECK(mine_significant(ctx, {0, inf, 0, 2}).concepts.empty());
  CHECK(mine_significant(ctx, {3, inf, 0, inf}).concepts.empty());
  CHECK(mine_significant(ctx, {2, 2, 3, 3}).concepts.size() == 1);
}

TEST_CASE("root concept is filtered by every bound") {
  // Root intent {m0} has size 1, so u2 = 0 must drop it.
  const auto ctx = testutil::from_matrix({{1, 1}, {1, 0}});
  const auto cs = mine_significant(ctx, {0, inf, 0, 0});
  CHECK(cs.concepts.empty());
}

TEST_CASE("brute force special cases") {
  const auto empty = testutil::from_matrix({{0, 0}, {0, 0}});
  const std::set<NaiveConcept> e = {{{0, 1}, {}}, {{}, {0, 1}}};
  CHECK(testutil::as_set(enumerate_all_bruteforce(empty).concepts) == e);
  CHECK(testutil::as_set(mine_significant(empty, SizeBounds::unbounded()).concepts) == e);

  const auto one = testutil::from_matrix({{1}});
  const std::set<NaiveConcept> o = {{{0}, {0}}};
  CHECK(testutil::as_set(enumerate_all_bruteforce(one).concepts) == o);

  std::vector<std::vector<int>> wide(2, std::vector<int>(kBruteForceMaxAttributes + 1, 1));
  CHECK_THROWS_AS(enumerate_all_bruteforce(testutil::from_matrix(wide)), std::invalid_argument);
}

TEST_CASE("is_concept") {
  const auto ctx = k1();
  CHECK(is_concept(ctx, IndexSet{0, 1}, IndexSet{0, 1}));
  CHECK_FALSE(is_concept(ctx, IndexSet{0}, IndexSet{0, 1}));
  const auto empty = testutil::from_matrix({{0, 0}, {0, 0}});
  CHECK(is_concept(empty, IndexSet{0, 1}, IndexSet{}));
}

TEST_CASE("invalid bounds are rejected") {
  CHECK_THROWS_AS(mine_significant(k1(), {3, 2, 0, inf}), std::invalid_argument);
  CHECK_THROWS_AS(mine_significant(k1(), {0, inf, 2, 1}), std::invalid_argument);
}

TEST_CASE("random contexts: oracle, filter and monotonicity") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 90; ++trial) {
    const double density = std::array{0.1, 0.3, 0.6}[trial % 3];
    const auto ctx = testutil::random_context(rng, 1 + rng() % 10, 1 + rng() % 10, density);
    const auto oracle = testutil::naive_concepts(ctx);

    const auto cs = mine_significant(ctx, SizeBounds::unbounded());
    CHECK(testutil::as_set(cs.concepts) == oracle);
    CHECK(testutil::as_set(cs.concepts).size() == cs.concepts.size());
    for (const auto& c : cs.concepts) CHECK(is_concept(ctx, c.extent, c.intent));

    SizeBounds b{rng() % 4, 2 + rng() % 8, rng() % 3, 1 + rng() % 8};
    if (b.max_extent < b.min_extent) b.max_extent = b.min_extent;
    if (b.max_intent < b.min_intent) b.max_intent = b.min_intent;
    const auto bounded = mine_significant(ctx, b);
    CHECK(testutil::as_set(bounded.concepts) == filtered(oracle, b));
    CHECK(testutil::as_set(bounded.concepts).size() == bounded.concepts.size());

    SizeBounds looser = b;
    looser.max_intent += 1;
    const auto wider = testutil::as_set(mine_significant(ctx, looser).concepts);
    for (const auto& c : testutil::as_set(bounded.concepts)) CHECK(wider.count(c) == 1);

    const auto parallel = mine_significant(ctx, b, {4});
    CHECK(testutil::as_set(parallel.concepts) == testutil::as_set(bounded.concepts));
  }
}

TEST_CASE("mining is iterative on a deep lattice") {
  // Identity complement: 2^n concepts along chains of depth n.
  const std::size_t n = 14;
  std::vector<std::vector<int>> m(n, std::vector<int>(n, 1));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 0;
  const auto cs = mine_significant(testutil::from_matrix(m), SizeBounds::unbounded());
  CHECK(cs.concepts.size() == (std::size_t{1} << n));
}

TEST_CASE("concepts file round trip and canonical order") {
  const auto ctx = k1();
  const auto cs = mine_significant(ctx, {2, 3, 1, 2});
  std::stringstream io;
  write_concepts(io, ctx, cs, R"({"seed":3})");
  const std::string text = io.str();
  CHECK(text.rfind("# {", 0) == 0);
  CHECK(text.find("\"seed\":3") != std::string::npos);
  CHECK(text.find("g1,g2\tm1,m2\ng2,g3\tm3\n") != std::string::npos);

  const auto back = read_concepts(io, ctx);
  CHECK(testutil::as_set(back.concepts) == testutil::as_set(cs.concepts));
  CHECK(back.bounds == cs.bounds);

  std::istringstream forged("# {\"bounds\":{\"l1\":0,\"u1\":\"inf\",\"l2\":0,\"u2\":\"inf\"}}\ng1\tm1,m2\n");
  CHECK_THROWS(read_concepts(forged, ctx));

  std::ostringstream a, b;
  write_concepts(a, ctx, mine_significant(ctx, SizeBounds::unbounded()));
  write_concepts(b, ctx, mine_significant(ctx, SizeBounds::unbounded(), {3}));
  CHECK(a.str() == b.str());
}
