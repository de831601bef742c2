#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "biclink/context.hpp"
#include "helpers.hpp"

using namespace biclink;
using testutil::k1;

namespace {

IndexSet idx(const FormalContext& ctx, std::initializer_list<const char*> names, bool objects) {
  IndexSet out;
  for (auto n : names) out.push_back(objects ? ctx.object_index(n) : ctx.attribute_index(n));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("edge list parsing") {
  std::istringstream in("a\tx\r\n\nb\ty\na\tx\n");
  const auto ctx = load_context(in);
  CHECK(ctx.num_objects() == 2);
  CHECK(ctx.num_attributes() == 2);
  CHECK(ctx.num_incidences() == 2);
  CHECK(ctx.has(ctx.object_index("a"), ctx.attribute_index("x")));

  std::istringstream bad("a\tx\nbroken line\n");
  try {
    load_context(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream two_tabs("a\tb\tc\n");
  CHECK_THROWS_AS(load_context(two_tabs), ParseError);
  std::istringstream empty_id("\tb\n");
  CHECK_THROWS_AS(load_context(empty_id), ParseError);
  std::istringstream nothing("");
  CHECK_THROWS(load_context(nothing));
}

TEST_CASE("object and attribute namespaces are separate") {
  std::istringstream in("x\tx\n");
  const auto ctx = load_context(in);
  CHECK(ctx.object_token(0) == "o:x");
  CHECK(ctx.attribute_token(0) == "a:x");
  CHECK(ctx.has(0, 0));
}

TEST_CASE("derivations on K1") {
  const auto ctx = k1();
  CHECK(derive_intent(ctx, IndexSet{}) == IndexSet{0, 1, 2});
  CHECK(derive_intent(ctx, idx(ctx, {"g1", "g2"}, true)) == idx(ctx, {"m1", "m2"}, false));
  CHECK(derive_extent(ctx, IndexSet{}) == IndexSet{0, 1, 2});
  CHECK(derive_extent(ctx, idx(ctx, {"m3"}, false)) == idx(ctx, {"g2", "g3"}, true));
  CHECK(derive_extent(ctx, idx(ctx, {"m1", "m2", "m3"}, false)) == idx(ctx, {"g2"}, true));

  const auto c = closure(ctx, idx(ctx, {"m1"}, false));
  CHECK(c.extent == idx(ctx, {"g1", "g2"}, true));
  CHECK(c.intent == idx(ctx, {"m1", "m2"}, false));

  CHECK_THROWS(derive_intent(ctx, IndexSet{7}));
}

TEST_CASE("complete and empty contexts") {
  const auto full = testutil::from_matrix({{1, 1}, {1, 1}, {1, 1}});
  CHECK(derive_intent(full, IndexSet{0, 2}) == IndexSet{0, 1});
  const auto none = testutil::from_matrix({{0, 0}, {0, 0}});
  const auto c = closure(none, IndexSet{});
  CHECK(c.extent == IndexSet{0, 1});
  CHECK(c.intent.empty());
}

TEST_CASE("Galois connection, antitonicity and closure properties") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const auto ctx = testutil::random_context(rng, 1 + rng() % 8, 1 + rng() % 8, 0.4);
    auto random_subset = [&](std::size_t n) {
      IndexSet s;
      for (std::uint32_t i = 0; i < n; ++i)
        if (rng() % 2) s.push_back(i);
      return s;
    };
    const auto a = random_subset(ctx.num_objects());
    const auto b = random_subset(ctx.num_attributes());
    const auto a_int = derive_intent(ctx, a);
    const auto b_ext = derive_extent(ctx, b);
    CHECK(std::includes(b_ext.begin(), b_ext.end(), a.begin(), a.end()) ==
          std::includes(a_int.begin(), a_int.end(), b.begin(), b.end()));

    IndexSet a2 = a;
    for (std::uint32_t i = 0; i < ctx.num_objects(); ++i)
      if (rng() % 3 == 0 && !std::binary_search(a.begin(), a.end(), i)) a2.push_back(i);
    std::sort(a2.begin(), a2.end());
    const auto a2_int = derive_intent(ctx, a2);
    CHECK(std::includes(a_int.begin(), a_int.end(), a2_int.begin(), a2_int.end()));

    const auto c = closure(ctx, b);
    CHECK(std::includes(c.intent.begin(), c.intent.end(), b.begin(), b.end()));
    const auto cc = closure(ctx, c.intent);
    CHECK(cc.extent == c.extent);
    CHECK(cc.intent == c.intent);
  }
}

TEST_CASE("split removes round-half-up of the fraction") {
  CHECK(removal_count(10, 0.1) == 1);
  CHECK(removal_count(103845, 0.1) == 10385);
  CHECK(removal_count(100, 0.1) == 10);

  std::ostringstream edges;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) edges << "g" << i << "\tm" << j << '\n';
  std::istringstream in(edges.str());
  const auto ctx = load_context(in);
  const auto s1 = split_input_target(ctx, 0.1, 42);
  const auto s2 = split_input_target(ctx, 0.1, 42);
  CHECK(s1.removed_edges.size() == 10);
  CHECK(s1.input_context.num_incidences() == 90);
  CHECK(s1.removed_edges == s2.removed_edges);

  std::set<Incidence> all(ctx.incidence().begin(), ctx.incidence().end());
  std::set<Incidence> parts(s1.input_context.incidence().begin(), s1.input_context.incidence().end());
  for (const auto& e : s1.removed_edges) CHECK(parts.insert(e).second);
  CHECK(parts == all);

  CHECK_THROWS_AS(split_input_target(ctx, 1e-9, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_input_target(ctx, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_input_target(ctx, 1.0, 1), std::invalid_argument);
}

TEST_CASE("test set negatives") {
  const auto ctx = k1();
  const auto split = split_input_target(ctx, 0.2, 3);
  REQUIRE(split.removed_edges.size() == 1);
  const auto t = generate_test_set(split, {}, 5);
  CHECK(t.positives.size() == 1);
  CHECK(t.negatives.size() == 1);
  for (const auto& e : t.negatives) CHECK_FALSE(ctx.has(e.object, e.attribute));

  // Excluding two of the three non-edges leaves exactly one.
  const std::vector<Incidence> tn = {{ctx.object_index("g1"), ctx.attribute_index("m3")},
                                     {ctx.object_index("g3"), ctx.attribute_index("m1")}};
  const auto t2 = generate_test_set(split, tn, 5);
  REQUIRE(t2.negatives.size() == 1);
  CHECK(t2.negatives[0] == Incidence{ctx.object_index("g3"), ctx.attribute_index("m2")});

  const auto full = testutil::from_matrix({{1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}});
  const auto fs = split_input_target(full, 0.1, 1);
  const auto ft = generate_test_set(fs, {}, 1);
  CHECK(ft.negatives.empty());
  CHECK_FALSE(ft.warnings.empty());

  std::ostringstream a, b;
  write_test_set(a, split.input_context, generate_test_set(split, {}, 9));
  write_test_set(b, split.input_context, generate_test_set(split, {}, 9));
  CHECK(a.str() == b.str());
}

TEST_CASE("test set negatives are distinct non-edges on a sparse graph") {
  std::mt19937_64 rng(5);
  const auto ctx = testutil::random_context(rng, 30, 30, 0.2);
  const auto split = split_input_target(ctx, 0.1, 8);
  const auto t = generate_test_set(split, {}, 8);
  CHECK(t.negatives.size() == t.positives.size());
  std::set<Incidence> seen;
  for (const auto& e : t.negatives) {
    CHECK_FALSE(ctx.has(e.object, e.attribute));
    CHECK(seen.insert(e).second);
  }
}

TEST_CASE("test file round trip") {
  const auto ctx = k1();
  const auto split = split_input_target(ctx, 0.2, 3);
  const auto t = generate_test_set(split, {}, 5);
  std::stringstream io;
  write_test_set(io, split.input_context, t);
  const auto back = read_test_set(io);
  REQUIRE(back.size() == 2);
  CHECK(back[0].label == 1);
  CHECK(back[1].label == 0);
  std::istringstream bad("a\tb\t2\n");
  CHECK_THROWS_AS(read_test_set(bad), ParseError);
}

TEST_CASE("nodes seen only in removed edges become isolated nodes") {
  const auto dir = std::filesystem::temp_directory_path() / "biclink_ctx_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "in.tsv") << "a\tx\n";
  }
  const std::vector<EdgeName> extra = {{"b", "x"}, {"a", "y"}};
  const auto ctx = load_context_with_nodes(dir / "in.tsv", extra);
  CHECK(ctx.num_objects() == 2);
  CHECK(ctx.num_attributes() == 2);
  CHECK(ctx.num_incidences() == 1);
  CHECK(ctx.row(ctx.object_index("b")).none());
  std::filesystem::remove_all(dir);
}
