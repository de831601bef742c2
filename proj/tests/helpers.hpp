#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "biclink/context.hpp"

namespace testutil {

// g1..g3 x m1..m3: g1:{m1,m2}, g2:{m1,m2,m3}, g3:{m3}
inline biclink::FormalContext k1() {
  std::istringstream in("g1\tm1\ng1\tm2\ng2\tm1\ng2\tm2\ng2\tm3\ng3\tm3\n");
  return biclink::load_context(in);
}

inline biclink::FormalContext from_matrix(const std::vector<std::vector<int>>& m) {
  std::vector<std::string> objs, attrs;
  for (std::size_t i = 0; i < m.size(); ++i) objs.push_back("g" + std::to_string(i));
  for (std::size_t j = 0; j < (m.empty() ? 0 : m[0].size()); ++j) attrs.push_back("m" + std::to_string(j));
  std::vector<biclink::Incidence> inc;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j)
      if (m[i][j]) inc.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
  return biclink::FormalContext(objs, attrs, inc);
}

inline biclink::FormalContext random_context(std::mt19937_64& rng, std::size_t g, std::size_t m,
                                             double density) {
  std::bernoulli_distribution bit(density);
  std::vector<std::vector<int>> mat(g, std::vector<int>(m));
  for (auto& row : mat)
    for (auto& x : row) x = bit(rng);
  return from_matrix(mat);
}

using NaiveConcept = std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>;

// Concepts by definition: close every attribute subset with plain loops.
inline std::set<NaiveConcept> naive_concepts(const biclink::FormalContext& ctx) {
  const std::size_t ng = ctx.num_objects(), nm = ctx.num_attributes();
  std::set<NaiveConcept> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nm); ++mask) {
    std::vector<std::uint32_t> ext, in;
    for (std::uint32_t g = 0; g < ng; ++g) {
      bool all = true;
      for (std::uint32_t a = 0; a < nm; ++a)
        if ((mask >> a & 1U) && !ctx.has(g, a)) all = false;
      if (all) ext.push_back(g);
    }
    for (std::uint32_t a = 0; a < nm; ++a) {
      bool all = true;
      for (auto g : ext)
        if (!ctx.has(g, a)) all = false;
      if (all) in.push_back(a);
    }
    out.insert({ext, in});
  }
  return out;
}

template <class Concepts>
std::set<NaiveConcept> as_set(const Concepts& cs) {
  std::set<NaiveConcept> out;
  for (const auto& c : cs) out.insert({c.extent, c.intent});
  return out;
}

inline std::vector<std::string> names(const std::vector<std::string>& all, const std::vector<std::uint32_t>& idx) {
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

}  // namespace testutil
