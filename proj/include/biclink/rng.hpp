#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace biclink {

using Rng = std::mt19937_64;

/// Seed of a named sub-stream ("split", "distractor", "negatives", "init",
/// "shuffle", ...) derived from one root seed. Stages that draw from different
/// streams stay reproducible independently of each other.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

/// Seed for an indexed sub-stream, e.g. one dropout stream per training sample.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b);

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// 64-bit FNV-1a, used for content fingerprints.
std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ULL);

}  // namespace biclink
