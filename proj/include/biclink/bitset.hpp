#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace biclink {

/// Fixed-width bitset sized at runtime. All bits past size() are kept zero so
/// that word-level comparisons and popcounts stay exact.
class Bitset {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  Bitset() = default;
  explicit Bitset(std::size_t nbits, bool value = false);

  static Bitset from_indices(std::size_t nbits, std::span<const std::uint32_t> indices);

  std::size_t size() const noexcept { return nbits_; }
  std::size_t num_words() const noexcept { return words_.size(); }
  std::span<const Word> words() const noexcept { return words_; }

  bool test(std::size_t i) const noexcept {
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
  }
  void set(std::size_t i) noexcept { words_[i / kWordBits] |= Word{1} << (i % kWordBits); }
  void reset(std::size_t i) noexcept { words_[i / kWordBits] &= ~(Word{1} << (i % kWordBits)); }
  void set_all() noexcept;
  void reset_all() noexcept;

  std::size_t count() const noexcept;
  bool any() const noexcept;
  bool none() const noexcept { return !any(); }

  Bitset& operator&=(const Bitset& other) noexcept;
  Bitset& operator|=(const Bitset& other) noexcept;
  /// this = this \ other
  Bitset& subtract(const Bitset& other) noexcept;

  friend Bitset operator&(Bitset lhs, const Bitset& rhs) noexcept { return lhs &= rhs; }
  friend Bitset operator|(Bitset lhs, const Bitset& rhs) noexcept { return lhs |= rhs; }

  bool is_subset_of(const Bitset& other) const noexcept;
  bool intersects(const Bitset& other) const noexcept;

  /// True when (*this \ base) has a member with index < end.
  bool has_new_member_below(const Bitset& base, std::size_t end) const noexcept;

  std::vector<std::uint32_t> to_indices() const;

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      Word word = words_[w];
      while (word != 0) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(word));
        f(static_cast<std::uint32_t>(w * kWordBits + bit));
        word &= word - 1;
      }
    }
  }

  std::size_t hash() const noexcept;

  friend bool operator==(const Bitset& a, const Bitset& b) noexcept {
    return a.nbits_ == b.nbits_ && a.words_ == b.words_;
  }

 private:
  void clear_tail() noexcept;

  std::size_t nbits_ = 0;
  std::vector<Word> words_;
};

struct BitsetHash {
  std::size_t operator()(const Bitset& b) const noexcept { return b.hash(); }
};

}  // namespace biclink
