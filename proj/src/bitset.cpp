#include "biclink/bitset.hpp"

#include <stdexcept>

namespace biclink {

Bitset::Bitset(std::size_t nbits, bool value)
    : nbits_(nbits), words_((nbits + kWordBits - 1) / kWordBits, value ? ~Word{0} : Word{0}) {
  clear_tail();
}

Bitset Bitset::from_indices(std::size_t nbits, std::span<const std::uint32_t> indices) {
  Bitset out(nbits);
  for (auto i : indices) {
    if (i >= nbits) throw std::out_of_range("bitset index out of range");
    out.set(i);
  }
  return out;
}

void Bitset::set_all() noexcept {
  for (auto& w : words_) w = ~Word{0};
  clear_tail();
}

void Bitset::reset_all() noexcept {
  for (auto& w : words_) w = 0;
}

std::size_t Bitset::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool Bitset::any() const noexcept {
  for (auto w : words_)
    if (w != 0) return true;
  return false;
}

Bitset& Bitset::operator&=(const Bitset& other) noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

Bitset& Bitset::operator|=(const Bitset& other) noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

Bitset& Bitset::subtract(const Bitset& other) noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
  return *this;
}

bool Bitset::is_subset_of(const Bitset& other) const noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if ((words_[i] & ~other.words_[i]) != 0) return false;
  return true;
}

bool Bitset::intersects(const Bitset& other) const noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if ((words_[i] & other.words_[i]) != 0) return true;
  return false;
}

bool Bitset::has_new_member_below(const Bitset& base, std::size_t end) const noexcept {
  const std::size_t full = end / kWordBits;
  for (std::size_t i = 0; i < full; ++i)
    if ((words_[i] & ~base.words_[i]) != 0) return true;
  const std::size_t rem = end % kWordBits;
  if (rem == 0) return false;
  const Word mask = (Word{1} << rem) - 1;
  return ((words_[full] & ~base.words_[full]) & mask) != 0;
}

std::vector<std::uint32_t> Bitset::to_indices() const {
  std::vector<std::uint32_t> out;
  out.reserve(count());
  for_each([&](std::uint32_t i) { out.push_back(i); });
  return out;
}

std::size_t Bitset::hash() const noexcept {
  // FNV-1a over the words
  std::uint64_t h = 1469598103934665603ULL;
  for (auto w : words_) {
    h ^= w;
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h ^ nbits_);
}

void Bitset::clear_tail() noexcept {
  const std::size_t rem = nbits_ % kWordBits;
  if (rem != 0 && !words_.empty()) words_.back() &= (Word{1} << rem) - 1;
}

}  // namespace biclink
