#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "headcount/bytes.hpp"

namespace headcount::bloom {

// m-bit Bloom filter with k probe positions per element, derived by double
// hashing: i_j = (h1 + j * h2) mod m, where (h1, h2) are the first two
// little-endian 64-bit words of SHA-256("headcount/bloom" | seed | element).
class BloomFilter {
 public:
  BloomFilter(std::uint32_t m, std::uint8_t k, std::uint64_t hash_seed);

  std::uint32_t m() const { return m_; }
  std::uint8_t k() const { return k_; }
  std::uint64_t hash_seed() const { return hash_seed_; }

  void insert(std::span<const std::uint8_t> element);
  bool contains(std::span<const std::uint8_t> element) const;
  std::vector<std::uint32_t> indices(std::span<const std::uint8_t> element) const;

  bool test(std::uint32_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::uint32_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  std::size_t bits_set() const;

  bool compatible(const BloomFilter& other) const {
    return m_ == other.m_ && k_ == other.k_ && hash_seed_ == other.hash_seed_;
  }

  // One byte per bit (0 or 1), the form handed to the encryption layer.
  std::vector<std::uint8_t> unpacked() const;
  static BloomFilter from_unpacked(std::uint32_t m, std::uint8_t k, std::uint64_t hash_seed,
                                   std::span<const std::uint8_t> bits);

  // Zeroes the bit array in place.
  void wipe();

  // m:u32 | k:u8 | hash_seed:u64 | ceil(m/8) bytes, LSB-first bit order.
  void serialize(ByteWriter& out) const;
  static BloomFilter deserialize(ByteReader& in);

  std::span<const std::uint64_t> words() const { return words_; }

  bool operator==(const BloomFilter&) const = default;

 private:
  std::uint32_t m_;
  std::uint8_t k_;
  std::uint64_t hash_seed_;
  std::vector<std::uint64_t> words_;
};

BloomFilter intersect(const BloomFilter& a, const BloomFilter& b);
BloomFilter unite(const BloomFilter& a, const BloomFilter& b);

// c = -(m/k) ln(1 - t/m); +infinity for a saturated filter.
double estimate_cardinality(std::uint64_t m, std::uint64_t k, std::uint64_t bits_set);

// |A| + |B| - |A u B| from the three estimates; for comparison runs against
// the AND-count estimator.
double estimate_intersection_inclusion_exclusion(const BloomFilter& a, const BloomFilter& b);

}  // namespace headcount::bloom
