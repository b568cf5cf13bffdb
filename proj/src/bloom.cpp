#include "headcount/bloom.hpp"

#include <openssl/crypto.h>

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "headcount/digest.hpp"

namespace headcount::bloom {
namespace {

std::uint64_t load_le64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

BloomFilter::BloomFilter(std::uint32_t m, std::uint8_t k, std::uint64_t hash_seed)
    : m_(m), k_(k), hash_seed_(hash_seed) {
  if (m < 8) throw std::invalid_argument("Bloom filter needs m >= 8");
  if (k < 1) throw std::invalid_argument("Bloom filter needs k >= 1");
  words_.assign((static_cast<std::size_t>(m) + 63) / 64, 0);
}

std::vector<std::uint32_t> BloomFilter::indices(std::span<const std::uint8_t> element) const {
  ByteWriter seed;
  seed.u64(hash_seed_);
  const auto d = Sha256().update("headcount/bloom").update(seed.bytes()).update(element).finish();
  const std::uint64_t h1 = load_le64(d.data()) % m_;
  const std::uint64_t h2 = load_le64(d.data() + 8) % m_;
  std::vector<std::uint32_t> out(k_);
  for (std::uint64_t j = 0; j < k_; ++j) {
    out[j] = static_cast<std::uint32_t>((h1 + j * h2) % m_);
  }
  return out;
}

void BloomFilter::insert(std::span<const std::uint8_t> element) {
  for (auto i : indices(element)) set(i);
}

bool BloomFilter::contains(std::span<const std::uint8_t> element) const {
  for (auto i : indices(element)) {
    if (!test(i)) return false;
  }
  return true;
}

std::size_t BloomFilter::bits_set() const {
  std::size_t total = 0;
  for (auto w : words_) total += std::popcount(w);
  return total;
}

std::vector<std::uint8_t> BloomFilter::unpacked() const {
  std::vector<std::uint8_t> out(m_);
  for (std::uint32_t i = 0; i < m_; ++i) out[i] = test(i) ? 1 : 0;
  return out;
}

BloomFilter BloomFilter::from_unpacked(std::uint32_t m, std::uint8_t k, std::uint64_t hash_seed,
                                       std::span<const std::uint8_t> bits) {
  BloomFilter bf(m, k, hash_seed);
  if (bits.size() != m) throw std::invalid_argument("unpacked filter has wrong length");
  for (std::uint32_t i = 0; i < m; ++i) {
    if (bits[i] > 1) throw std::invalid_argument("unpacked filter value is not a bit");
    if (bits[i]) bf.set(i);
  }
  return bf;
}

void BloomFilter::wipe() {
  OPENSSL_cleanse(words_.data(), words_.size() * sizeof(std::uint64_t));
}

void BloomFilter::serialize(ByteWriter& out) const {
  out.u32(m_).u8(k_).u64(hash_seed_);
  std::vector<std::uint8_t> packed((m_ + 7) / 8, 0);
  for (std::uint32_t i = 0; i < m_; ++i) {
    if (test(i)) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  out.raw(packed);
}

BloomFilter BloomFilter::deserialize(ByteReader& in) {
  const auto m = in.u32();
  const auto k = in.u8();
  const auto seed = in.u64();
  if (m < 8 || k < 1) throw DecodeError("invalid Bloom filter parameters");
  BloomFilter bf(m, k, seed);
  const auto packed = in.raw((m + 7) / 8);
  for (std::uint32_t i = 0; i < m; ++i) {
    if ((packed[i / 8] >> (i % 8)) & 1u) bf.set(i);
  }
  if (m % 8 != 0 && (packed.back() >> (m % 8)) != 0) {
    throw DecodeError("Bloom filter padding bits are not zero");
  }
  return bf;
}

BloomFilter intersect(const BloomFilter& a, const BloomFilter& b) {
  if (!a.compatible(b)) throw std::invalid_argument("Bloom filters differ in (m, k, hash_seed)");
  BloomFilter out(a.m(), a.k(), a.hash_seed());
  for (std::uint32_t i = 0; i < a.m(); ++i) {
    if (a.test(i) && b.test(i)) out.set(i);
  }
  return out;
}

BloomFilter unite(const BloomFilter& a, const BloomFilter& b) {
  if (!a.compatible(b)) throw std::invalid_argument("Bloom filters differ in (m, k, hash_seed)");
  BloomFilter out(a.m(), a.k(), a.hash_seed());
  for (std::uint32_t i = 0; i < a.m(); ++i) {
    if (a.test(i) || b.test(i)) out.set(i);
  }
  return out;
}

double estimate_cardinality(std::uint64_t m, std::uint64_t k, std::uint64_t bits_set) {
  if (m == 0 || k == 0) throw std::invalid_argument("estimate needs m > 0 and k > 0");
  if (bits_set > m) throw std::invalid_argument("bits set exceeds filter length");
  if (bits_set == m) return std::numeric_limits<double>::infinity();
  const double md = static_cast<double>(m);
  return -(md / static_cast<double>(k)) * std::log1p(-static_cast<double>(bits_set) / md);
}

double estimate_intersection_inclusion_exclusion(const BloomFilter& a, const BloomFilter& b) {
  const auto u = unite(a, b);
  return estimate_cardinality(a.m(), a.k(), a.bits_set()) +
         estimate_cardinality(b.m(), b.k(), b.bits_set()) -
         estimate_cardinality(u.m(), u.k(), u.bits_set());
}

}  // namespace headcount::bloom
