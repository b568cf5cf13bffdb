#include <openssl/sha.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "headcount/bloom.hpp"
#include "headcount/random.hpp"

namespace bl = headcount::bloom;

namespace {

std::array<std::uint8_t, 32> random_id(headcount::Rng& rng) {
  std::array<std::uint8_t, 32> id{};
  for (auto& b : id) b = static_cast<std::uint8_t>(rng());
  return id;
}

// Independent rendition of the probe formula via OpenSSL's one-shot SHA256.
std::vector<std::uint32_t> oracle_indices(std::uint64_t seed, std::uint32_t m, int k,
                                          const std::array<std::uint8_t, 32>& id) {
  std::vector<unsigned char> msg;
  const std::string label = "headcount/bloom";
  msg.insert(msg.end(), label.begin(), label.end());
  for (int i = 0; i < 8; ++i) msg.push_back(static_cast<unsigned char>(seed >> (8 * i)));
  msg.insert(msg.end(), id.begin(), id.end());
  unsigned char d[32];
  SHA256(msg.data(), msg.size(), d);
  unsigned __int128 h1 = 0, h2 = 0;
  for (int i = 7; i >= 0; --i) {
    h1 = (h1 << 8) | d[i];
    h2 = (h2 << 8) | d[8 + i];
  }
  std::vector<std::uint32_t> out;
  for (int j = 0; j < k; ++j) out.push_back(static_cast<std::uint32_t>((h1 + j * (h2 % m)) % m));
  return out;
}

bl::BloomFilter random_filter(std::uint32_t m, headcount::Rng& rng, double density) {
  bl::BloomFilter bf(m, 3, 1);
  std::uniform_real_distribution<double> u;
  for (std::uint32_t i = 0; i < m; ++i) {
    if (u(rng) < density) bf.set(i);
  }
  return bf;
}

}  // namespace

TEST_CASE("fresh filters") {
  const bl::BloomFilter bf(4096, 3, 42);
  CHECK(bf.bits_set() == 0);
  CHECK(bl::estimate_cardinality(bf.m(), bf.k(), bf.bits_set()) == 0.0);
  CHECK(bf == bl::BloomFilter(4096, 3, 42));
  CHECK_THROWS_AS(bl::BloomFilter(7, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(bl::BloomFilter(64, 0, 0), std::invalid_argument);
}

TEST_CASE("insertion") {
  auto rng = headcount::make_rng(1);
  bl::BloomFilter bf(4096, 3, 42);
  const auto id = random_id(rng);
  bf.insert(id);
  CHECK(bf.bits_set() >= 1);
  CHECK(bf.bits_set() <= 3);
  const auto once = bf;
  bf.insert(id);
  CHECK(bf == once);
  CHECK(bf.contains(id));
}

TEST_CASE("probe positions follow the double-hash formula") {
  auto rng = headcount::make_rng(2);
  for (std::uint32_t m : {8u, 1000u, 4096u, 65536u}) {
    for (std::uint8_t k : {std::uint8_t{1}, std::uint8_t{3}, std::uint8_t{7}}) {
      const std::uint64_t seed = rng();
      const bl::BloomFilter bf(m, k, seed);
      for (int rep = 0; rep < 20; ++rep) {
        const auto id = random_id(rng);
        CHECK(bf.indices(id) == oracle_indices(seed, m, k, id));
      }
    }
  }
}

TEST_CASE("cardinality formula") {
  CHECK(bl::estimate_cardinality(1000, 4, 100) == doctest::Approx(26.34).epsilon(0.0004));
  CHECK(std::abs(bl::estimate_cardinality(1000, 4, 100) - 26.34) <= 0.01);
  CHECK(std::abs(bl::estimate_cardinality(4096, 3, 300) - 103.8) <= 0.1);
  CHECK(std::isinf(bl::estimate_cardinality(64, 3, 64)));
  CHECK_THROWS_AS(bl::estimate_cardinality(64, 3, 65), std::invalid_argument);
}

TEST_CASE("estimator is unbiased enough below a quarter load") {
  // n <= m / (4k) keeps the mean relative error under 5%.
  for (std::size_t n : {50u, 100u, 300u, 341u}) {
    double mean_est = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
      auto rng = headcount::make_rng(trial, n);
      bl::BloomFilter bf(4096, 3, trial);
      for (std::size_t i = 0; i < n; ++i) bf.insert(random_id(rng));
      mean_est += bl::estimate_cardinality(4096, 3, bf.bits_set());
    }
    mean_est /= 100;
    CHECK(std::abs(mean_est - static_cast<double>(n)) <= 0.05 * static_cast<double>(n));
  }
}

TEST_CASE("AND intersection laws") {
  auto rng = headcount::make_rng(3);
  bl::BloomFilter a(4096, 3, 9), b(4096, 3, 9), c(4096, 3, 9);
  std::vector<std::array<std::uint8_t, 32>> shared;
  for (int i = 0; i < 40; ++i) {
    const auto id = random_id(rng);
    a.insert(id);
    if (i % 2 == 0) {
      b.insert(id);
      shared.push_back(id);
    }
    if (i % 3 == 0) c.insert(id);
  }
  for (int i = 0; i < 30; ++i) b.insert(random_id(rng));

  CHECK(bl::intersect(a, a) == a);
  CHECK(bl::intersect(a, bl::BloomFilter(4096, 3, 9)).bits_set() == 0);
  CHECK(bl::intersect(a, b) == bl::intersect(b, a));
  CHECK(bl::intersect(bl::intersect(a, b), c) == bl::intersect(a, bl::intersect(b, c)));
  const auto ab = bl::intersect(a, b);
  for (const auto& id : shared) CHECK(ab.contains(id));
  CHECK_THROWS_AS(bl::intersect(a, bl::BloomFilter(4096, 3, 10)), std::invalid_argument);
  CHECK_THROWS_AS(bl::intersect(a, bl::BloomFilter(2048, 3, 9)), std::invalid_argument);
}

TEST_CASE("small overlap estimate") {
  auto rng = headcount::make_rng(4);
  const auto x = random_id(rng), y = random_id(rng), z = random_id(rng), q = random_id(rng);
  bl::BloomFilter a(4096, 3, 5), b(4096, 3, 5);
  for (const auto& id : {x, y, z}) a.insert(id);
  for (const auto& id : {y, z, q}) b.insert(id);
  const auto both = bl::intersect(a, b);
  CHECK(std::abs(bl::estimate_cardinality(4096, 3, both.bits_set()) - 2.0) < 0.5);
  CHECK(std::abs(bl::estimate_intersection_inclusion_exclusion(a, b) - 2.0) < 0.5);
}

TEST_CASE("bit counting matches a per-bit loop") {
  auto rng = headcount::make_rng(5);
  CHECK(bl::BloomFilter::from_unpacked(64, 1, 0, std::vector<std::uint8_t>(64, 1)).bits_set() ==
        64);
  for (int rep = 0; rep < 100; ++rep) {
    const auto bf = random_filter(1000 + static_cast<std::uint32_t>(rep), rng, 0.3);
    std::size_t naive = 0;
    for (std::uint32_t i = 0; i < bf.m(); ++i) naive += bf.test(i);
    CHECK(bf.bits_set() == naive);
  }
}

TEST_CASE("serialized layout") {
  bl::BloomFilter bf(12, 2, 0x0102030405060708ULL);
  bf.set(0);
  bf.set(9);
  headcount::ByteWriter w;
  bf.serialize(w);
  const std::vector<std::uint8_t> expected{12, 0, 0, 0, 2, 8, 7, 6, 5, 4, 3, 2, 1, 0x01, 0x02};
  CHECK(w.bytes() == expected);
  headcount::ByteReader r(w.bytes());
  CHECK(bl::BloomFilter::deserialize(r) == bf);

  auto bad = expected;
  bad.back() |= 0x80;  // padding bit beyond m
  headcount::ByteReader rb(bad);
  CHECK_THROWS_AS(bl::BloomFilter::deserialize(rb), headcount::DecodeError);
}

TEST_CASE("wipe clears the plaintext") {
  auto rng = headcount::make_rng(6);
  auto bf = random_filter(4096, rng, 0.1);
  bf.wipe();
  CHECK(bf.bits_set() == 0);
}
