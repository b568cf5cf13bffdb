#include <stdexcept>

#include "doctest.h"
#include "headcount/bits.hpp"
#include "headcount/random.hpp"

using headcount::BitString;

namespace {

BitString random_bits(std::size_t n, headcount::Rng& rng) {
  BitString b(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng() & 1u) b.set(i);
  }
  return b;
}

}  // namespace

TEST_CASE("literal parsing and text forms") {
  const auto b = BitString::from_string("10100011");
  CHECK(b.size() == 8);
  CHECK(b.popcount() == 4);
  CHECK(b.to_hex() == "a3/8");
  CHECK(BitString::from_string("1").to_hex() == "80/1");
  CHECK(BitString::from_hex("a3/8") == b);
  CHECK_THROWS(BitString::from_string("10x"));
  CHECK_THROWS(BitString::from_hex("a3"));
  CHECK_THROWS(BitString::from_hex("a3/9"));
  CHECK_THROWS(BitString::from_hex("81/1"));  // padding bit set
}

TEST_CASE("packed and hex forms round-trip for random lengths") {
  auto rng = headcount::make_rng(11);
  for (std::size_t n : {1u, 7u, 8u, 15u, 63u, 64u, 65u, 127u, 255u}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto b = random_bits(n, rng);
      CHECK(BitString::from_bytes(b.to_bytes(), n) == b);
      CHECK(BitString::from_hex(b.to_hex()) == b);
    }
  }
}

TEST_CASE("complement keeps padding clear") {
  const auto b = BitString::from_string("0110011");
  const auto c = ~b;
  CHECK(c.to_string() == "1001100");
  CHECK(c.popcount() == 3);
  CHECK((b ^ c).popcount() == 7);
}

TEST_CASE("xor rejects ragged operands") {
  BitString a(8), b(9);
  CHECK_THROWS_AS(a ^= b, std::invalid_argument);
  CHECK_THROWS_AS(headcount::hamming(a, b), std::invalid_argument);
}
