#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "headcount/bch.hpp"
#include "headcount/bits.hpp"
#include "headcount/bytes.hpp"
#include "headcount/random.hpp"

// Code-offset fuzzy extractor.
//
// Enrollment publishes P = w ^ c for a uniformly random codeword c. Anyone
// holding w' within distance t of w recovers c by decoding w' ^ P, hence
// w = P ^ c. The key is derived from the recovered w (not from c, which has
// only 2^k possible values at the low code rates used here) and a published
// tag rejects miscorrections.
//
// P leaks n - k bits about w. With k as small as 7 an adversary holding P can
// enumerate all 2^k codewords and recover w, so helper data is only as
// private as the channel between the cameras.
namespace headcount::fuzzy {

using Salt = std::array<std::uint8_t, 16>;
using Tag = std::array<std::uint8_t, 8>;

struct Identifier {
  std::array<std::uint8_t, 32> bytes{};
  bool operator==(const Identifier&) const = default;
  auto operator<=>(const Identifier&) const = default;
};

struct HelperData {
  bch::CodeParams code;
  BitString offset;
  Salt salt{};
  Tag tag{};

  bool operator==(const HelperData&) const = default;

  // n:u16 | k:u16 | t:u16 | P | salt | tag
  void serialize(ByteWriter& out) const;
  static HelperData deserialize(ByteReader& in);
  std::vector<std::uint8_t> to_bytes() const;
};

struct Enrollment {
  Identifier id;
  HelperData helper;
};

struct Reproduction {
  Identifier id;
  std::size_t errors_corrected = 0;
};

// Codeword and salt are both drawn from rng.
Enrollment gen(const BitString& w, const bch::BchCode& code, Rng& rng);
Enrollment gen(const BitString& w, const bch::BchCode& code, std::uint64_t rng_seed);
// Salt forced by the caller; the codeword still comes from rng_seed.
Enrollment gen(const BitString& w, const bch::BchCode& code, std::uint64_t rng_seed,
               const Salt& salt);

// nullopt is NoMatch: decoding failed or the recovered input failed the tag.
std::optional<Reproduction> rep(const BitString& w_prime, const HelperData& helper);

Identifier derive_key(const Salt& salt, const BitString& w);
Tag derive_tag(const Salt& salt, const BitString& w);

}  // namespace headcount::fuzzy
