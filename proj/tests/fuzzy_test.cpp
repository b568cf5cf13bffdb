#include <stdexcept>

#include "doctest.h"
#include "headcount/fuzzy.hpp"

using headcount::BitString;
using headcount::hamming;
namespace bch = headcount::bch;
namespace fz = headcount::fuzzy;

namespace {

BitString random_word(std::size_t n, headcount::Rng& rng) {
  BitString b(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng() & 1u) b.set(i);
  }
  return b;
}

BitString random_error(std::size_t n, std::size_t weight, headcount::Rng& rng) {
  BitString e(n);
  while (e.popcount() < weight) e.set(rng() % n);
  return e;
}

}  // namespace

TEST_CASE("zero-noise reproduction and the offset identity") {
  auto rng = headcount::make_rng(1);
  for (const auto& params : {bch::CodeParams{15, 5, 3}, bch::CodeParams{63, 7, 15},
                             bch::CodeParams{127, 8, 31}, bch::CodeParams{255, 9, 63}}) {
    const auto code = bch::BchCode::lookup(params);
    for (int rep = 0; rep < 20; ++rep) {
      const auto w = random_word(static_cast<std::size_t>(code.n()), rng);
      const auto e = fz::gen(w, code, rng());
      const auto r = fz::rep(w, e.helper);
      REQUIRE(r.has_value());
      CHECK(r->id == e.id);
      CHECK(r->errors_corrected == 0);
      const auto d = code.decode(e.helper.offset ^ w);
      REQUIRE(d.has_value());
      CHECK(d->errors_corrected == 0);
      CHECK(e.helper.code == params);
    }
  }
}

TEST_CASE("different codeword seeds give different offsets, both reproduce") {
  const auto code = bch::BchCode::lookup({127, 8, 31});
  auto rng = headcount::make_rng(2);
  const auto w = random_word(127, rng);
  const auto a = fz::gen(w, code, 100);
  const auto b = fz::gen(w, code, 101);
  CHECK_FALSE(a.helper.offset == b.helper.offset);
  const auto noisy = w ^ random_error(127, 20, rng);
  CHECK(fz::rep(noisy, a.helper)->id == a.id);
  CHECK(fz::rep(noisy, b.helper)->id == b.id);
}

TEST_CASE("the key depends on salt and input only") {
  const auto code = bch::BchCode::lookup({63, 7, 15});
  auto rng = headcount::make_rng(3);
  const auto w = random_word(63, rng);
  fz::Salt salt{};
  salt.fill(0x5a);
  const auto a = fz::gen(w, code, 1, salt);
  const auto b = fz::gen(w, code, 2, salt);
  CHECK_FALSE(a.helper.offset == b.helper.offset);
  CHECK(a.id == b.id);
  CHECK(a.helper.tag == b.helper.tag);
}

TEST_CASE("exhaustive correction radius at (15,5,3)") {
  const auto code = bch::BchCode::lookup({15, 5, 3});
  auto rng = headcount::make_rng(4);
  for (int rep = 0; rep < 8; ++rep) {
    const auto w = random_word(15, rng);
    const auto e = fz::gen(w, code, rng());
    for (std::uint32_t mask = 0; mask < (1u << 15); ++mask) {
      if (std::popcount(mask) > 3) continue;
      BitString err(15);
      for (int j = 0; j < 15; ++j) {
        if ((mask >> j) & 1u) err.set(j);
      }
      const auto r = fz::rep(w ^ err, e.helper);
      REQUIRE(r.has_value());
      CHECK(r->id == e.id);
    }
  }
}

TEST_CASE("sampled correction radius at production sizes") {
  auto rng = headcount::make_rng(5);
  for (const auto& params : {bch::CodeParams{63, 7, 15}, bch::CodeParams{127, 8, 31},
                             bch::CodeParams{255, 9, 63}}) {
    const auto code = bch::BchCode::lookup(params);
    const auto w = random_word(static_cast<std::size_t>(code.n()), rng);
    const auto e = fz::gen(w, code, rng());
    for (int weight = 0; weight <= code.t(); ++weight) {
      for (int rep = 0; rep < 20; ++rep) {
        const auto err = random_error(static_cast<std::size_t>(code.n()),
                                      static_cast<std::size_t>(weight), rng);
        const auto r = fz::rep(w ^ err, e.helper);
        REQUIRE(r.has_value());
        CHECK(r->id == e.id);
        CHECK(r->errors_corrected == static_cast<std::size_t>(weight));
      }
    }
  }
}

TEST_CASE("unrelated inputs rarely reproduce") {
  const auto code = bch::BchCode::lookup({127, 8, 31});
  auto rng = headcount::make_rng(6);
  const auto w = random_word(127, rng);
  const auto e = fz::gen(w, code, 7);
  int no_match = 0;
  constexpr int kTrials = 10000;
  for (int i = 0; i < kTrials; ++i) no_match += !fz::rep(random_word(127, rng), e.helper);
  CHECK(no_match >= 0.99 * kTrials);
}

TEST_CASE("a corrupted tag never matches") {
  const auto code = bch::BchCode::lookup({63, 7, 15});
  auto rng = headcount::make_rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const auto w = random_word(63, rng);
    auto e = fz::gen(w, code, rng());
    e.helper.tag[rep % 8] ^= 0x01;
    CHECK_FALSE(fz::rep(w, e.helper).has_value());
    CHECK_FALSE(fz::rep(w ^ random_error(63, 5, rng), e.helper).has_value());
  }
}

TEST_CASE("accepted reproductions always carry the enrolled key") {
  // (15,5,3) miscorrects constantly on random input, so every acceptance here
  // went through the tag.
  const auto code = bch::BchCode::lookup({15, 5, 3});
  auto rng = headcount::make_rng(8);
  std::vector<fz::Enrollment> enrolled;
  std::vector<BitString> inputs;
  for (int i = 0; i < 4; ++i) {
    inputs.push_back(random_word(15, rng));
    enrolled.push_back(fz::gen(inputs.back(), code, rng()));
  }
  std::size_t accepted = 0;
  std::size_t wrong = 0;
  for (int trial = 0; trial < 1000000; ++trial) {
    const auto& e = enrolled[trial % 4];
    const auto probe = random_word(15, rng);
    if (auto r = fz::rep(probe, e.helper)) {
      ++accepted;
      wrong += !(r->id == e.id) || hamming(probe, inputs[trial % 4]) > 3;
    }
  }
  CHECK(accepted > 0);
  CHECK(wrong == 0);
}

TEST_CASE("helper data of re-enrollments looks independent") {
  const auto code = bch::BchCode::lookup({127, 8, 31});
  auto rng = headcount::make_rng(9);
  const auto w = random_word(127, rng);
  double ones = 0;
  constexpr int kPairs = 200;
  for (int i = 0; i < kPairs; ++i) {
    const auto a = fz::gen(w, code, rng);
    const auto b = fz::gen(w, code, rng);
    CHECK_FALSE(a.helper.salt == b.helper.salt);
    CHECK_FALSE(a.helper.tag == b.helper.tag);
    CHECK_FALSE(a.id == b.id);
    ones += static_cast<double>((a.helper.offset ^ b.helper.offset).popcount()) / 127.0;
  }
  CHECK(std::abs(ones / kPairs - 0.5) < 0.05);
}

TEST_CASE("helper data wire layout") {
  const auto code = bch::BchCode::lookup({15, 5, 3});
  fz::Salt salt{};
  for (std::size_t i = 0; i < salt.size(); ++i) salt[i] = static_cast<std::uint8_t>(i);
  const auto w = BitString::from_string("101100111000011");
  const auto e = fz::gen(w, code, 3, salt);
  const auto bytes = e.helper.to_bytes();
  REQUIRE(bytes.size() == 6 + 2 + 16 + 8);
  CHECK(bytes[0] == 15);
  CHECK(bytes[1] == 0);
  CHECK(bytes[2] == 5);
  CHECK(bytes[4] == 3);
  const auto packed = e.helper.offset.to_bytes();
  CHECK(bytes[6] == packed[0]);
  CHECK(bytes[7] == packed[1]);
  CHECK((bytes[7] & 1u) == 0);  // padding bit
  CHECK(bytes[8] == 0);
  CHECK(bytes[23] == 15);
  headcount::ByteReader in(bytes);
  CHECK(fz::HelperData::deserialize(in) == e.helper);
  CHECK(in.remaining() == 0);

  auto truncated = bytes;
  truncated.pop_back();
  headcount::ByteReader short_in(truncated);
  CHECK_THROWS_AS(fz::HelperData::deserialize(short_in), headcount::DecodeError);
}

TEST_CASE("length mismatches are errors, not NoMatch") {
  const auto code = bch::BchCode::lookup({63, 7, 15});
  CHECK_THROWS_AS(fz::gen(BitString(62), code, 1), std::invalid_argument);
  const auto e = fz::gen(BitString(63), code, 1);
  CHECK_THROWS_AS(fz::rep(BitString(64), e.helper), std::invalid_argument);
}
