#include <cmath>
#include <numbers>

#include "doctest.h"
#include "headcount/simhash.hpp"

using headcount::BitString;
using headcount::hamming;
namespace sh = headcount::simhash;

namespace {

BitString random_bits(std::size_t n, headcount::Rng& rng) {
  BitString b(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng() & 1u) b.set(i);
  }
  return b;
}

Eigen::VectorXd random_vector(std::size_t d, headcount::Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

TEST_CASE("hyperplanes are reproducible from (n, d, seed)") {
  const auto a = sh::make_hyperplanes(63, 128, 7);
  const auto b = sh::make_hyperplanes(63, 128, 7);
  CHECK(a == b);
  CHECK_FALSE(a == sh::make_hyperplanes(63, 128, 8));
  const auto p = sh::make_hyperplanes(127, 128, 1);
  CHECK(p.bits() == 127);
  CHECK(p.dim() == 128);
  CHECK_THROWS_AS(sh::make_hyperplanes(0, 128, 1), std::invalid_argument);
  CHECK_THROWS_AS(sh::make_hyperplanes(8, 1, 1), std::invalid_argument);
}

TEST_CASE("float planes follow the same stream") {
  const auto d = sh::make_hyperplanes<double>(16, 8, 3);
  const auto f = sh::make_hyperplanes<float>(16, 8, 3);
  CHECK((d.planes().cast<float>() - f.planes()).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("simhash sign conventions") {
  auto rng = headcount::make_rng(5);
  const auto planes = sh::make_hyperplanes(127, 32, 9);
  for (int rep = 0; rep < 50; ++rep) {
    const auto v = random_vector(32, rng);
    const auto h = sh::simhash(v, planes);
    CHECK(h.size() == 127);
    CHECK(hamming(h, sh::simhash(v, planes)) == 0);
    CHECK(sh::simhash(Eigen::VectorXd(-v), planes) == ~h);
    // Positive scaling never changes a sign.
    CHECK(sh::simhash(Eigen::VectorXd(3.5 * v), planes) == h);
  }
  CHECK_THROWS_AS(sh::simhash(Eigen::VectorXd::Ones(31), planes), std::invalid_argument);
}

TEST_CASE("a zero projection maps to bit 1") {
  const auto planes = sh::make_hyperplanes(8, 4, 2);
  CHECK(sh::simhash(Eigen::VectorXd::Zero(4), planes).popcount() == 8);
}

TEST_CASE("mean Hamming ratio matches angle / pi over random plane sets") {
  // Two unit vectors 60 degrees apart; collision oracle gives 1/3.
  const double theta = std::numbers::pi / 3;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(16);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(16);
  u(0) = 1;
  v(0) = std::cos(theta);
  v(1) = std::sin(theta);
  constexpr std::size_t kBits = 64;
  double total = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto planes = sh::make_hyperplanes(kBits, 16, seed);
    total += static_cast<double>(hamming(sh::simhash(u, planes), sh::simhash(v, planes))) / kBits;
  }
  CHECK(std::abs(total / 2000 - theta / std::numbers::pi) <= 0.03);
}

TEST_CASE("consensus is a majority vote with ties to zero") {
  const auto w = BitString::from_string("0110");
  CHECK(sh::consensus(std::vector{w}) == w);
  const std::vector three{BitString::from_string("01"), BitString::from_string("01"),
                          BitString::from_string("10")};
  CHECK(sh::consensus(three) == BitString::from_string("01"));
  const std::vector two{BitString::from_string("01"), BitString::from_string("10")};
  CHECK(sh::consensus(two) == BitString::from_string("00"));
  CHECK_THROWS(sh::consensus(std::vector<BitString>{}));
  CHECK_THROWS(sh::consensus(std::vector{BitString(3), BitString(4)}));
}

TEST_CASE("consensus of identical copies is the copy") {
  auto rng = headcount::make_rng(21);
  for (std::size_t k = 1; k <= 9; ++k) {
    const auto w = random_bits(127, rng);
    CHECK(sh::consensus(std::vector<BitString>(k, w)) == w);
  }
}

TEST_CASE("hamming equals a bit-by-bit count") {
  auto rng = headcount::make_rng(3);
  CHECK(hamming(BitString::from_string("0000"), BitString::from_string("1111")) == 4);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + rng() % 300;
    const auto a = random_bits(n, rng);
    const auto b = random_bits(n, rng);
    std::size_t naive = 0;
    for (std::size_t i = 0; i < n; ++i) naive += a.test(i) != b.test(i);
    CHECK(hamming(a, b) == naive);
    CHECK(hamming(a, a) == 0);
  }
}
