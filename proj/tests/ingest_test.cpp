#include <set>
#include <sstream>

#include "doctest.h"
#include "headcount/ingest.hpp"

namespace ing = headcount::ingest;

TEST_CASE("parses the embedding CSV and renormalizes") {
  std::istringstream in("id,frame,v0,v1,v2\np1,0,3,4,0\np1,1,0,0,2.5\n");
  const auto data = ing::parse_embeddings(in);
  REQUIRE(data.size() == 2);
  CHECK(data[0].identity_id == "p1");
  CHECK(data[1].identity_id == "p1");
  CHECK(data[0].frame_index == 0);
  CHECK(data[0].vector(0) == doctest::Approx(0.6));
  CHECK(data[0].vector(1) == doctest::Approx(0.8));
  CHECK(data[0].vector(2) == 0.0);
  for (const auto& e : data) CHECK(std::abs(e.vector.norm() - 1.0) < 1e-6);
}

TEST_CASE("short rows cite their line") {
  std::istringstream in("id,frame,v0,v1,v2\np1,0,1,0,0\np1,1,1,0\n");
  try {
    ing::parse_embeddings(in);
    FAIL("expected a parse error");
  } catch (const ing::ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("non-numeric values and zero vectors are rejected") {
  std::istringstream bad("id,frame,v0,v1\np1,0,1,abc\n");
  CHECK_THROWS_AS(ing::parse_embeddings(bad), ing::ParseError);
  std::istringstream frame("id,frame,v0,v1\np1,x,1,1\n");
  CHECK_THROWS_AS(ing::parse_embeddings(frame), ing::ParseError);
  std::istringstream zero("id,frame,v0,v1\np1,0,1,1\np2,4,0,0\n");
  try {
    ing::parse_embeddings(zero);
    FAIL("expected a zero-vector error");
  } catch (const ing::ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("p2") != std::string::npos);
  }
  std::istringstream header("name,frame,v0,v1\n");
  CHECK_THROWS_AS(ing::parse_embeddings(header), ing::ParseError);
}

TEST_CASE("written datasets parse back") {
  ing::SyntheticConfig cfg{3, 2, 5, 0.1, 9};
  const auto data = ing::gen_synthetic(cfg);
  std::stringstream io;
  ing::write_embeddings(io, data);
  const auto back = ing::parse_embeddings(io);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].identity_id == data[i].identity_id);
    CHECK((back[i].vector - data[i].vector).norm() < 1e-12);
  }
}

TEST_CASE("synthetic generator") {
  SUBCASE("zero noise repeats the mean direction") {
    const auto data = ing::gen_synthetic({4, 5, 16, 0.0, 1});
    for (const auto& track : ing::group_by_identity(data)) {
      for (const auto& f : track.frames) CHECK(f.vector == track.frames.front().vector);
    }
  }
  SUBCASE("130 identities with nine frames each") {
    const auto data = ing::gen_synthetic({130, 9, 128, 0.02, 5});
    CHECK(data.size() == 1170);
    CHECK(ing::group_by_identity(data).size() == 130);
    for (const auto& e : data) CHECK(std::abs(e.vector.norm() - 1.0) < 1e-6);
  }
  SUBCASE("same seed, same data") {
    const auto a = ing::gen_synthetic({10, 3, 32, 0.05, 77});
    const auto b = ing::gen_synthetic({10, 3, 32, 0.05, 77});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].vector == b[i].vector);
  }
  SUBCASE("invalid configs") {
    CHECK_THROWS(ing::gen_synthetic({0, 3, 32, 0.05, 1}));
    CHECK_THROWS(ing::gen_synthetic({1, 0, 32, 0.05, 1}));
    CHECK_THROWS(ing::gen_synthetic({1, 3, 1, 0.05, 1}));
    CHECK_THROWS(ing::gen_synthetic({1, 3, 32, -0.1, 1}));
  }
}

TEST_CASE("site split") {
  const auto data = ing::gen_synthetic({20, 9, 16, 0.05, 3});
  const auto split = ing::split_sites(data, 4, 11);
  REQUIRE(split.site_a.size() == 20);
  REQUIRE(split.site_b.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(split.site_a[i].identity_id == split.site_b[i].identity_id);
    std::set<int> a, b;
    for (const auto& f : split.site_a[i].frames) a.insert(f.frame_index);
    for (const auto& f : split.site_b[i].frames) b.insert(f.frame_index);
    CHECK(a.size() == 4);
    CHECK(b.size() == 4);
    for (int x : a) CHECK(b.count(x) == 0);
  }
  const auto again = ing::split_sites(data, 4, 11);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(again.site_a[i].frames[j].frame_index == split.site_a[i].frames[j].frame_index);
      CHECK(again.site_b[i].frames[j].frame_index == split.site_b[i].frames[j].frame_index);
    }
  }
  CHECK_THROWS_WITH_AS(ing::split_sites(data, 5, 11), doctest::Contains("id00"),
                       std::invalid_argument);
}

TEST_CASE("noise calibration") {
  CHECK(ing::calibrate_noise(0.0, 128, 127, 1) == 0.0);
  CHECK_THROWS(ing::calibrate_noise(0.5, 128, 127, 1));

  const double sigma = ing::calibrate_noise(0.10, 128, 127, 1);
  CHECK(sigma > 0.0);
  // Re-measure on an independent stream.
  const double measured = ing::measure_flip_ratio(sigma, 128, 127, 999, 400);
  CHECK(std::abs(measured - 0.10) <= 0.015);
}

TEST_CASE("flip ratio grows with sigma") {
  const double lo = ing::measure_flip_ratio(0.01, 64, 63, 4, 500);
  const double mid = ing::measure_flip_ratio(0.03, 64, 63, 4, 500);
  const double hi = ing::measure_flip_ratio(0.10, 64, 63, 4, 500);
  CHECK(lo <= mid);
  CHECK(mid <= hi);
  CHECK(ing::measure_flip_ratio(0.0, 64, 63, 4, 50) == 0.0);
}

TEST_CASE("near-random target either calibrates high or reports bounds") {
  try {
    const double s = ing::calibrate_noise(0.49, 32, 63, 2);
    CHECK(s > 0.5);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("unreachable") != std::string::npos);
  }
}
