#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "headcount/he/types.hpp"

namespace headcount::eval {

struct E2EConfig {
  double overlap = 0.5;        // fraction of A's identities that reappear at B
  std::size_t identities = 130;  // per site
  he::Backend backend = he::Backend::lattice;
  int n_bits = 128;
  double error_ratio = 0.25;
  std::uint32_t bloom_m = 4096;
  std::uint8_t bloom_k = 3;
  std::size_t runs = 10;
  std::uint64_t master_seed = 0;
  std::size_t per_site = 4;
  std::size_t dim = 128;
  double flip_ratio = 0.10;
  bool zero_noise = false;

  std::size_t shared() const;  // G = round(overlap * identities)
  void validate() const;
};

struct E2ERun {
  std::uint64_t seed = 0;
  std::size_t shared = 0;
  std::uint64_t t = 0;         // decrypted intersection bit count
  std::uint64_t oracle_t = 0;  // popcount(AND) of the plaintext filters
  double estimated_flow = 0;
  double footfall_a = 0;
  double footfall_b = 0;
  std::size_t matched = 0;  // tracks at B that reproduced a helper
  double abs_error() const;
  double rel_error() const;  // 0 when nothing is shared and the estimate is 0
  bool exact() const { return t == oracle_t; }
};

struct E2EReport {
  E2EConfig cfg;
  double sigma = 0;
  std::vector<E2ERun> runs;
};

// Two sites with G shared identities and identities - G fresh ones at B,
// run through cameras, an in-process server and the client.
E2EReport run_e2e(const E2EConfig& cfg);

void write_e2e_csv(std::ostream& out, const E2EReport& report);

}  // namespace headcount::eval
