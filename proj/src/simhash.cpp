#include "headcount/simhash.hpp"

#include <vector>

namespace headcount::simhash {

BitString consensus(std::span<const BitString> hashes) {
  if (hashes.empty()) throw std::invalid_argument("consensus of an empty list");
  const std::size_t n = hashes.front().size();
  std::vector<std::size_t> ones(n, 0);
  for (const auto& h : hashes) {
    if (h.size() != n) throw std::invalid_argument("consensus over hashes of different lengths");
    for (std::size_t i = 0; i < n; ++i) ones[i] += h.test(i);
  }
  BitString out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (2 * ones[i] > hashes.size()) out.set(i);
  }
  return out;
}

}  // namespace headcount::simhash
