#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace headcount::he::detail {

using u128 = unsigned __int128;
using i128 = __int128;

// Moduli stay below 2^62 so a + b never wraps.
inline std::uint64_t add_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  const std::uint64_t s = a + b;
  return s >= q ? s - q : s;
}
inline std::uint64_t sub_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  return a >= b ? a - b : a + q - b;
}
inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % q);
}
std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t q);
std::uint64_t inv_mod(std::uint64_t a, std::uint64_t q);  // q prime
// Reduces a signed value into [0, q).
inline std::uint64_t reduce_signed(i128 x, std::uint64_t q) {
  i128 r = x % static_cast<i128>(q);
  if (r < 0) r += q;
  return static_cast<std::uint64_t>(r);
}

bool is_prime(std::uint64_t n);

// Largest prime below 2^bits congruent to 1 mod step, skipping `exclude`.
std::uint64_t ntt_prime_below(int bits, std::uint64_t step, std::span<const std::uint64_t> exclude);

// Negacyclic number-theoretic transform over Z_q[x]/(x^n + 1).
//
// forward() maps coefficients to evaluations at the odd powers of a
// primitive 2n-th root psi, in bit-reversed order; pointwise products of
// transforms are transforms of negacyclic products.
class Ntt {
 public:
  Ntt(std::uint64_t q, std::size_t n);

  std::uint64_t modulus() const { return q_; }
  std::size_t size() const { return n_; }
  std::uint64_t psi() const { return psi_; }

  void forward(std::span<std::uint64_t> a) const;
  void inverse(std::span<std::uint64_t> a) const;

  // Negacyclic product of two coefficient vectors.
  std::vector<std::uint64_t> multiply(std::vector<std::uint64_t> a, std::vector<std::uint64_t> b) const;

 private:
  std::uint64_t q_;
  std::size_t n_;
  std::uint64_t psi_;
  std::uint64_t n_inv_;
  std::vector<std::uint64_t> psi_rev_;
  std::vector<std::uint64_t> psi_inv_rev_;
};

}  // namespace headcount::he::detail
