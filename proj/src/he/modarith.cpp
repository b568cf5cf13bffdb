#include "he/modarith.hpp"

#include <gmp.h>

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace headcount::he::detail {

std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t q) {
  std::uint64_t result = 1 % q;
  a %= q;
  while (e) {
    if (e & 1u) result = mul_mod(result, a, q);
    a = mul_mod(a, a, q);
    e >>= 1;
  }
  return result;
}

std::uint64_t inv_mod(std::uint64_t a, std::uint64_t q) {
  if (a % q == 0) throw std::domain_error("zero has no inverse");
  return pow_mod(a, q - 2, q);
}

bool is_prime(std::uint64_t n) {
  mpz_t z;
  mpz_init_set_ui(z, n);
  const int r = mpz_probab_prime_p(z, 40);
  mpz_clear(z);
  return r != 0;
}

std::uint64_t ntt_prime_below(int bits, std::uint64_t step, std::span<const std::uint64_t> exclude) {
  if (bits < 2 || bits > 62) throw std::invalid_argument("prime size must be 2..62 bits");
  const std::uint64_t top = std::uint64_t{1} << bits;
  for (std::uint64_t c = top - step + 1; c > step && c < top; c -= step) {
    if (std::find(exclude.begin(), exclude.end(), c) != exclude.end()) continue;
    if (is_prime(c)) return c;
  }
  throw std::invalid_argument("no " + std::to_string(bits) + "-bit prime congruent to 1 mod " +
                              std::to_string(step));
}

namespace {

std::size_t bit_reverse(std::size_t x, int bits) {
  std::size_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1u);
    x >>= 1;
  }
  return r;
}

}  // namespace

Ntt::Ntt(std::uint64_t q, std::size_t n) : q_(q), n_(n) {
  if (n < 2 || !std::has_single_bit(n)) throw std::invalid_argument("NTT size must be a power of two");
  if ((q - 1) % (2 * n) != 0) throw std::invalid_argument("modulus is not 1 mod 2n");
  psi_ = 0;
  for (std::uint64_t g = 2; g < q; ++g) {
    const std::uint64_t cand = pow_mod(g, (q - 1) / (2 * n), q);
    if (pow_mod(cand, n, q) == q - 1) {
      psi_ = cand;
      break;
    }
  }
  if (psi_ == 0) throw std::invalid_argument("no primitive 2n-th root of unity");
  const int log_n = std::countr_zero(n);
  const std::uint64_t psi_inv = inv_mod(psi_, q);
  psi_rev_.resize(n);
  psi_inv_rev_.resize(n);
  std::uint64_t pw = 1, pw_inv = 1;
  std::vector<std::uint64_t> powers(n), inv_powers(n);
  for (std::size_t i = 0; i < n; ++i) {
    powers[i] = pw;
    inv_powers[i] = pw_inv;
    pw = mul_mod(pw, psi_, q);
    pw_inv = mul_mod(pw_inv, psi_inv, q);
  }
  for (std::size_t i = 0; i < n; ++i) {
    psi_rev_[i] = powers[bit_reverse(i, log_n)];
    psi_inv_rev_[i] = inv_powers[bit_reverse(i, log_n)];
  }
  n_inv_ = inv_mod(n % q, q);
}

void Ntt::forward(std::span<std::uint64_t> a) const {
  std::size_t t = n_;
  for (std::size_t m = 1; m < n_; m <<= 1) {
    t >>= 1;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j1 = 2 * i * t;
      const std::uint64_t s = psi_rev_[m + i];
      for (std::size_t j = j1; j < j1 + t; ++j) {
        const std::uint64_t u = a[j];
        const std::uint64_t v = mul_mod(a[j + t], s, q_);
        a[j] = add_mod(u, v, q_);
        a[j + t] = sub_mod(u, v, q_);
      }
    }
  }
}

void Ntt::inverse(std::span<std::uint64_t> a) const {
  std::size_t t = 1;
  for (std::size_t m = n_; m > 1; m >>= 1) {
    const std::size_t h = m >> 1;
    std::size_t j1 = 0;
    for (std::size_t i = 0; i < h; ++i) {
      const std::uint64_t s = psi_inv_rev_[h + i];
      for (std::size_t j = j1; j < j1 + t; ++j) {
        const std::uint64_t u = a[j];
        const std::uint64_t v = a[j + t];
        a[j] = add_mod(u, v, q_);
        a[j + t] = mul_mod(sub_mod(u, v, q_), s, q_);
      }
      j1 += 2 * t;
    }
    t <<= 1;
  }
  for (auto& x : a) x = mul_mod(x, n_inv_, q_);
}

std::vector<std::uint64_t> Ntt::multiply(std::vector<std::uint64_t> a, std::vector<std::uint64_t> b) const {
  forward(a);
  forward(b);
  for (std::size_t i = 0; i < n_; ++i) a[i] = mul_mod(a[i], b[i], q_);
  inverse(a);
  return a;
}

}  // namespace headcount::he::detail
