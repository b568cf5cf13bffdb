#pragma once

#include <cstdint>
#include <vector>

namespace headcount::gf2m {

// Binary polynomials of degree <= 31 are packed into an integer, bit i being
// the coefficient of x^i.
bool is_primitive(std::uint32_t poly, int degree);

// Smallest integer-valued primitive polynomial of the given degree.
std::uint32_t smallest_primitive_polynomial(int degree);

// GF(2^m) via log/antilog tables over a fixed primitive polynomial.
// Elements are integers in [0, 2^m); alpha is the element 2.
class Field {
 public:
  explicit Field(int degree);

  int degree() const { return degree_; }
  int order() const { return order_; }  // 2^m - 1, the multiplicative order
  std::uint32_t primitive_polynomial() const { return poly_; }

  std::uint16_t exp(int i) const { return exp_[mod(i)]; }
  int log(std::uint16_t a) const { return log_[a]; }  // a != 0
  // Unreduced lookup, valid for 0 <= i < 2 * order().
  std::uint16_t exp_raw(int i) const { return exp_[i]; }

  std::uint16_t mul(std::uint16_t a, std::uint16_t b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }
  std::uint16_t div(std::uint16_t a, std::uint16_t b) const;
  std::uint16_t inv(std::uint16_t a) const;
  std::uint16_t pow(std::uint16_t a, long long e) const;

  int mod(long long i) const {
    const long long r = i % order_;
    return static_cast<int>(r < 0 ? r + order_ : r);
  }

 private:
  int degree_;
  int order_;
  std::uint32_t poly_;
  std::vector<std::uint16_t> exp_;  // length 2*order so exp_[log a + log b] needs no reduction
  std::vector<int> log_;
};

// Cyclotomic coset of i modulo 2^m - 1 under doubling.
std::vector<int> cyclotomic_coset(int i, int order);

// Minimal polynomial of alpha^i over GF(2); coefficient vector, index = degree.
std::vector<std::uint8_t> minimal_polynomial(const Field& field, int i);

// GF(2)[x] helpers on coefficient vectors (index = degree, no trailing zeros).
std::vector<std::uint8_t> gf2_mul(const std::vector<std::uint8_t>& a,
                                  const std::vector<std::uint8_t>& b);
std::vector<std::uint8_t> gf2_mod(std::vector<std::uint8_t> a, const std::vector<std::uint8_t>& b);

}  // namespace headcount::gf2m
