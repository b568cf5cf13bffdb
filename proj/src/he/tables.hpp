#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <vector>

#include "he/modarith.hpp"
#include "headcount/he/types.hpp"
#include "headcount/random.hpp"

namespace headcount::he::detail {

struct Tables {
  std::size_t n = 0;
  std::uint64_t p = 0;
  Ntt plain;  // mod p; its transform is the slot encoding

  // Lattice only.
  std::vector<Ntt> q_ntt;
  std::vector<Ntt> ext_ntt;       // extension base for the exact tensor product
  std::vector<std::uint64_t> delta;  // floor(Q / p) mod q_i
  u128 Q = 0;
  std::uint64_t q0_inv_mod_q1 = 0;
  mpz_class Qz;
  mpz_class M;        // Q times the extension primes
  mpz_class half_M;
  std::vector<mpz_class> crt_basis;  // M/m_i * ((M/m_i)^-1 mod m_i), q primes first
  int flood_bits = 0;

  Tables(const HeParams& params, const std::vector<std::uint64_t>& moduli);
};

// Ciphertext-space helpers; polynomials are RnsPoly in coefficient order.
RnsPoly zero_poly(const Tables& t);
RnsPoly to_ntt(const Tables& t, RnsPoly a);
RnsPoly from_ntt(const Tables& t, RnsPoly a);
RnsPoly add(const Tables& t, const RnsPoly& a, const RnsPoly& b);
RnsPoly pointwise(const Tables& t, const RnsPoly& a, const RnsPoly& b);  // NTT domain
RnsPoly lift_small(const Tables& t, const std::vector<std::int64_t>& coeffs);
// Coefficient j of a as an integer in [0, Q).
u128 crt(const Tables& t, const RnsPoly& a, std::size_t j);

std::vector<std::int64_t> sample_ternary(std::size_t n, Rng& rng);
std::vector<std::int64_t> sample_gaussian(std::size_t n, Rng& rng);
RnsPoly sample_uniform(const Tables& t, Rng& rng);

// (c0, c1) with c0 + c1 s = Delta m + e, given pk = (b, a) in NTT form.
std::vector<RnsPoly> lattice_encrypt(const Tables& t, const std::vector<RnsPoly>& pk_ntt,
                                     const std::vector<std::uint64_t>& plain, Rng& rng);
// round(p/Q * (a tensor b)) computed exactly; inputs are degree-1 ciphertexts.
std::vector<RnsPoly> lattice_tensor(const Tables& t, const std::vector<RnsPoly>& a,
                                    const std::vector<RnsPoly>& b);
// Multiplies every component by a plaintext polynomial mod p.
std::vector<RnsPoly> lattice_mul_plain(const Tables& t, const std::vector<RnsPoly>& a,
                                       const std::vector<std::uint64_t>& plain);
// Adds uniform noise of flood_bits bits to c0.
void lattice_flood(const Tables& t, RnsPoly& c0, Rng& rng);

// Plaintext-space helpers, everything mod p.
std::vector<std::uint64_t> encode_chunk(const Tables& t, const std::vector<std::uint8_t>& bits,
                                        Packing packing, Orientation orientation);
std::vector<std::uint8_t> decode_chunk(const Tables& t, const std::vector<std::uint64_t>& plain,
                                       std::size_t length, Packing packing, Orientation orientation);
std::vector<std::uint64_t> plain_add(const Tables& t, const std::vector<std::uint64_t>& a,
                                     const std::vector<std::uint64_t>& b);
std::vector<std::uint64_t> plain_mul(const Tables& t, const std::vector<std::uint64_t>& a,
                                     const std::vector<std::uint64_t>& b);
std::uint64_t read_out(const Tables& t, const std::vector<std::uint64_t>& plain, const Readout& r);

}  // namespace headcount::he::detail

namespace headcount::he::detail {

// First 8 bytes of SHA-256 over the params digest and the key material.
KeyId lattice_key_id(const Digest& params_digest, const std::vector<RnsPoly>& material);

void write_poly(ByteWriter& out, const RnsPoly& p);
RnsPoly read_poly(ByteReader& in, std::size_t limbs, std::size_t n, std::span<const std::uint64_t> moduli);

}  // namespace headcount::he::detail
