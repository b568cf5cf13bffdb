#include "he/tables.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

namespace headcount::he::detail {
namespace {

mpz_class to_mpz(u128 v) {
  mpz_class hi(static_cast<unsigned long>(v >> 64));
  mpz_class out = hi << 64;
  out += static_cast<unsigned long>(static_cast<std::uint64_t>(v));
  return out;
}

int bit_length(u128 v) {
  int b = 0;
  while (v) {
    ++b;
    v >>= 1;
  }
  return b;
}

}  // namespace

Tables::Tables(const HeParams& params, const std::vector<std::uint64_t>& moduli)
    : n(params.ring_dimension), p(params.plaintext_modulus), plain(p, n) {
  if (params.backend != Backend::lattice) return;
  Q = 1;
  for (auto q : moduli) {
    q_ntt.emplace_back(q, n);
    Q *= q;
  }
  const u128 floor_q_over_p = Q / p;
  for (auto q : moduli) delta.push_back(static_cast<std::uint64_t>(floor_q_over_p % q));
  if (moduli.size() == 2) q0_inv_mod_q1 = inv_mod(moduli[0] % moduli[1], moduli[1]);
  Qz = to_mpz(Q);

  // The tensor product of centered lifts is bounded by n Q^2 / 2, so the
  // extension base E must satisfy Q E > n Q^2.
  const mpz_class need = mpz_class(static_cast<unsigned long>(4 * n)) * Qz;
  mpz_class ext = 1;
  std::vector<std::uint64_t> used = moduli;
  while (ext <= need) {
    const std::uint64_t e = ntt_prime_below(61, 2 * n, used);
    used.push_back(e);
    ext_ntt.emplace_back(e, n);
    ext *= static_cast<unsigned long>(e);
  }
  M = Qz * ext;
  half_M = M / 2;
  for (auto m_i : used) {
    const mpz_class rest = M / static_cast<unsigned long>(m_i);
    const std::uint64_t rest_mod = mpz_fdiv_ui(rest.get_mpz_t(), m_i);
    crt_basis.push_back(rest * static_cast<unsigned long>(inv_mod(rest_mod, m_i)));
  }
  flood_bits = std::max(0, bit_length(Q) - 1 - static_cast<int>(std::bit_width(p)) - 24);
}

RnsPoly zero_poly(const Tables& t) {
  RnsPoly out;
  out.limbs.assign(t.q_ntt.size(), std::vector<std::uint64_t>(t.n, 0));
  return out;
}

RnsPoly to_ntt(const Tables& t, RnsPoly a) {
  for (std::size_t i = 0; i < a.limbs.size(); ++i) t.q_ntt[i].forward(a.limbs[i]);
  return a;
}

RnsPoly from_ntt(const Tables& t, RnsPoly a) {
  for (std::size_t i = 0; i < a.limbs.size(); ++i) t.q_ntt[i].inverse(a.limbs[i]);
  return a;
}

RnsPoly add(const Tables& t, const RnsPoly& a, const RnsPoly& b) {
  RnsPoly out = a;
  for (std::size_t i = 0; i < out.limbs.size(); ++i) {
    const std::uint64_t q = t.q_ntt[i].modulus();
    for (std::size_t j = 0; j < t.n; ++j) out.limbs[i][j] = add_mod(out.limbs[i][j], b.limbs[i][j], q);
  }
  return out;
}

RnsPoly pointwise(const Tables& t, const RnsPoly& a, const RnsPoly& b) {
  RnsPoly out = a;
  for (std::size_t i = 0; i < out.limbs.size(); ++i) {
    const std::uint64_t q = t.q_ntt[i].modulus();
    for (std::size_t j = 0; j < t.n; ++j) out.limbs[i][j] = mul_mod(out.limbs[i][j], b.limbs[i][j], q);
  }
  return out;
}

RnsPoly lift_small(const Tables& t, const std::vector<std::int64_t>& coeffs) {
  RnsPoly out = zero_poly(t);
  for (std::size_t i = 0; i < out.limbs.size(); ++i) {
    const std::uint64_t q = t.q_ntt[i].modulus();
    for (std::size_t j = 0; j < t.n; ++j) out.limbs[i][j] = reduce_signed(coeffs[j], q);
  }
  return out;
}

u128 crt(const Tables& t, const RnsPoly& a, std::size_t j) {
  const std::uint64_t r0 = a.limbs[0][j];
  if (a.limbs.size() == 1) return r0;
  const std::uint64_t q0 = t.q_ntt[0].modulus();
  const std::uint64_t q1 = t.q_ntt[1].modulus();
  const std::uint64_t h = mul_mod(sub_mod(a.limbs[1][j], r0 % q1, q1), t.q0_inv_mod_q1, q1);
  return static_cast<u128>(r0) + static_cast<u128>(q0) * h;
}

std::vector<std::int64_t> sample_ternary(std::size_t n, Rng& rng) {
  std::uniform_int_distribution<int> d(-1, 1);
  std::vector<std::int64_t> out(n);
  for (auto& x : out) x = d(rng);
  return out;
}

std::vector<std::int64_t> sample_gaussian(std::size_t n, Rng& rng) {
  constexpr double kSigma = 3.2;
  constexpr double kBound = 6 * kSigma;
  std::normal_distribution<double> d(0.0, kSigma);
  std::vector<std::int64_t> out(n);
  for (auto& x : out) {
    double v;
    do {
      v = std::round(d(rng));
    } while (std::abs(v) > kBound);
    x = static_cast<std::int64_t>(v);
  }
  return out;
}

RnsPoly sample_uniform(const Tables& t, Rng& rng) {
  RnsPoly out = zero_poly(t);
  for (std::size_t i = 0; i < out.limbs.size(); ++i) {
    std::uniform_int_distribution<std::uint64_t> d(0, t.q_ntt[i].modulus() - 1);
    for (auto& x : out.limbs[i]) x = d(rng);
  }
  return out;
}

std::vector<RnsPoly> lattice_encrypt(const Tables& t, const std::vector<RnsPoly>& pk_ntt,
                                     const std::vector<std::uint64_t>& plain, Rng& rng) {
  const RnsPoly u = to_ntt(t, lift_small(t, sample_ternary(t.n, rng)));
  RnsPoly c0 = add(t, from_ntt(t, pointwise(t, pk_ntt[0], u)), lift_small(t, sample_gaussian(t.n, rng)));
  RnsPoly c1 = add(t, from_ntt(t, pointwise(t, pk_ntt[1], u)), lift_small(t, sample_gaussian(t.n, rng)));
  for (std::size_t i = 0; i < c0.limbs.size(); ++i) {
    const std::uint64_t q = t.q_ntt[i].modulus();
    for (std::size_t j = 0; j < t.n; ++j) {
      c0.limbs[i][j] = add_mod(c0.limbs[i][j], mul_mod(t.delta[i], plain[j], q), q);
    }
  }
  return {std::move(c0), std::move(c1)};
}

std::vector<RnsPoly> lattice_tensor(const Tables& t, const std::vector<RnsPoly>& a,
                                    const std::vector<RnsPoly>& b) {
  const std::size_t nq = t.q_ntt.size();
  const std::size_t ne = t.ext_ntt.size();
  const std::size_t nb = nq + ne;
  const i128 Q = static_cast<i128>(t.Q);
  auto ntt_of = [&](std::size_t limb) -> const Ntt& {
    return limb < nq ? t.q_ntt[limb] : t.ext_ntt[limb - nq];
  };

  // Extend each operand to the full base and transform.
  auto extend = [&](const RnsPoly& x) {
    std::vector<std::vector<std::uint64_t>> out(nb, std::vector<std::uint64_t>(t.n));
    for (std::size_t i = 0; i < nq; ++i) out[i] = x.limbs[i];
    for (std::size_t j = 0; j < t.n; ++j) {
      i128 v = static_cast<i128>(crt(t, x, j));
      if (v > Q / 2) v -= Q;
      for (std::size_t e = 0; e < ne; ++e) out[nq + e][j] = reduce_signed(v, t.ext_ntt[e].modulus());
    }
    for (std::size_t i = 0; i < nb; ++i) ntt_of(i).forward(out[i]);
    return out;
  };
  const auto a0 = extend(a[0]), a1 = extend(a[1]), b0 = extend(b[0]), b1 = extend(b[1]);

  std::vector<std::vector<std::vector<std::uint64_t>>> d(
      3, std::vector<std::vector<std::uint64_t>>(nb, std::vector<std::uint64_t>(t.n)));
  for (std::size_t i = 0; i < nb; ++i) {
    const std::uint64_t q = ntt_of(i).modulus();
    for (std::size_t j = 0; j < t.n; ++j) {
      d[0][i][j] = mul_mod(a0[i][j], b0[i][j], q);
      d[1][i][j] = add_mod(mul_mod(a0[i][j], b1[i][j], q), mul_mod(a1[i][j], b0[i][j], q), q);
      d[2][i][j] = mul_mod(a1[i][j], b1[i][j], q);
    }
    for (auto& comp : d) ntt_of(i).inverse(comp[i]);
  }

  // Exact integer reconstruction, then round(p x / Q) reduced mod each q_i.
  const mpz_class two_q = 2 * t.Qz;
  const mpz_class two_p = mpz_class(static_cast<unsigned long>(2 * t.p));
  std::vector<RnsPoly> out(3, zero_poly(t));
  mpz_class x, y;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t j = 0; j < t.n; ++j) {
      x = 0;
      for (std::size_t i = 0; i < nb; ++i) {
        mpz_addmul_ui(x.get_mpz_t(), t.crt_basis[i].get_mpz_t(), d[c][i][j]);
      }
      mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), t.M.get_mpz_t());
      if (x > t.half_M) x -= t.M;
      y = two_p * x + t.Qz;
      mpz_fdiv_q(y.get_mpz_t(), y.get_mpz_t(), two_q.get_mpz_t());
      for (std::size_t i = 0; i < nq; ++i) {
        out[c].limbs[i][j] = mpz_fdiv_ui(y.get_mpz_t(), t.q_ntt[i].modulus());
      }
    }
  }
  return out;
}

std::vector<RnsPoly> lattice_mul_plain(const Tables& t, const std::vector<RnsPoly>& a,
                                       const std::vector<std::uint64_t>& plain) {
  std::vector<std::int64_t> centered(t.n);
  for (std::size_t j = 0; j < t.n; ++j) {
    centered[j] = plain[j] > t.p / 2 ? static_cast<std::int64_t>(plain[j]) - static_cast<std::int64_t>(t.p)
                                     : static_cast<std::int64_t>(plain[j]);
  }
  const RnsPoly pt = to_ntt(t, lift_small(t, centered));
  std::vector<RnsPoly> out;
  for (const auto& c : a) out.push_back(from_ntt(t, pointwise(t, to_ntt(t, c), pt)));
  return out;
}

void lattice_flood(const Tables& t, RnsPoly& c0, Rng& rng) {
  if (t.flood_bits == 0) return;
  const u128 span = static_cast<u128>(1) << (t.flood_bits + 1);
  const i128 half = static_cast<i128>(span / 2);
  for (std::size_t j = 0; j < t.n; ++j) {
    const u128 r = ((static_cast<u128>(rng()) << 64) | rng()) % span;
    const i128 v = static_cast<i128>(r) - half;
    for (std::size_t i = 0; i < c0.limbs.size(); ++i) {
      const std::uint64_t q = t.q_ntt[i].modulus();
      c0.limbs[i][j] = add_mod(c0.limbs[i][j], reduce_signed(v, q), q);
    }
  }
}

std::vector<std::uint64_t> encode_chunk(const Tables& t, const std::vector<std::uint8_t>& bits,
                                        Packing packing, Orientation orientation) {
  std::vector<std::uint64_t> out(t.n, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const std::size_t pos =
        packing == Packing::coefficients && orientation == Orientation::reversed ? t.n - 1 - i : i;
    out[pos] = bits[i];
  }
  if (packing == Packing::slots) t.plain.inverse(out);
  return out;
}

std::vector<std::uint8_t> decode_chunk(const Tables& t, const std::vector<std::uint64_t>& plain,
                                       std::size_t length, Packing packing, Orientation orientation) {
  std::vector<std::uint64_t> values = plain;
  if (packing == Packing::slots) t.plain.forward(values);
  if (packing == Packing::coefficients && orientation == Orientation::reversed) {
    std::reverse(values.begin(), values.end());
  }
  std::vector<std::uint8_t> out(length);
  for (std::size_t i = 0; i < t.n; ++i) {
    if (values[i] > 1 || (i >= length && values[i] != 0)) {
      throw DecryptionFailure("decrypted filter chunk is not a bit array");
    }
    if (i < length) out[i] = static_cast<std::uint8_t>(values[i]);
  }
  return out;
}

std::vector<std::uint64_t> plain_add(const Tables& t, const std::vector<std::uint64_t>& a,
                                     const std::vector<std::uint64_t>& b) {
  std::vector<std::uint64_t> out(t.n);
  for (std::size_t j = 0; j < t.n; ++j) out[j] = add_mod(a[j], b[j], t.p);
  return out;
}

std::vector<std::uint64_t> plain_mul(const Tables& t, const std::vector<std::uint64_t>& a,
                                     const std::vector<std::uint64_t>& b) {
  return t.plain.multiply(a, b);
}

std::uint64_t read_out(const Tables& t, const std::vector<std::uint64_t>& plain, const Readout& r) {
  // The slots are the evaluations at all n odd powers of psi, whose sum
  // annihilates every coefficient except the constant one.
  if (r.kind == Readout::Kind::slot_sum) return mul_mod(t.n % t.p, plain[0], t.p);
  return plain.at(r.index);
}

}  // namespace headcount::he::detail
