#include <algorithm>
#include <stdexcept>
#include <string>

#include "he/tables.hpp"
#include "headcount/he/public.hpp"

namespace headcount::he {
namespace {

void check_context(const Context& ctx, const Digest& digest) {
  if (digest != ctx.params_digest()) throw ParamsMismatch("operand parameters differ from the context");
}

void check_same_key(const Context& ctx, const Ciphertext& a, const Ciphertext& b) {
  check_context(ctx, a.params_digest);
  check_context(ctx, b.params_digest);
  if (a.key_id != b.key_id) throw ParamsMismatch("operands are encrypted under different keys");
}

Ciphertext encrypt_plain(const PublicKey& pk, const std::vector<std::uint64_t>& plain, Rng& rng) {
  const Context& ctx = pk.context();
  Ciphertext ct;
  ct.backend = ctx.backend();
  ct.params_digest = ctx.params_digest();
  ct.key_id = pk.key_id();
  if (ctx.backend() == Backend::lattice) {
    ct.components = detail::lattice_encrypt(ctx.tables(), pk.material_ntt(), plain, rng);
  } else {
    for (auto& b : ct.nonce) b = static_cast<std::uint8_t>(rng());
    ct.components = {RnsPoly{{plain}}};
  }
  return ct;
}

// Adds a fresh encryption into ct without touching the readout or degree.
void absorb(const PublicKey& pk, Ciphertext& ct, const std::vector<std::uint64_t>& plain, Rng& rng) {
  const auto& t = pk.context().tables();
  const Ciphertext fresh = encrypt_plain(pk, plain, rng);
  if (ct.backend == Backend::lattice) {
    for (std::size_t c = 0; c < 2; ++c) {
      ct.components[c] = detail::add(t, ct.components[c], fresh.components[c]);
    }
  } else {
    ct.components[0].limbs[0] = detail::plain_add(t, ct.components[0].limbs[0], plain);
    ct.nonce = fresh.nonce;
  }
}

Ciphertext add_raw(const Context& ctx, const Ciphertext& a, const Ciphertext& b) {
  check_same_key(ctx, a, b);
  const auto& t = ctx.tables();
  Ciphertext out = a.degree >= b.degree ? a : b;
  const Ciphertext& other = a.degree >= b.degree ? b : a;
  if (ctx.backend() == Backend::lattice) {
    for (std::size_t c = 0; c < other.components.size(); ++c) {
      out.components[c] = detail::add(t, out.components[c], other.components[c]);
    }
  } else {
    out.components[0].limbs[0] =
        detail::plain_add(t, out.components[0].limbs[0], other.components[0].limbs[0]);
    for (std::size_t i = 0; i < out.nonce.size(); ++i) out.nonce[i] ^= other.nonce[i];
  }
  return out;
}

Ciphertext multiply_raw(const Context& ctx, const Ciphertext& a, const Ciphertext& b) {
  check_same_key(ctx, a, b);
  if (a.degree != 1 || b.degree != 1) {
    throw DepthExceeded("ciphertext multiplication needs two fresh operands");
  }
  const auto& t = ctx.tables();
  Ciphertext out = a;
  out.degree = 2;
  if (ctx.backend() == Backend::lattice) {
    out.components = detail::lattice_tensor(t, a.components, b.components);
  } else {
    out.components[0].limbs[0] = detail::plain_mul(t, a.components[0].limbs[0], b.components[0].limbs[0]);
    for (std::size_t i = 0; i < out.nonce.size(); ++i) out.nonce[i] ^= b.nonce[i];
  }
  return out;
}

Ciphertext multiply_plain(const Context& ctx, const Ciphertext& a, const std::vector<std::uint64_t>& plain) {
  const auto& t = ctx.tables();
  Ciphertext out = a;
  if (ctx.backend() == Backend::lattice) {
    out.components = detail::lattice_mul_plain(t, a.components, plain);
  } else {
    out.components[0].limbs[0] = detail::plain_mul(t, a.components[0].limbs[0], plain);
  }
  return out;
}

void check_filter(const Context& ctx, const EncryptedBloom& e) {
  check_context(ctx, e.params_digest);
  const std::size_t expected =
      e.bits_per_ciphertext == 0 ? 0 : (e.m + e.bits_per_ciphertext - 1) / e.bits_per_ciphertext;
  if (e.m == 0 || e.ciphertexts.size() != expected) throw ParamsMismatch("malformed encrypted filter");
}

}  // namespace

EncryptedBloom encrypt_bits(const PublicKey& pk, std::span<const std::uint8_t> bits, Rng& rng,
                            const EncodeOptions& options) {
  const Context& ctx = pk.context();
  if (bits.empty() || bits.size() > ctx.max_bits()) {
    throw std::invalid_argument("filter length " + std::to_string(bits.size()) +
                                " outside the supported range 1.." + std::to_string(ctx.max_bits()));
  }
  const std::uint32_t per = options.bits_per_ciphertext ? options.bits_per_ciphertext : ctx.ring_dimension();
  if (per > ctx.ring_dimension()) throw std::invalid_argument("bits per ciphertext exceeds the ring dimension");
  for (auto b : bits) {
    if (b > 1) throw std::invalid_argument("filter bits must be 0 or 1");
  }
  EncryptedBloom out;
  out.params_digest = ctx.params_digest();
  out.key_id = pk.key_id();
  out.m = static_cast<std::uint32_t>(bits.size());
  out.packing = options.packing;
  out.orientation = options.orientation;
  out.bits_per_ciphertext = per;
  for (std::size_t start = 0; start < bits.size(); start += per) {
    const std::size_t len = std::min<std::size_t>(per, bits.size() - start);
    const std::vector<std::uint8_t> chunk(bits.begin() + static_cast<std::ptrdiff_t>(start),
                                          bits.begin() + static_cast<std::ptrdiff_t>(start + len));
    out.ciphertexts.push_back(
        encrypt_plain(pk, detail::encode_chunk(ctx.tables(), chunk, options.packing, options.orientation), rng));
  }
  return out;
}

Ciphertext encrypt_value(const PublicKey& pk, std::uint64_t value, Rng& rng) {
  const Context& ctx = pk.context();
  if (value >= ctx.plaintext_modulus()) throw std::invalid_argument("value must be below the plaintext modulus");
  std::vector<std::uint64_t> slots(ctx.ring_dimension(), 0);
  slots[0] = value;
  ctx.tables().plain.inverse(slots);
  return encrypt_plain(pk, slots, rng);
}

Ciphertext encrypted_intersection_count(const Context& ctx, const EncryptedBloom& a, const EncryptedBloom& b) {
  check_filter(ctx, a);
  check_filter(ctx, b);
  if (a.key_id != b.key_id) throw ParamsMismatch("filters are encrypted under different keys");
  if (a.m != b.m || a.packing != b.packing || a.bits_per_ciphertext != b.bits_per_ciphertext) {
    throw ParamsMismatch("filters differ in length or encoding");
  }
  if (a.packing == Packing::coefficients && a.orientation == b.orientation) {
    throw ParamsMismatch("coefficient packing needs one ascending and one reversed filter");
  }
  Ciphertext total = multiply_raw(ctx, a.ciphertexts[0], b.ciphertexts[0]);
  for (std::size_t i = 1; i < a.ciphertexts.size(); ++i) {
    total = add_raw(ctx, total, multiply_raw(ctx, a.ciphertexts[i], b.ciphertexts[i]));
  }
  if (a.packing == Packing::coefficients) total.readout = {Readout::Kind::coefficient, ctx.ring_dimension() - 1};
  return total;
}

Ciphertext encrypted_popcount(const Context& ctx, const EncryptedBloom& enc) {
  check_filter(ctx, enc);
  if (enc.packing == Packing::slots) {
    Ciphertext total = enc.ciphertexts[0];
    for (std::size_t i = 1; i < enc.ciphertexts.size(); ++i) total = add_raw(ctx, total, enc.ciphertexts[i]);
    return total;
  }
  // All-ones is its own reversal, so one plaintext serves both orientations.
  const std::vector<std::uint64_t> ones(ctx.ring_dimension(), 1);
  Ciphertext total = multiply_plain(ctx, enc.ciphertexts[0], ones);
  for (std::size_t i = 1; i < enc.ciphertexts.size(); ++i) {
    total = add_raw(ctx, total, multiply_plain(ctx, enc.ciphertexts[i], ones));
  }
  total.readout = {Readout::Kind::coefficient, ctx.ring_dimension() - 1};
  return total;
}

Ciphertext add(const Context& ctx, const Ciphertext& a, const Ciphertext& b) {
  if (!(a.readout == b.readout)) throw ParamsMismatch("operands use different readouts");
  return add_raw(ctx, a, b);
}

Ciphertext multiply(const Context& ctx, const Ciphertext& a, const Ciphertext& b) {
  if (a.readout.kind != Readout::Kind::slot_sum || b.readout.kind != Readout::Kind::slot_sum) {
    throw ParamsMismatch("slot-wise multiplication needs slot readouts");
  }
  return multiply_raw(ctx, a, b);
}

Ciphertext rerandomize(const PublicKey& pk, const Ciphertext& ct, Rng& rng) {
  const Context& ctx = pk.context();
  check_context(ctx, ct.params_digest);
  if (ct.key_id != pk.key_id()) throw ParamsMismatch("ciphertext belongs to a different key");
  Ciphertext out = ct;
  absorb(pk, out, std::vector<std::uint64_t>(ctx.ring_dimension(), 0), rng);
  return out;
}

Ciphertext release(const PublicKey& pk, const Ciphertext& ct, Rng& rng) {
  const Context& ctx = pk.context();
  check_context(ctx, ct.params_digest);
  if (ct.key_id != pk.key_id()) throw ParamsMismatch("ciphertext belongs to a different key");
  std::uniform_int_distribution<std::uint64_t> d(0, ctx.plaintext_modulus() - 1);
  std::vector<std::uint64_t> mask(ctx.ring_dimension());
  for (auto& x : mask) x = d(rng);
  mask[ct.readout.kind == Readout::Kind::slot_sum ? 0 : ct.readout.index] = 0;
  Ciphertext out = ct;
  absorb(pk, out, mask, rng);
  if (ctx.backend() == Backend::lattice) detail::lattice_flood(ctx.tables(), out.components[0], rng);
  return out;
}

}  // namespace headcount::he
