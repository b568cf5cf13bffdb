#include <cmath>
#include <limits>
#include <stdexcept>

#include "he/tables.hpp"
#include "headcount/he/secret.hpp"

namespace headcount::he {

struct SecretKeyAccess {
  static SecretKey make(std::shared_ptr<const Context> ctx, KeyId id, std::vector<std::int64_t> s,
                        std::array<std::uint8_t, 32> seed) {
    return SecretKey(std::move(ctx), id, std::move(s), seed);
  }
  static const std::vector<std::int64_t>& s(const SecretKey& sk) { return sk.s_; }
};

namespace {

KeyId emulated_key_id(const Digest& params_digest, const std::array<std::uint8_t, 32>& seed) {
  Sha256 h;
  h.update("headcount/he/key");
  h.update(params_digest);
  h.update(seed);
  const auto d = h.finish();
  KeyId id{};
  std::copy_n(d.begin(), id.size(), id.begin());
  return id;
}

struct Decoded {
  std::vector<std::uint64_t> plain;
  double worst_ratio = 0;  // largest |noise| / Q over all coefficients
};

Decoded decode(const SecretKey& sk, const Ciphertext& ct) {
  const Context& ctx = sk.context();
  if (ct.params_digest != ctx.params_digest() || ct.backend != ctx.backend()) {
    throw ParamsMismatch("ciphertext parameters differ from the key's");
  }
  if (ct.key_id != sk.key_id()) throw KeyMismatch("ciphertext was encrypted under a different key");
  const auto& t = ctx.tables();
  if (ctx.backend() == Backend::emulated) return {ct.components.at(0).limbs.at(0), 0.0};

  const RnsPoly s = detail::to_ntt(t, detail::lift_small(t, SecretKeyAccess::s(sk)));
  RnsPoly acc = detail::to_ntt(t, ct.components.at(0));
  RnsPoly power = s;
  for (std::size_t c = 1; c < ct.components.size(); ++c) {
    acc = detail::add(t, acc, detail::pointwise(t, detail::to_ntt(t, ct.components[c]), power));
    power = detail::pointwise(t, power, s);
  }
  acc = detail::from_ntt(t, acc);

  Decoded out;
  out.plain.resize(t.n);
  const detail::u128 Q = t.Q;
  for (std::size_t j = 0; j < t.n; ++j) {
    const detail::u128 scaled = static_cast<detail::u128>(t.p) * detail::crt(t, acc, j);
    const detail::u128 rounded = (scaled + Q / 2) / Q;
    const detail::i128 residual = static_cast<detail::i128>(scaled) - static_cast<detail::i128>(rounded * Q);
    const double ratio = std::abs(static_cast<double>(residual)) / static_cast<double>(Q);
    out.worst_ratio = std::max(out.worst_ratio, ratio);
    out.plain[j] = static_cast<std::uint64_t>(rounded % t.p);
  }
  return out;
}

}  // namespace

SecretKey::SecretKey(std::shared_ptr<const Context> ctx, KeyId id, std::vector<std::int64_t> s,
                     std::array<std::uint8_t, 32> seed)
    : ctx_(std::move(ctx)), key_id_(id), s_(std::move(s)), seed_(seed) {}

void SecretKey::serialize(ByteWriter& out) const {
  out.raw(ctx_->params_digest());
  out.raw(key_id_);
  if (ctx_->backend() == Backend::lattice) {
    for (auto c : s_) out.u8(static_cast<std::uint8_t>(c + 1));
  } else {
    out.raw(seed_);
  }
}

SecretKey SecretKey::deserialize(ByteReader& in, std::shared_ptr<const Context> ctx) {
  if (in.array<32>() != ctx->params_digest()) throw ParamsMismatch("secret key parameter digest differs");
  const KeyId id = in.array<8>();
  std::vector<std::int64_t> s;
  std::array<std::uint8_t, 32> seed{};
  if (ctx->backend() == Backend::lattice) {
    s.resize(ctx->ring_dimension());
    for (auto& c : s) {
      const auto v = in.u8();
      if (v > 2) throw DecodeError("secret coefficient out of range");
      c = static_cast<std::int64_t>(v) - 1;
    }
  } else {
    seed = in.array<32>();
    if (emulated_key_id(ctx->params_digest(), seed) != id) throw DecodeError("secret key identifier mismatch");
  }
  return SecretKey(std::move(ctx), id, std::move(s), seed);
}

KeyPair keygen(std::shared_ptr<const Context> ctx, Rng& rng) {
  if (!ctx) throw std::invalid_argument("keygen needs a context");
  if (ctx->backend() == Backend::emulated) {
    std::array<std::uint8_t, 32> seed{};
    for (auto& b : seed) b = static_cast<std::uint8_t>(rng());
    const KeyId id = emulated_key_id(ctx->params_digest(), seed);
    return {PublicKey(ctx, id, {}), SecretKeyAccess::make(ctx, id, {}, seed)};
  }
  const auto& t = ctx->tables();
  auto s = detail::sample_ternary(t.n, rng);
  const RnsPoly a = detail::sample_uniform(t, rng);
  const RnsPoly e = detail::lift_small(t, detail::sample_gaussian(t.n, rng));
  const RnsPoly as = detail::from_ntt(
      t, detail::pointwise(t, detail::to_ntt(t, a), detail::to_ntt(t, detail::lift_small(t, s))));
  RnsPoly b = detail::add(t, as, e);
  for (std::size_t i = 0; i < b.limbs.size(); ++i) {
    const std::uint64_t q = t.q_ntt[i].modulus();
    for (auto& c : b.limbs[i]) c = c == 0 ? 0 : q - c;
  }
  std::vector<RnsPoly> material{std::move(b), a};
  const KeyId id = detail::lattice_key_id(ctx->params_digest(), material);
  PublicKey pk(ctx, id, std::move(material));
  return {std::move(pk), SecretKeyAccess::make(ctx, id, std::move(s), {})};
}

KeyPair keygen(std::shared_ptr<const Context> ctx, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x6b6579);
  return keygen(std::move(ctx), rng);
}

std::vector<std::uint64_t> decrypt_plaintext(const SecretKey& sk, const Ciphertext& ct) {
  auto d = decode(sk, ct);
  if (d.worst_ratio > 0.25) throw DecryptionFailure("noise budget exhausted");
  return std::move(d.plain);
}

std::uint64_t decrypt_count(const SecretKey& sk, const Ciphertext& ct) {
  return detail::read_out(sk.context().tables(), decrypt_plaintext(sk, ct), ct.readout);
}

std::vector<std::uint8_t> decrypt_bits(const SecretKey& sk, const EncryptedBloom& enc) {
  const Context& ctx = sk.context();
  if (enc.params_digest != ctx.params_digest()) throw ParamsMismatch("filter parameters differ from the key's");
  if (enc.key_id != sk.key_id()) throw KeyMismatch("filter was encrypted under a different key");
  std::vector<std::uint8_t> out;
  out.reserve(enc.m);
  for (std::size_t i = 0; i < enc.ciphertexts.size(); ++i) {
    const std::size_t start = i * enc.bits_per_ciphertext;
    const std::size_t len = std::min<std::size_t>(enc.bits_per_ciphertext, enc.m - start);
    const auto chunk = detail::decode_chunk(ctx.tables(), decrypt_plaintext(sk, enc.ciphertexts[i]), len,
                                            enc.packing, enc.orientation);
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  return out;
}

double noise_budget_bits(const SecretKey& sk, const Ciphertext& ct) {
  const auto d = decode(sk, ct);
  if (d.worst_ratio == 0) return std::numeric_limits<double>::infinity();
  return std::log2(0.5 / d.worst_ratio);
}

}  // namespace headcount::he
