#include <bit>
#include <stdexcept>
#include <string>

#include "he/tables.hpp"

namespace headcount::he {

void HeParams::validate() const {
  const auto n = ring_dimension;
  if (!std::has_single_bit(n) || n > 32768) {
    throw std::invalid_argument("ring dimension must be a power of two up to 32768");
  }
  if (plaintext_modulus < 65537 || plaintext_modulus >= (std::uint64_t{1} << 32) ||
      !detail::is_prime(plaintext_modulus)) {
    throw std::invalid_argument("plaintext modulus must be a prime in [65537, 2^32)");
  }
  if ((plaintext_modulus - 1) % (2 * std::uint64_t{n}) != 0) {
    throw std::invalid_argument("plaintext modulus must be 1 mod 2 * ring dimension");
  }
  switch (backend) {
    case Backend::emulated:
      if (n < 16) throw std::invalid_argument("ring dimension below 16");
      if (!modulus_bits.empty()) throw std::invalid_argument("emulated backend takes no ciphertext modulus");
      return;
    case Backend::lattice: {
      if (n < 1024) throw std::invalid_argument("lattice ring dimension below 1024");
      if (modulus_bits.empty() || modulus_bits.size() > 2) {
        throw std::invalid_argument("ciphertext modulus must have one or two primes");
      }
      int total = std::bit_width(plaintext_modulus);
      for (int b : modulus_bits) {
        if (b < 30 || b > 60) throw std::invalid_argument("modulus primes must be 30..60 bits");
        total += b;
      }
      if (total > 125) throw std::invalid_argument("p * Q must stay below 2^125");
      // Delta = floor(Q/p) misrounds Delta * m by up to p^2 / Q plaintext units.
      if (total - std::bit_width(plaintext_modulus) < 2 * std::bit_width(plaintext_modulus) + 4) {
        throw std::invalid_argument("ciphertext modulus must exceed 16 p^2");
      }
      return;
    }
  }
  throw std::invalid_argument("unknown HE backend");
}

const char* backend_name(Backend b) {
  return b == Backend::emulated ? "emulated" : "lattice";
}

Backend parse_backend(const std::string& name) {
  if (name == "emulated") return Backend::emulated;
  if (name == "lattice") return Backend::lattice;
  throw std::invalid_argument("unknown HE backend '" + name + "' (expected emulated or lattice)");
}

void write_params(ByteWriter& out, const HeParams& params) {
  out.u8(static_cast<std::uint8_t>(params.backend));
  out.u64(params.plaintext_modulus);
  out.u32(params.ring_dimension);
  out.u8(static_cast<std::uint8_t>(params.modulus_bits.size()));
  for (int b : params.modulus_bits) out.u8(static_cast<std::uint8_t>(b));
}

HeParams read_params(ByteReader& in) {
  HeParams params;
  const auto backend = in.u8();
  if (backend != 1 && backend != 2) throw DecodeError("unknown HE backend id");
  params.backend = static_cast<Backend>(backend);
  params.plaintext_modulus = in.u64();
  params.ring_dimension = in.u32();
  params.modulus_bits.resize(in.u8());
  for (auto& b : params.modulus_bits) b = in.u8();
  return params;
}

Context::Context(const HeParams& params) : params_(params) {
  params_.validate();
  const std::uint64_t step = 2 * std::uint64_t{params_.ring_dimension};
  for (int b : params_.modulus_bits) moduli_.push_back(detail::ntt_prime_below(b, step, moduli_));
  ByteWriter canon;
  write_params(canon, params_);
  for (auto q : moduli_) canon.u64(q);
  Sha256 h;
  h.update("headcount/he/params");
  h.update(canon.bytes());
  digest_ = h.finish();
  tables_ = std::make_unique<detail::Tables>(params_, moduli_);
}

Context::~Context() = default;

std::shared_ptr<const Context> Context::create(const HeParams& params) {
  return std::shared_ptr<const Context>(new Context(params));
}

namespace detail {

KeyId lattice_key_id(const Digest& params_digest, const std::vector<RnsPoly>& material) {
  ByteWriter w;
  for (const auto& p : material) write_poly(w, p);
  Sha256 h;
  h.update("headcount/he/key");
  h.update(params_digest);
  h.update(w.bytes());
  const auto d = h.finish();
  KeyId id{};
  std::copy_n(d.begin(), id.size(), id.begin());
  return id;
}

void write_poly(ByteWriter& out, const RnsPoly& p) {
  for (const auto& limb : p.limbs) {
    for (auto c : limb) out.u64(c);
  }
}

RnsPoly read_poly(ByteReader& in, std::size_t limbs, std::size_t n, std::span<const std::uint64_t> moduli) {
  RnsPoly p;
  p.limbs.assign(limbs, std::vector<std::uint64_t>(n));
  for (std::size_t i = 0; i < limbs; ++i) {
    for (auto& c : p.limbs[i]) {
      c = in.u64();
      if (c >= moduli[i]) throw DecodeError("polynomial coefficient out of range");
    }
  }
  return p;
}

}  // namespace detail

namespace {

constexpr std::uint8_t kCiphertextVersion = 1;

std::vector<std::uint64_t> limb_moduli(const Context& ctx) {
  if (ctx.backend() == Backend::lattice) return ctx.ciphertext_moduli();
  return {ctx.plaintext_modulus()};
}

}  // namespace

void Ciphertext::serialize(ByteWriter& out) const {
  ByteWriter payload;
  payload.u8(kCiphertextVersion);
  payload.raw(key_id);
  payload.u8(degree);
  payload.u8(static_cast<std::uint8_t>(readout.kind));
  payload.u32(readout.index);
  if (backend == Backend::emulated) payload.raw(nonce);
  payload.u8(static_cast<std::uint8_t>(components.size()));
  for (const auto& c : components) detail::write_poly(payload, c);
  out.u8(static_cast<std::uint8_t>(backend));
  out.raw(params_digest);
  out.u32(static_cast<std::uint32_t>(payload.bytes().size()));
  out.raw(payload.bytes());
}

std::vector<std::uint8_t> Ciphertext::to_bytes() const {
  ByteWriter w;
  serialize(w);
  return w.take();
}

Ciphertext Ciphertext::deserialize(ByteReader& in, const Context& ctx) {
  Ciphertext ct;
  const auto backend = in.u8();
  if (backend != static_cast<std::uint8_t>(ctx.backend())) throw ParamsMismatch("ciphertext backend differs");
  ct.backend = ctx.backend();
  ct.params_digest = in.array<32>();
  if (ct.params_digest != ctx.params_digest()) throw ParamsMismatch("ciphertext parameter digest differs");
  const auto len = in.u32();
  ByteReader payload(in.raw(len));
  if (payload.u8() != kCiphertextVersion) throw DecodeError("unsupported ciphertext version");
  ct.key_id = payload.array<8>();
  ct.degree = payload.u8();
  if (ct.degree != 1 && ct.degree != 2) throw DecodeError("ciphertext degree must be 1 or 2");
  const auto kind = payload.u8();
  if (kind != 1 && kind != 2) throw DecodeError("unknown readout kind");
  ct.readout.kind = static_cast<Readout::Kind>(kind);
  ct.readout.index = payload.u32();
  if (ct.readout.index >= ctx.ring_dimension() ||
      (ct.readout.kind == Readout::Kind::slot_sum && ct.readout.index != 0)) {
    throw DecodeError("readout index out of range");
  }
  if (ct.backend == Backend::emulated) ct.nonce = payload.array<16>();
  const std::size_t count = payload.u8();
  const std::size_t expected = ct.backend == Backend::lattice ? ct.degree + 1u : 1u;
  if (count != expected) throw DecodeError("wrong number of ciphertext components");
  const auto moduli = limb_moduli(ctx);
  for (std::size_t i = 0; i < count; ++i) {
    ct.components.push_back(detail::read_poly(payload, moduli.size(), ctx.ring_dimension(), moduli));
  }
  payload.expect_end();
  return ct;
}

void EncryptedBloom::serialize(ByteWriter& out) const {
  out.raw(params_digest);
  out.raw(key_id);
  out.u32(m);
  out.u8(static_cast<std::uint8_t>(packing));
  out.u8(static_cast<std::uint8_t>(orientation));
  out.u32(bits_per_ciphertext);
  out.u32(static_cast<std::uint32_t>(ciphertexts.size()));
  for (const auto& ct : ciphertexts) ct.serialize(out);
}

EncryptedBloom EncryptedBloom::deserialize(ByteReader& in, const Context& ctx) {
  EncryptedBloom eb;
  eb.params_digest = in.array<32>();
  if (eb.params_digest != ctx.params_digest()) throw ParamsMismatch("filter parameter digest differs");
  eb.key_id = in.array<8>();
  eb.m = in.u32();
  const auto packing = in.u8();
  const auto orientation = in.u8();
  if (packing != 1 && packing != 2) throw DecodeError("unknown packing");
  if (orientation > 1) throw DecodeError("unknown orientation");
  eb.packing = static_cast<Packing>(packing);
  eb.orientation = static_cast<Orientation>(orientation);
  eb.bits_per_ciphertext = in.u32();
  if (eb.m == 0 || eb.m > ctx.max_bits()) throw DecodeError("filter length out of range");
  if (eb.bits_per_ciphertext == 0 || eb.bits_per_ciphertext > ctx.ring_dimension()) {
    throw DecodeError("bits per ciphertext out of range");
  }
  const std::uint32_t count = in.u32();
  if (count != (eb.m + eb.bits_per_ciphertext - 1) / eb.bits_per_ciphertext) {
    throw DecodeError("ciphertext count does not match filter length");
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    auto ct = Ciphertext::deserialize(in, ctx);
    if (ct.key_id != eb.key_id || ct.degree != 1) throw DecodeError("inconsistent filter ciphertext");
    eb.ciphertexts.push_back(std::move(ct));
  }
  return eb;
}

PublicKey::PublicKey(std::shared_ptr<const Context> ctx, KeyId id, std::vector<RnsPoly> material)
    : ctx_(std::move(ctx)), key_id_(id), material_(std::move(material)) {
  if (!ctx_) throw std::invalid_argument("public key needs a context");
  const bool lattice = ctx_->backend() == Backend::lattice;
  if (material_.size() != (lattice ? 2u : 0u)) throw std::invalid_argument("malformed public key");
  for (const auto& p : material_) material_ntt_.push_back(detail::to_ntt(ctx_->tables(), p));
}

void PublicKey::serialize(ByteWriter& out) const {
  out.raw(ctx_->params_digest());
  out.raw(key_id_);
  out.u8(static_cast<std::uint8_t>(material_.size()));
  for (const auto& p : material_) detail::write_poly(out, p);
}

std::vector<std::uint8_t> PublicKey::to_bytes() const {
  ByteWriter w;
  serialize(w);
  return w.take();
}

PublicKey PublicKey::deserialize(ByteReader& in, std::shared_ptr<const Context> ctx) {
  if (in.array<32>() != ctx->params_digest()) throw ParamsMismatch("public key parameter digest differs");
  const KeyId id = in.array<8>();
  const std::size_t count = in.u8();
  if (count != (ctx->backend() == Backend::lattice ? 2u : 0u)) throw DecodeError("malformed public key");
  std::vector<RnsPoly> material;
  for (std::size_t i = 0; i < count; ++i) {
    material.push_back(detail::read_poly(in, ctx->ciphertext_moduli().size(), ctx->ring_dimension(),
                                         ctx->ciphertext_moduli()));
  }
  if (ctx->backend() == Backend::lattice && detail::lattice_key_id(ctx->params_digest(), material) != id) {
    throw DecodeError("public key identifier does not match its material");
  }
  return PublicKey(std::move(ctx), id, std::move(material));
}

}  // namespace headcount::he
