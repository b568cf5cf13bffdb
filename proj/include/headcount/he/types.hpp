#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "headcount/bytes.hpp"
#include "headcount/digest.hpp"

// Types shared by every holder of public HE material.
namespace headcount::he {

namespace detail {
struct Tables;
}

class HeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
// Operands were produced under different parameters or shapes.
class ParamsMismatch : public HeError {
 public:
  using HeError::HeError;
};
// Ciphertext was encrypted under a different key pair.
class KeyMismatch : public HeError {
 public:
  using HeError::HeError;
};
// The one multiplicative level has already been used.
class DepthExceeded : public HeError {
 public:
  using HeError::HeError;
};
// Noise exceeded the decodable range.
class DecryptionFailure : public HeError {
 public:
  using HeError::HeError;
};

enum class Backend : std::uint8_t { emulated = 1, lattice = 2 };

struct HeParams {
  Backend backend = Backend::lattice;
  std::uint64_t plaintext_modulus = 65537;
  std::uint32_t ring_dimension = 4096;
  // Bit sizes of the RNS primes making up the ciphertext modulus Q.
  std::vector<int> modulus_bits{54, 54};

  static HeParams lattice() { return {}; }
  static HeParams emulated() { return {Backend::emulated, 65537, 4096, {}}; }

  // Throws std::invalid_argument for unsupported combinations.
  void validate() const;

  bool operator==(const HeParams&) const = default;
};

const char* backend_name(Backend b);
Backend parse_backend(const std::string& name);

class Context {
 public:
  static std::shared_ptr<const Context> create(const HeParams& params);
  ~Context();
  Context(const Context&) = delete;
  Context& operator=(const Context&) = delete;

  const HeParams& params() const { return params_; }
  Backend backend() const { return params_.backend; }
  std::uint32_t ring_dimension() const { return params_.ring_dimension; }
  std::uint64_t plaintext_modulus() const { return params_.plaintext_modulus; }
  // RNS primes of Q; empty for the emulated backend.
  const std::vector<std::uint64_t>& ciphertext_moduli() const { return moduli_; }
  // SHA-256 of the canonical parameter encoding, including the derived primes.
  const Digest& params_digest() const { return digest_; }
  // Largest logical filter length; counts must stay below p.
  std::uint32_t max_bits() const { return static_cast<std::uint32_t>(params_.plaintext_modulus - 1); }

  const detail::Tables& tables() const { return *tables_; }

 private:
  explicit Context(const HeParams& params);

  HeParams params_;
  std::vector<std::uint64_t> moduli_;
  Digest digest_{};
  std::unique_ptr<detail::Tables> tables_;
};

using KeyId = std::array<std::uint8_t, 8>;

// One polynomial modulo each RNS prime, coefficient order.
struct RnsPoly {
  std::vector<std::vector<std::uint64_t>> limbs;
  bool operator==(const RnsPoly&) const = default;
};

// Which plaintext quantity decrypt_count reports.
struct Readout {
  enum class Kind : std::uint8_t { slot_sum = 1, coefficient = 2 };
  Kind kind = Kind::slot_sum;
  std::uint32_t index = 0;  // coefficient readout only
  bool operator==(const Readout&) const = default;
};

class Ciphertext {
 public:
  Backend backend = Backend::lattice;
  Digest params_digest{};
  KeyId key_id{};
  std::uint8_t degree = 1;  // 2 after the multiplicative level
  Readout readout;
  std::array<std::uint8_t, 16> nonce{};  // emulated backend only
  // lattice: degree + 1 components over Q; emulated: the plaintext mod p
  std::vector<RnsPoly> components;

  bool operator==(const Ciphertext&) const = default;

  // backend_id:u8 | params_digest:32 | payload_len:u32 | payload
  void serialize(ByteWriter& out) const;
  std::vector<std::uint8_t> to_bytes() const;
  static Ciphertext deserialize(ByteReader& in, const Context& ctx);
};

enum class Packing : std::uint8_t { slots = 1, coefficients = 2 };
// Coefficient packing only: a ciphertext product yields the inner product
// when exactly one operand is reversed.
enum class Orientation : std::uint8_t { ascending = 0, reversed = 1 };

struct EncodeOptions {
  Packing packing = Packing::slots;
  Orientation orientation = Orientation::ascending;
  std::uint32_t bits_per_ciphertext = 0;  // 0 selects the ring dimension
};

struct EncryptedBloom {
  Digest params_digest{};
  KeyId key_id{};
  std::uint32_t m = 0;
  Packing packing = Packing::slots;
  Orientation orientation = Orientation::ascending;
  std::uint32_t bits_per_ciphertext = 0;
  std::vector<Ciphertext> ciphertexts;  // ceil(m / bits_per_ciphertext) chunks

  bool operator==(const EncryptedBloom&) const = default;

  // params_digest:32 | key_id:8 | m:u32 | packing:u8 | orientation:u8 |
  // bits_per_ciphertext:u32 | count:u32 | ciphertexts
  void serialize(ByteWriter& out) const;
  static EncryptedBloom deserialize(ByteReader& in, const Context& ctx);
};

class PublicKey {
 public:
  PublicKey(std::shared_ptr<const Context> ctx, KeyId id, std::vector<RnsPoly> material);

  const Context& context() const { return *ctx_; }
  const std::shared_ptr<const Context>& context_ptr() const { return ctx_; }
  const KeyId& key_id() const { return key_id_; }
  // lattice: (b, a) with b = -(a s + e); emulated: empty
  const std::vector<RnsPoly>& material() const { return material_; }
  // Same polynomials in NTT form, per limb.
  const std::vector<RnsPoly>& material_ntt() const { return material_ntt_; }

  // params_digest:32 | key_id:8 | count:u8 | polys
  void serialize(ByteWriter& out) const;
  std::vector<std::uint8_t> to_bytes() const;
  static PublicKey deserialize(ByteReader& in, std::shared_ptr<const Context> ctx);

 private:
  std::shared_ptr<const Context> ctx_;
  KeyId key_id_{};
  std::vector<RnsPoly> material_;
  std::vector<RnsPoly> material_ntt_;
};

// Canonical parameter encoding, also carried in key announcements.
void write_params(ByteWriter& out, const HeParams& params);
HeParams read_params(ByteReader& in);

}  // namespace headcount::he
