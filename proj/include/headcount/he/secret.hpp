#pragma once

#ifdef HEADCOUNT_SERVER_BUILD
#error "secret key material is not available to the server build"
#endif

#include <cstdint>
#include <memory>
#include <vector>

#include "headcount/he/types.hpp"
#include "headcount/random.hpp"

namespace headcount::he {

class SecretKey {
 public:
  const Context& context() const { return *ctx_; }
  const std::shared_ptr<const Context>& context_ptr() const { return ctx_; }
  const KeyId& key_id() const { return key_id_; }

  // Local key storage only; no protocol message carries this encoding.
  void serialize(ByteWriter& out) const;
  static SecretKey deserialize(ByteReader& in, std::shared_ptr<const Context> ctx);

 private:
  friend struct SecretKeyAccess;
  SecretKey(std::shared_ptr<const Context> ctx, KeyId id, std::vector<std::int64_t> s,
            std::array<std::uint8_t, 32> seed);

  std::shared_ptr<const Context> ctx_;
  KeyId key_id_{};
  std::vector<std::int64_t> s_;             // lattice: ternary secret
  std::array<std::uint8_t, 32> seed_{};     // emulated: key identity source
};

struct KeyPair {
  PublicKey public_key;
  SecretKey secret_key;
};

KeyPair keygen(std::shared_ptr<const Context> ctx, Rng& rng);
// Deterministic for a fixed seed.
KeyPair keygen(std::shared_ptr<const Context> ctx, std::uint64_t seed);

// The readout value in [0, p).
std::uint64_t decrypt_count(const SecretKey& sk, const Ciphertext& ct);

std::vector<std::uint8_t> decrypt_bits(const SecretKey& sk, const EncryptedBloom& enc);

// Raw plaintext polynomial mod p.
std::vector<std::uint64_t> decrypt_plaintext(const SecretKey& sk, const Ciphertext& ct);

// log2 of the distance from the decoding threshold; the emulated backend
// reports infinity.
double noise_budget_bits(const SecretKey& sk, const Ciphertext& ct);

}  // namespace headcount::he
