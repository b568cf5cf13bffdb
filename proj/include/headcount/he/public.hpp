#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "headcount/he/types.hpp"
#include "headcount/random.hpp"

// Operations that need only public material. This is everything the server
// and the cameras can do.
namespace headcount::he {

// bits holds one 0/1 byte per filter position; m = bits.size() <= ctx.max_bits().
EncryptedBloom encrypt_bits(const PublicKey& pk, std::span<const std::uint8_t> bits, Rng& rng,
                            const EncodeOptions& options = {});

// value < p, placed in a single slot.
Ciphertext encrypt_value(const PublicKey& pk, std::uint64_t value, Rng& rng);

// Decrypts to popcount(A AND B). Slot packing multiplies slot-wise; coefficient
// packing needs opposite orientations and reads one coefficient.
Ciphertext encrypted_intersection_count(const Context& ctx, const EncryptedBloom& a,
                                        const EncryptedBloom& b);

// Decrypts to the number of set bits; additions only under slot packing.
Ciphertext encrypted_popcount(const Context& ctx, const EncryptedBloom& enc);

Ciphertext add(const Context& ctx, const Ciphertext& a, const Ciphertext& b);
// Slot-wise product; both operands must be fresh.
Ciphertext multiply(const Context& ctx, const Ciphertext& a, const Ciphertext& b);

// Adds a fresh encryption of zero.
Ciphertext rerandomize(const PublicKey& pk, const Ciphertext& ct, Rng& rng);

// Prepares a result for the key holder: every plaintext coefficient except
// the one the readout uses is replaced by uniform noise, and the evaluation
// noise is flooded.
Ciphertext release(const PublicKey& pk, const Ciphertext& ct, Rng& rng);

}  // namespace headcount::he
