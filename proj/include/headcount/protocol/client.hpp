#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>

#include "headcount/he/secret.hpp"
#include "headcount/protocol/messages.hpp"
#include "headcount/protocol/transport.hpp"

namespace headcount::protocol {

struct FlowEstimate {
  std::uint64_t epoch_a = 0;
  std::uint64_t epoch_b = 0;
  std::uint64_t t_intersection = 0;
  double estimated_flow = 0;
  std::optional<double> footfall_a;
  std::optional<double> footfall_b;
};

// t = decrypt_count(ct); flow = estimate_cardinality(m, k, t).
FlowEstimate client_flow_estimate(const he::SecretKey& sk, const he::Ciphertext& ct, std::uint32_t m,
                                  std::uint8_t k);
double client_footfall_estimate(const he::SecretKey& sk, const he::Ciphertext& ct, std::uint32_t m,
                                std::uint8_t k);

// "HCKEY" | version:u8 | HE params | public key | secret key. Written with
// owner-only permissions.
void save_key_pair(const std::filesystem::path& path, const he::KeyPair& keys);
he::KeyPair load_key_pair(const std::filesystem::path& path);

// Fields of an announcement the client chooses; the rest follow from them
// and from the key.
struct EpochPlan {
  std::uint64_t epoch_id = 0;
  std::optional<std::uint64_t> helper_epoch;  // defaults to epoch_id
  std::uint32_t duration_s = 300;
  std::uint64_t plane_seed = 0;
  std::uint64_t bloom_seed = 0;
  std::uint16_t n_bits = 128;
  std::uint16_t dim = 128;
  std::uint16_t error_permille = 250;
  std::uint32_t bloom_m = 4096;
  std::uint8_t bloom_k = 3;
};

EpochConfig make_epoch_config(const EpochPlan& plan, const he::PublicKey& pk);

// Owns the key pair and talks to the server through a transport.
class Client {
 public:
  Client(Transport& transport, he::KeyPair keys) : transport_(transport), keys_(std::move(keys)) {}

  const he::PublicKey& public_key() const { return keys_.public_key; }

  // Returns the announced config; re-announcing identical bytes is accepted.
  EpochConfig announce(const EpochPlan& plan);
  EpochConfig fetch_announcement(std::uint64_t epoch_id);

  FlowEstimate flow(std::uint64_t epoch_a, std::uint64_t epoch_b, bool with_footfall = false);
  double footfall(std::uint64_t epoch_id, Site site);
  std::uint64_t footfall_bits(std::uint64_t epoch_id, Site site);

 private:
  Transport& transport_;
  he::KeyPair keys_;
};

}  // namespace headcount::protocol
