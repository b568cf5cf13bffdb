#include "headcount/protocol/client.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "headcount/bloom.hpp"

namespace headcount::protocol {

FlowEstimate client_flow_estimate(const he::SecretKey& sk, const he::Ciphertext& ct, std::uint32_t m,
                                  std::uint8_t k) {
  FlowEstimate out;
  out.t_intersection = he::decrypt_count(sk, ct);
  out.estimated_flow = bloom::estimate_cardinality(m, k, out.t_intersection);
  return out;
}

double client_footfall_estimate(const he::SecretKey& sk, const he::Ciphertext& ct, std::uint32_t m,
                                std::uint8_t k) {
  return bloom::estimate_cardinality(m, k, he::decrypt_count(sk, ct));
}

namespace {
constexpr std::uint8_t kKeyMagic[5] = {'H', 'C', 'K', 'E', 'Y'};
}

void save_key_pair(const std::filesystem::path& path, const he::KeyPair& keys) {
  ByteWriter w;
  w.raw(kKeyMagic).u8(1);
  he::write_params(w, keys.public_key.context().params());
  keys.public_key.serialize(w);
  keys.secret_key.serialize(w);
  const auto bytes = w.take();
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write key file " + path.string());
  }
  std::filesystem::permissions(path, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write key file " + path.string());
}

he::KeyPair load_key_pair(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read key file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader r(bytes);
  const auto magic = r.raw(sizeof kKeyMagic);
  if (!std::equal(magic.begin(), magic.end(), kKeyMagic) || r.u8() != 1) {
    throw DecodeError(path.string() + " is not a key file");
  }
  auto ctx = he::Context::create(he::read_params(r));
  auto pk = he::PublicKey::deserialize(r, ctx);
  auto sk = he::SecretKey::deserialize(r, ctx);
  r.expect_end();
  if (pk.key_id() != sk.key_id()) throw DecodeError(path.string() + " holds mismatched keys");
  return {std::move(pk), std::move(sk)};
}

EpochConfig make_epoch_config(const EpochPlan& plan, const he::PublicKey& pk) {
  EpochConfig cfg;
  cfg.epoch_id = plan.epoch_id;
  cfg.helper_epoch = plan.helper_epoch.value_or(plan.epoch_id);
  cfg.duration_s = plan.duration_s;
  cfg.plane_seed = plan.plane_seed;
  cfg.bloom_seed = plan.bloom_seed;
  cfg.n_bits = plan.n_bits;
  cfg.dim = plan.dim;
  cfg.error_permille = plan.error_permille;
  cfg.code = bch::select_code(plan.n_bits, cfg.error_ratio()).params();
  cfg.bloom_m = plan.bloom_m;
  cfg.bloom_k = plan.bloom_k;
  cfg.he_params = pk.context().params();
  cfg.params_digest = pk.context().params_digest();
  cfg.public_key = pk.to_bytes();
  cfg.validate();
  return cfg;
}

EpochConfig Client::announce(const EpochPlan& plan) {
  auto cfg = make_epoch_config(plan, keys_.public_key);
  call(transport_, to_frame(cfg), MsgType::announce);
  return cfg;
}

EpochConfig Client::fetch_announcement(std::uint64_t epoch_id) {
  return read_epoch_config(call(transport_, fetch_frame(MsgType::announce, epoch_id), MsgType::announce).payload);
}

FlowEstimate Client::flow(std::uint64_t epoch_a, std::uint64_t epoch_b, bool with_footfall) {
  const auto cfg = fetch_announcement(epoch_a);
  const auto& ctx = keys_.secret_key.context();
  const auto resp = read_flow_response(
      call(transport_, to_frame(FlowQuery{epoch_a, epoch_b}), MsgType::flow_response).payload, ctx);
  if (resp.epoch_a != epoch_a || resp.epoch_b != epoch_b) throw DecodeError("flow response for other epochs");
  auto out = client_flow_estimate(keys_.secret_key, resp.count, cfg.bloom_m, cfg.bloom_k);
  out.epoch_a = epoch_a;
  out.epoch_b = epoch_b;
  if (with_footfall) {
    out.footfall_a = footfall(epoch_a, Site::A);
    out.footfall_b = footfall(epoch_b, Site::B);
  }
  return out;
}

std::uint64_t Client::footfall_bits(std::uint64_t epoch_id, Site site) {
  const auto& ctx = keys_.secret_key.context();
  const auto resp = read_footfall_response(
      call(transport_, to_frame(FootfallQuery{epoch_id, site}), MsgType::footfall_response).payload, ctx);
  if (resp.epoch_id != epoch_id || resp.site != site) throw DecodeError("footfall response for another epoch");
  return he::decrypt_count(keys_.secret_key, resp.count);
}

double Client::footfall(std::uint64_t epoch_id, Site site) {
  const auto cfg = fetch_announcement(epoch_id);
  return bloom::estimate_cardinality(cfg.bloom_m, cfg.bloom_k, footfall_bits(epoch_id, site));
}

}  // namespace headcount::protocol
