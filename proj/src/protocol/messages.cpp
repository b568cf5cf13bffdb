#include "headcount/protocol/messages.hpp"

#include <algorithm>
#include <stdexcept>

namespace headcount::protocol {

const char* msg_type_name(MsgType t) {
  switch (t) {
    case MsgType::announce: return "EpochAnnounce";
    case MsgType::helper_batch: return "HelperBatch";
    case MsgType::submission: return "EpochSubmission";
    case MsgType::flow_query: return "FlowQuery";
    case MsgType::flow_response: return "FlowResponse";
    case MsgType::footfall_query: return "FootfallQuery";
    case MsgType::footfall_response: return "FootfallResponse";
    case MsgType::error: return "Error";
  }
  return "unknown";
}

std::vector<std::uint8_t> encode_frame(const Frame& f) {
  if (f.payload.size() > kMaxPayload) throw std::length_error("payload exceeds the frame limit");
  ByteWriter w;
  w.raw(kMagic);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(f.type));
  w.u32(static_cast<std::uint32_t>(f.payload.size()));
  w.raw(f.payload);
  return w.take();
}

std::uint32_t payload_length(std::span<const std::uint8_t, kHeaderSize> header) {
  if (!std::equal(header.begin(), header.begin() + 4, kMagic)) throw DecodeError("bad frame magic");
  if (header[4] != kVersion) throw DecodeError("unsupported frame version " + std::to_string(header[4]));
  if (header[5] < 1 || header[5] > 8) throw DecodeError("unknown message type " + std::to_string(header[5]));
  ByteReader r(header.subspan(6));
  const auto len = r.u32();
  if (len > kMaxPayload) throw DecodeError("frame payload too large");
  return len;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw DecodeError("frame shorter than its header");
  const auto len = payload_length(bytes.first<kHeaderSize>());
  if (bytes.size() - kHeaderSize != len) throw DecodeError("frame length does not match its header");
  Frame f;
  f.type = static_cast<MsgType>(bytes[5]);
  f.payload.assign(bytes.begin() + kHeaderSize, bytes.end());
  return f;
}

const char* site_name(Site s) { return s == Site::A ? "A" : "B"; }

Site parse_site(const std::string& s) {
  if (s == "A" || s == "a") return Site::A;
  if (s == "B" || s == "b") return Site::B;
  throw std::invalid_argument("site must be A or B, got '" + s + "'");
}

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::bad_request: return "bad_request";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::unregistered: return "unregistered";
    case ErrorCode::incompatible: return "incompatible";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

const char* field_kind_name(FieldKind k) {
  switch (k) {
    case FieldKind::epoch: return "epoch";
    case FieldKind::count: return "count";
    case FieldKind::seed: return "seed";
    case FieldKind::parameter: return "parameter";
    case FieldKind::he_params: return "he_params";
    case FieldKind::digest: return "digest";
    case FieldKind::public_key: return "public_key";
    case FieldKind::helper_data: return "helper_data";
    case FieldKind::ciphertext: return "ciphertext";
    case FieldKind::encrypted_filter: return "encrypted_filter";
    case FieldKind::site: return "site";
    case FieldKind::text: return "text";
    case FieldKind::embedding: return "embedding";
    case FieldKind::simhash: return "simhash";
    case FieldKind::plain_filter: return "plain_filter";
    case FieldKind::identifier: return "identifier";
  }
  return "unknown";
}

bool is_private(FieldKind k) {
  return k == FieldKind::embedding || k == FieldKind::simhash || k == FieldKind::plain_filter ||
         k == FieldKind::identifier;
}

const std::vector<FieldKind>& message_schema(MsgType t) {
  using K = FieldKind;
  static const std::vector<K> announce{K::epoch, K::parameter, K::epoch, K::seed, K::parameter,
                                       K::he_params, K::digest, K::public_key};
  static const std::vector<K> helpers{K::epoch, K::count, K::helper_data};
  static const std::vector<K> submission{K::epoch, K::site, K::encrypted_filter};
  static const std::vector<K> flow_query{K::epoch};
  static const std::vector<K> flow_response{K::epoch, K::ciphertext};
  static const std::vector<K> footfall_query{K::epoch, K::site};
  static const std::vector<K> footfall_response{K::epoch, K::site, K::ciphertext};
  static const std::vector<K> error{K::parameter, K::text};
  switch (t) {
    case MsgType::announce: return announce;
    case MsgType::helper_batch: return helpers;
    case MsgType::submission: return submission;
    case MsgType::flow_query: return flow_query;
    case MsgType::flow_response: return flow_response;
    case MsgType::footfall_query: return footfall_query;
    case MsgType::footfall_response: return footfall_response;
    case MsgType::error: return error;
  }
  throw std::invalid_argument("unknown message type");
}

void EpochConfig::validate() const {
  if (n_bits != 64 && n_bits != 128 && n_bits != 256) throw std::invalid_argument("n_bits must be 64, 128 or 256");
  if (dim < 2) throw std::invalid_argument("embedding dimension must be at least 2");
  if (code != bch::select_code(n_bits, error_ratio()).params()) {
    throw std::invalid_argument("announced code does not match (n_bits, r)");
  }
  if (bloom_m < 8 || bloom_k < 1) throw std::invalid_argument("bloom parameters out of range");
  he_params.validate();
  if (bloom_m >= he_params.plaintext_modulus) throw std::invalid_argument("bloom m must be below the plaintext modulus");
  if (duration_s == 0) throw std::invalid_argument("epoch duration must be positive");
}

void write_payload(FieldWriter& w, const EpochConfig& m) {
  w.field(FieldKind::epoch).u64(m.epoch_id);
  w.field(FieldKind::parameter).u32(m.duration_s);
  w.field(FieldKind::epoch).u64(m.helper_epoch);
  w.field(FieldKind::seed).u64(m.plane_seed).u64(m.bloom_seed);
  w.field(FieldKind::parameter).u16(m.n_bits).u16(m.dim).u16(m.error_permille);
  w.field(FieldKind::parameter).u16(m.code.n).u16(m.code.k).u16(m.code.t);
  w.field(FieldKind::parameter).u32(m.bloom_m).u8(m.bloom_k);
  he::write_params(w.field(FieldKind::he_params), m.he_params);
  w.field(FieldKind::digest).raw(m.params_digest);
  w.field(FieldKind::public_key).u32(static_cast<std::uint32_t>(m.public_key.size())).raw(m.public_key);
}

void write_payload(FieldWriter& w, const HelperBatch& m) {
  w.field(FieldKind::epoch).u64(m.epoch_id);
  w.field(FieldKind::count).u32(static_cast<std::uint32_t>(m.helpers.size()));
  for (const auto& h : m.helpers) h.serialize(w.field(FieldKind::helper_data));
}

void write_payload(FieldWriter& w, const EpochSubmission& m) {
  w.field(FieldKind::epoch).u64(m.epoch_id);
  w.field(FieldKind::site).u8(static_cast<std::uint8_t>(m.site));
  m.filter.serialize(w.field(FieldKind::encrypted_filter));
}

void write_payload(FieldWriter& w, const FlowQuery& m) {
  w.field(FieldKind::epoch).u64(m.epoch_a).u64(m.epoch_b);
}

void write_payload(FieldWriter& w, const FlowResponse& m) {
  w.field(FieldKind::epoch).u64(m.epoch_a).u64(m.epoch_b);
  m.count.serialize(w.field(FieldKind::ciphertext));
}

void write_payload(FieldWriter& w, const FootfallQuery& m) {
  w.field(FieldKind::epoch).u64(m.epoch_id);
  w.field(FieldKind::site).u8(static_cast<std::uint8_t>(m.site));
}

void write_payload(FieldWriter& w, const FootfallResponse& m) {
  w.field(FieldKind::epoch).u64(m.epoch_id);
  w.field(FieldKind::site).u8(static_cast<std::uint8_t>(m.site));
  m.count.serialize(w.field(FieldKind::ciphertext));
}

void write_payload(FieldWriter& w, const ErrorMsg& m) {
  w.field(FieldKind::parameter).u16(static_cast<std::uint16_t>(m.code));
  w.field(FieldKind::text).str(m.message);
}

namespace {

template <typename M>
Frame make_frame(MsgType t, const M& m) {
  FieldWriter w;
  write_payload(w, m);
  return {t, w.take()};
}

Site read_site(ByteReader& r) {
  const auto s = r.u8();
  if (s != 1 && s != 2) throw DecodeError("unknown site");
  return static_cast<Site>(s);
}

}  // namespace

Frame to_frame(const EpochConfig& m) { return make_frame(MsgType::announce, m); }
Frame to_frame(const HelperBatch& m) { return make_frame(MsgType::helper_batch, m); }
Frame to_frame(const EpochSubmission& m) { return make_frame(MsgType::submission, m); }
Frame to_frame(const FlowQuery& m) { return make_frame(MsgType::flow_query, m); }
Frame to_frame(const FlowResponse& m) { return make_frame(MsgType::flow_response, m); }
Frame to_frame(const FootfallQuery& m) { return make_frame(MsgType::footfall_query, m); }
Frame to_frame(const FootfallResponse& m) { return make_frame(MsgType::footfall_response, m); }
Frame to_frame(const ErrorMsg& m) { return make_frame(MsgType::error, m); }

Frame fetch_frame(MsgType t, std::uint64_t epoch_id) {
  if (t != MsgType::announce && t != MsgType::helper_batch) throw std::invalid_argument("only announcements and helper batches are fetched");
  ByteWriter w;
  w.u64(epoch_id);
  return {t, w.take()};
}

bool is_fetch(const Frame& f) {
  return (f.type == MsgType::announce || f.type == MsgType::helper_batch) && f.payload.size() == 8;
}

std::uint64_t fetch_epoch(const Frame& f) {
  ByteReader r(f.payload);
  return r.u64();
}

Frame ack_frame(MsgType t) { return {t, {}}; }

EpochConfig read_epoch_config(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  EpochConfig m;
  m.epoch_id = r.u64();
  m.duration_s = r.u32();
  m.helper_epoch = r.u64();
  m.plane_seed = r.u64();
  m.bloom_seed = r.u64();
  m.n_bits = r.u16();
  m.dim = r.u16();
  m.error_permille = r.u16();
  m.code.n = r.u16();
  m.code.k = r.u16();
  m.code.t = r.u16();
  m.bloom_m = r.u32();
  m.bloom_k = r.u8();
  m.he_params = he::read_params(r);
  m.params_digest = r.array<32>();
  const auto len = r.u32();
  const auto pk = r.raw(len);
  m.public_key.assign(pk.begin(), pk.end());
  r.expect_end();
  return m;
}

HelperBatch read_helper_batch(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  HelperBatch m;
  m.epoch_id = r.u64();
  const auto count = r.u32();
  // Every record is at least 30 bytes, which bounds count before allocation.
  if (count > r.remaining() / 30) throw DecodeError("helper count exceeds payload");
  m.helpers.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) m.helpers.push_back(fuzzy::HelperData::deserialize(r));
  r.expect_end();
  return m;
}

std::pair<std::uint64_t, Site> peek_submission(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const auto epoch = r.u64();
  return {epoch, read_site(r)};
}

EpochSubmission read_submission(std::span<const std::uint8_t> payload, const he::Context& ctx) {
  ByteReader r(payload);
  EpochSubmission m;
  m.epoch_id = r.u64();
  m.site = read_site(r);
  m.filter = he::EncryptedBloom::deserialize(r, ctx);
  r.expect_end();
  return m;
}

FlowQuery read_flow_query(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  FlowQuery m;
  m.epoch_a = r.u64();
  m.epoch_b = r.u64();
  r.expect_end();
  return m;
}

FlowResponse read_flow_response(std::span<const std::uint8_t> payload, const he::Context& ctx) {
  ByteReader r(payload);
  FlowResponse m;
  m.epoch_a = r.u64();
  m.epoch_b = r.u64();
  m.count = he::Ciphertext::deserialize(r, ctx);
  r.expect_end();
  return m;
}

FootfallQuery read_footfall_query(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  FootfallQuery m;
  m.epoch_id = r.u64();
  m.site = read_site(r);
  r.expect_end();
  return m;
}

FootfallResponse read_footfall_response(std::span<const std::uint8_t> payload, const he::Context& ctx) {
  ByteReader r(payload);
  FootfallResponse m;
  m.epoch_id = r.u64();
  m.site = read_site(r);
  m.count = he::Ciphertext::deserialize(r, ctx);
  r.expect_end();
  return m;
}

ErrorMsg read_error(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  ErrorMsg m;
  const auto code = r.u16();
  if (code < 1 || code > 6) throw DecodeError("unknown error code");
  m.code = static_cast<ErrorCode>(code);
  m.message = r.str();
  r.expect_end();
  return m;
}

he::PublicKey announced_key(const EpochConfig& cfg) {
  auto ctx = he::Context::create(cfg.he_params);
  if (ctx->params_digest() != cfg.params_digest) {
    throw std::invalid_argument("announced parameter digest does not match the HE parameters");
  }
  ByteReader r(cfg.public_key);
  auto pk = he::PublicKey::deserialize(r, std::move(ctx));
  r.expect_end();
  return pk;
}

}  // namespace headcount::protocol
