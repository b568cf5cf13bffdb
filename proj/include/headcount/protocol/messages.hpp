#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "headcount/bch.hpp"
#include "headcount/bytes.hpp"
#include "headcount/fuzzy.hpp"
#include "headcount/he/types.hpp"

namespace headcount::protocol {

// "HDCT" | version:u8 | msg_type:u8 | payload_len:u32 LE | payload
inline constexpr std::uint8_t kMagic[4] = {'H', 'D', 'C', 'T'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 10;
inline constexpr std::uint32_t kMaxPayload = 256u << 20;

enum class MsgType : std::uint8_t {
  announce = 1,
  helper_batch = 2,
  submission = 3,
  flow_query = 4,
  flow_response = 5,
  footfall_query = 6,
  footfall_response = 7,
  error = 8,
};
const char* msg_type_name(MsgType t);

struct Frame {
  MsgType type = MsgType::error;
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_frame(const Frame& f);
// Parses a complete frame; throws DecodeError on any header mismatch.
Frame decode_frame(std::span<const std::uint8_t> bytes);
// Validates a header and returns its payload length.
std::uint32_t payload_length(std::span<const std::uint8_t, kHeaderSize> header);

enum class Site : std::uint8_t { A = 1, B = 2 };
const char* site_name(Site s);
Site parse_site(const std::string& s);

// Everything both cameras of an epoch must agree on, announced by the client.
struct EpochConfig {
  std::uint64_t epoch_id = 0;
  std::uint32_t duration_s = 300;
  // Epoch whose helper batch camera B reproduces against; equal to epoch_id
  // except for same-camera revisits across epochs.
  std::uint64_t helper_epoch = 0;
  std::uint64_t plane_seed = 0;
  std::uint64_t bloom_seed = 0;
  std::uint16_t n_bits = 128;
  std::uint16_t dim = 128;
  std::uint16_t error_permille = 250;
  bch::CodeParams code;
  std::uint32_t bloom_m = 4096;
  std::uint8_t bloom_k = 3;
  he::HeParams he_params;
  Digest params_digest{};
  std::vector<std::uint8_t> public_key;  // PublicKey::serialize bytes

  double error_ratio() const { return error_permille / 1000.0; }
  // Throws std::invalid_argument when fields disagree with each other.
  void validate() const;
  bool operator==(const EpochConfig&) const = default;
};

struct HelperBatch {
  std::uint64_t epoch_id = 0;
  std::vector<fuzzy::HelperData> helpers;
  bool operator==(const HelperBatch&) const = default;
};

struct EpochSubmission {
  std::uint64_t epoch_id = 0;
  Site site = Site::A;
  he::EncryptedBloom filter;
};

struct FlowQuery {
  std::uint64_t epoch_a = 0;
  std::uint64_t epoch_b = 0;
};

struct FlowResponse {
  std::uint64_t epoch_a = 0;
  std::uint64_t epoch_b = 0;
  he::Ciphertext count;
};

struct FootfallQuery {
  std::uint64_t epoch_id = 0;
  Site site = Site::A;
};

struct FootfallResponse {
  std::uint64_t epoch_id = 0;
  Site site = Site::A;
  he::Ciphertext count;
};

enum class ErrorCode : std::uint16_t {
  bad_request = 1,
  not_found = 2,
  conflict = 3,
  unregistered = 4,
  incompatible = 5,
  internal = 6,
};
const char* error_code_name(ErrorCode c);

struct ErrorMsg {
  ErrorCode code = ErrorCode::internal;
  std::string message;
};

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Kinds of value a payload field may hold. The last four must never appear
// in any message schema.
enum class FieldKind : std::uint8_t {
  epoch,
  count,
  seed,
  parameter,
  he_params,
  digest,
  public_key,
  helper_data,
  ciphertext,
  encrypted_filter,
  site,
  text,
  embedding,
  simhash,
  plain_filter,
  identifier,
};
const char* field_kind_name(FieldKind k);
bool is_private(FieldKind k);

// Field kinds in the order each payload writes them, consecutive repeats
// collapsed.
const std::vector<FieldKind>& message_schema(MsgType t);

// Payload encoders record the kind of every field written so the schema
// can be checked against what actually goes on the wire.
class FieldWriter {
 public:
  ByteWriter& field(FieldKind k) {
    if (kinds_.empty() || kinds_.back() != k) kinds_.push_back(k);
    return out_;
  }
  const std::vector<FieldKind>& kinds() const { return kinds_; }
  std::vector<std::uint8_t> take() { return out_.take(); }

 private:
  ByteWriter out_;
  std::vector<FieldKind> kinds_;
};

void write_payload(FieldWriter& w, const EpochConfig& m);
void write_payload(FieldWriter& w, const HelperBatch& m);
void write_payload(FieldWriter& w, const EpochSubmission& m);
void write_payload(FieldWriter& w, const FlowQuery& m);
void write_payload(FieldWriter& w, const FlowResponse& m);
void write_payload(FieldWriter& w, const FootfallQuery& m);
void write_payload(FieldWriter& w, const FootfallResponse& m);
void write_payload(FieldWriter& w, const ErrorMsg& m);

Frame to_frame(const EpochConfig& m);
Frame to_frame(const HelperBatch& m);
Frame to_frame(const EpochSubmission& m);
Frame to_frame(const FlowQuery& m);
Frame to_frame(const FlowResponse& m);
Frame to_frame(const FootfallQuery& m);
Frame to_frame(const FootfallResponse& m);
Frame to_frame(const ErrorMsg& m);

// A fetch is an announce or helper_batch frame whose payload is only the
// 8-byte epoch id; an acknowledgement echoes the request type with an empty
// payload.
Frame fetch_frame(MsgType t, std::uint64_t epoch_id);
bool is_fetch(const Frame& f);
std::uint64_t fetch_epoch(const Frame& f);
Frame ack_frame(MsgType t);

EpochConfig read_epoch_config(std::span<const std::uint8_t> payload);
HelperBatch read_helper_batch(std::span<const std::uint8_t> payload);
// The epoch id and site precede the filter, so a receiver can pick the
// matching HE context before parsing the ciphertexts.
std::pair<std::uint64_t, Site> peek_submission(std::span<const std::uint8_t> payload);
EpochSubmission read_submission(std::span<const std::uint8_t> payload, const he::Context& ctx);
FlowQuery read_flow_query(std::span<const std::uint8_t> payload);
FlowResponse read_flow_response(std::span<const std::uint8_t> payload, const he::Context& ctx);
FootfallQuery read_footfall_query(std::span<const std::uint8_t> payload);
FootfallResponse read_footfall_response(std::span<const std::uint8_t> payload, const he::Context& ctx);
ErrorMsg read_error(std::span<const std::uint8_t> payload);

// Rebuilds the announced public key; checks it against the params digest.
he::PublicKey announced_key(const EpochConfig& cfg);

}  // namespace headcount::protocol
