#include "headcount/fuzzy.hpp"

#include <openssl/crypto.h>

#include <algorithm>

#include "headcount/digest.hpp"

namespace headcount::fuzzy {
namespace {

Digest kdf(std::string_view label, const Salt& salt, const BitString& w) {
  const auto packed = w.to_bytes();
  return Sha256().update(label).update(salt).update(packed).finish();
}

Enrollment enroll(const BitString& w, const bch::BchCode& code, const BitString& codeword,
                  const Salt& salt) {
  Enrollment out;
  out.helper.code = code.params();
  out.helper.offset = w ^ codeword;
  out.helper.salt = salt;
  out.helper.tag = derive_tag(salt, w);
  out.id = derive_key(salt, w);
  return out;
}

void check_length(const BitString& w, const bch::BchCode& code) {
  if (static_cast<int>(w.size()) != code.n()) {
    throw std::invalid_argument("fuzzy extractor input has length " + std::to_string(w.size()) +
                                ", code expects " + std::to_string(code.n()));
  }
}

}  // namespace

Identifier derive_key(const Salt& salt, const BitString& w) {
  return Identifier{kdf("headcount/r", salt, w)};
}

Tag derive_tag(const Salt& salt, const BitString& w) {
  const auto d = kdf("headcount/tag", salt, w);
  Tag tag{};
  std::copy_n(d.begin(), tag.size(), tag.begin());
  return tag;
}

Enrollment gen(const BitString& w, const bch::BchCode& code, Rng& rng) {
  check_length(w, code);
  const auto c = code.random_codeword(rng);
  Salt salt{};
  for (std::size_t i = 0; i < salt.size(); i += 8) {
    const std::uint64_t r = rng();
    for (std::size_t b = 0; b < 8; ++b) salt[i + b] = static_cast<std::uint8_t>(r >> (8 * b));
  }
  return enroll(w, code, c, salt);
}

Enrollment gen(const BitString& w, const bch::BchCode& code, std::uint64_t rng_seed) {
  Rng rng = make_rng(rng_seed);
  return gen(w, code, rng);
}

Enrollment gen(const BitString& w, const bch::BchCode& code, std::uint64_t rng_seed,
               const Salt& salt) {
  check_length(w, code);
  return enroll(w, code, code.random_codeword(rng_seed), salt);
}

std::optional<Reproduction> rep(const BitString& w_prime, const HelperData& helper) {
  const auto code = bch::BchCode::lookup(helper.code);
  check_length(w_prime, code);
  if (helper.offset.size() != w_prime.size()) {
    throw std::invalid_argument("helper offset length does not match the code");
  }
  auto decoded = code.decode(w_prime ^ helper.offset);
  if (!decoded) return std::nullopt;
  const BitString recovered = helper.offset ^ decoded->codeword;
  const Tag tag = derive_tag(helper.salt, recovered);
  if (CRYPTO_memcmp(tag.data(), helper.tag.data(), tag.size()) != 0) return std::nullopt;
  return Reproduction{derive_key(helper.salt, recovered), decoded->errors_corrected};
}

void HelperData::serialize(ByteWriter& out) const {
  out.u16(code.n).u16(code.k).u16(code.t);
  out.raw(offset.to_bytes());
  out.raw(salt);
  out.raw(tag);
}

HelperData HelperData::deserialize(ByteReader& in) {
  HelperData h;
  h.code.n = in.u16();
  h.code.k = in.u16();
  h.code.t = in.u16();
  if (h.code.n == 0) throw DecodeError("helper data with zero code length");
  try {
    h.offset = BitString::from_bytes(in.raw((h.code.n + 7u) / 8u), h.code.n);
  } catch (const std::invalid_argument& e) {
    throw DecodeError(std::string("helper offset: ") + e.what());
  }
  h.salt = in.array<16>();
  h.tag = in.array<8>();
  return h;
}

std::vector<std::uint8_t> HelperData::to_bytes() const {
  ByteWriter w;
  serialize(w);
  return w.take();
}

}  // namespace headcount::fuzzy
