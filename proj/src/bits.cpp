#include "headcount/bits.hpp"

#include <openssl/crypto.h>

#include <bit>
#include <charconv>
#include <stdexcept>

namespace headcount {

BitString::BitString(std::size_t length)
    : length_(length), words_((length + 63) / 64, 0) {}

void BitString::wipe() { OPENSSL_cleanse(words_.data(), words_.size() * sizeof(std::uint64_t)); }

BitString BitString::from_string(std::string_view bits) {
  BitString out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      out.set(i);
    } else if (bits[i] != '0') {
      throw std::invalid_argument("bit literal contains a character other than 0/1");
    }
  }
  return out;
}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes,
                                std::size_t length) {
  if (bytes.size() != (length + 7) / 8) {
    throw std::invalid_argument("packed bit string has wrong byte count");
  }
  BitString out(length);
  for (std::size_t i = 0; i < bytes.size() * 8; ++i) {
    const bool bit = (bytes[i / 8] >> (7 - i % 8)) & 1u;
    if (i >= length) {
      if (bit) throw std::invalid_argument("packed bit string has nonzero padding");
      continue;
    }
    if (bit) out.set(i);
  }
  return out;
}

BitString BitString::from_hex(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    throw std::invalid_argument("hex bit string lacks '/<length>' suffix");
  }
  std::size_t length = 0;
  const auto len_text = text.substr(slash + 1);
  auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), length);
  if (ec != std::errc{} || ptr != len_text.data() + len_text.size()) {
    throw std::invalid_argument("hex bit string has a malformed length");
  }
  const auto hex = text.substr(0, slash);
  if (hex.size() != 2 * ((length + 7) / 8)) {
    throw std::invalid_argument("hex bit string digit count does not match its length");
  }
  std::vector<std::uint8_t> bytes(hex.size() / 2);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto [p, e] = std::from_chars(hex.data() + 2 * i, hex.data() + 2 * i + 2, bytes[i], 16);
    if (e != std::errc{} || p != hex.data() + 2 * i + 2) {
      throw std::invalid_argument("hex bit string contains a non-hex digit");
    }
  }
  return from_bytes(bytes, length);
}

void BitString::set(std::size_t i, bool value) {
  const std::uint64_t mask = std::uint64_t{1} << (i & 63);
  if (value) {
    words_[i >> 6] |= mask;
  } else {
    words_[i >> 6] &= ~mask;
  }
}

std::size_t BitString::popcount() const {
  std::size_t total = 0;
  for (auto w : words_) total += std::popcount(w);
  return total;
}

BitString& BitString::operator^=(const BitString& other) {
  if (other.length_ != length_) {
    throw std::invalid_argument("xor of bit strings with different lengths");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  return *this;
}

BitString BitString::operator~() const {
  BitString out = *this;
  for (auto& w : out.words_) w = ~w;
  out.clear_padding();
  return out;
}

void BitString::clear_padding() {
  if (length_ % 64 != 0) {
    words_.back() &= (std::uint64_t{1} << (length_ % 64)) - 1;
  }
}

std::vector<std::uint8_t> BitString::to_bytes() const {
  std::vector<std::uint8_t> out((length_ + 7) / 8, 0);
  for (std::size_t i = 0; i < length_; ++i) {
    if (test(i)) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

std::string BitString::to_string() const {
  std::string out(length_, '0');
  for (std::size_t i = 0; i < length_; ++i) {
    if (test(i)) out[i] = '1';
  }
  return out;
}

std::string BitString::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (auto b : to_bytes()) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 15]);
  }
  out += "/" + std::to_string(length_);
  return out;
}

std::size_t hamming(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("hamming distance of bit strings with different lengths");
  }
  std::size_t total = 0;
  const auto wa = a.words();
  const auto wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) total += std::popcount(wa[i] ^ wb[i]);
  return total;
}

}  // namespace headcount
