#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace headcount {

// Fixed-length binary string. Bit 0 is the leftmost bit; packed byte forms
// put bit 0 in the most significant position of byte 0.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t length);

  // Parses a literal such as "0110".
  static BitString from_string(std::string_view bits);
  // Inverse of to_bytes(); padding bits must be zero.
  static BitString from_bytes(std::span<const std::uint8_t> bytes,
                              std::size_t length);
  // Parses the "<hex>/<length>" text form.
  static BitString from_hex(std::string_view text);

  std::size_t size() const { return length_; }
  bool empty() const { return length_ == 0; }

  bool test(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  bool operator[](std::size_t i) const { return test(i); }
  void set(std::size_t i, bool value = true);
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  std::size_t popcount() const;

  BitString& operator^=(const BitString& other);
  friend BitString operator^(BitString a, const BitString& b) {
    a ^= b;
    return a;
  }
  BitString operator~() const;

  bool operator==(const BitString& other) const = default;

  // ceil(size/8) bytes, big-endian bit packing, zero padding.
  std::vector<std::uint8_t> to_bytes() const;
  std::string to_string() const;
  std::string to_hex() const;

  std::span<const std::uint64_t> words() const { return words_; }

  // Zeroes the bits in place; the length is kept.
  void wipe();

 private:
  void clear_padding();

  std::size_t length_ = 0;
  std::vector<std::uint64_t> words_;
};

std::size_t hamming(const BitString& a, const BitString& b);

}  // namespace headcount
