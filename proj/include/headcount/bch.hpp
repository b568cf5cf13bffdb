#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "headcount/bits.hpp"
#include "headcount/gf2m.hpp"
#include "headcount/random.hpp"

namespace headcount::bch {

// (n, k, t) as it appears in all serialized metadata.
struct CodeParams {
  std::uint16_t n = 0;
  std::uint16_t k = 0;
  std::uint16_t t = 0;

  bool operator==(const CodeParams&) const = default;
};

struct DecodeResult {
  BitString codeword;
  std::size_t errors_corrected = 0;
};

// Narrow-sense primitive binary BCH code of length n = 2^m - 1.
//
// Bit j of a word is the coefficient of x^(n-1-j), so a systematic codeword
// reads as the k message bits followed by the n-k parity bits. The advertised
// t is the largest designed capability that still yields this generator,
// which is how the code appears in standard parameter tables.
class BchCode {
 public:
  // Cached construction by (n, k, t); throws if no such code exists.
  static BchCode lookup(const CodeParams& params);
  // Code whose generator covers alpha^1..alpha^(2*designed_t).
  static BchCode with_designed_t(int field_degree, int designed_t);

  const CodeParams& params() const { return impl_->params; }
  int n() const { return impl_->params.n; }
  int k() const { return impl_->params.k; }
  int t() const { return impl_->params.t; }
  int field_degree() const { return impl_->field.degree(); }
  const gf2m::Field& field() const { return impl_->field; }
  // Coefficients of g(x), index = degree, degree n - k.
  const std::vector<std::uint8_t>& generator() const { return impl_->generator; }

  BitString encode(const BitString& message) const;

  // Bounded-distance decoding (syndromes, Berlekamp-Massey, Chien search).
  // Returns nullopt when the error locator is inconsistent; never returns a
  // word that is not a codeword.
  std::optional<DecodeResult> decode(const BitString& word) const;

  BitString random_codeword(Rng& rng) const;
  BitString random_codeword(std::uint64_t seed) const;

  // Odd-indexed syndromes S_1, S_3, ..., S_(2t-1); the even ones follow by
  // squaring.
  std::vector<std::uint16_t> syndromes(const BitString& word) const;

 private:
  struct Impl {
    CodeParams params;
    gf2m::Field field;
    std::vector<std::uint8_t> generator;
  };
  explicit BchCode(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<const Impl> impl_;
};

// Every distinct narrow-sense BCH code of length 2^m - 1, by increasing t.
std::vector<CodeParams> code_table(int field_degree);

// n = n_bits - 1, tau = floor(r * n), smallest tabulated t >= tau.
BchCode select_code(int n_bits, double error_ratio);

// tau = floor(r * n) as used by select_code.
int requested_tolerance(int n_bits, double error_ratio);

}  // namespace headcount::bch
