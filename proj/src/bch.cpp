#include "headcount/bch.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

namespace headcount::bch {
namespace {

struct Construction {
  std::vector<std::uint8_t> generator;
  int table_t = 0;
};

Construction construct(const gf2m::Field& field, int designed_t) {
  const int n = field.order();
  const int max_t = (n - 1) / 2;
  if (designed_t < 1 || designed_t > max_t) {
    throw std::invalid_argument("designed t out of range for n = " + std::to_string(n));
  }
  std::vector<bool> covered(static_cast<std::size_t>(n), false);
  Construction out;
  out.generator = {1};
  for (int i = 1; i <= 2 * designed_t; ++i) {
    if (covered[i % n]) continue;
    for (int j : gf2m::cyclotomic_coset(i, n)) covered[j] = true;
    out.generator = gf2m::gf2_mul(out.generator, gf2m::minimal_polynomial(field, i));
  }
  int t = designed_t;
  while (t + 1 <= max_t && covered[(2 * t + 1) % n] && covered[(2 * t + 2) % n]) ++t;
  out.table_t = t;

  // g(x) must divide x^n + 1.
  std::vector<std::uint8_t> xn1(static_cast<std::size_t>(n) + 1, 0);
  xn1[0] = 1;
  xn1[static_cast<std::size_t>(n)] = 1;
  if (!gf2m::gf2_mod(xn1, out.generator).empty()) {
    throw std::logic_error("BCH generator does not divide x^n + 1");
  }
  return out;
}

int degree_for_length(int n) {
  const unsigned v = static_cast<unsigned>(n) + 1;
  if (n < 3 || !std::has_single_bit(v)) {
    throw std::invalid_argument("BCH length must be 2^m - 1, got " + std::to_string(n));
  }
  return std::countr_zero(v);
}

}  // namespace

BchCode BchCode::with_designed_t(int field_degree, int designed_t) {
  gf2m::Field field(field_degree);
  auto c = construct(field, designed_t);
  const int n = field.order();
  CodeParams params{static_cast<std::uint16_t>(n),
                    static_cast<std::uint16_t>(n - static_cast<int>(c.generator.size() - 1)),
                    static_cast<std::uint16_t>(c.table_t)};
  return BchCode(std::make_shared<const Impl>(Impl{params, std::move(field), std::move(c.generator)}));
}

BchCode BchCode::lookup(const CodeParams& params) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, BchCode> cache;
  const auto key = std::make_tuple(params.n, params.k, params.t);
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const int m = degree_for_length(params.n);
  if (params.t < 1) throw std::invalid_argument("BCH code needs t >= 1");
  auto code = with_designed_t(m, params.t);
  if (!(code.params() == params)) {
    throw std::invalid_argument("no binary BCH code (" + std::to_string(params.n) + "," +
                                std::to_string(params.k) + "," + std::to_string(params.t) + ")");
  }
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, code).first->second;
}

std::vector<CodeParams> code_table(int field_degree) {
  gf2m::Field field(field_degree);
  const int n = field.order();
  std::vector<CodeParams> out;
  for (int t = 1; t <= (n - 1) / 2;) {
    auto c = construct(field, t);
    out.push_back({static_cast<std::uint16_t>(n),
                   static_cast<std::uint16_t>(n - static_cast<int>(c.generator.size() - 1)),
                   static_cast<std::uint16_t>(c.table_t)});
    t = c.table_t + 1;
  }
  return out;
}

int requested_tolerance(int n_bits, double error_ratio) {
  return static_cast<int>(std::floor(error_ratio * (n_bits - 1) + 1e-9));
}

BchCode select_code(int n_bits, double error_ratio) {
  if (n_bits != 64 && n_bits != 128 && n_bits != 256) {
    throw std::invalid_argument("n_bits must be one of 64, 128, 256");
  }
  if (!(error_ratio > 0.0 && error_ratio < 0.5)) {
    throw std::invalid_argument("error ratio must lie in (0, 0.5)");
  }
  const int n = n_bits - 1;
  const int tau = requested_tolerance(n_bits, error_ratio);
  const auto table = code_table(degree_for_length(n));
  for (const auto& p : table) {
    if (p.t >= tau) return BchCode::lookup(p);
  }
  throw std::invalid_argument("no BCH code of length " + std::to_string(n) + " corrects " +
                              std::to_string(tau) + " errors; maximum t is " +
                              std::to_string(table.back().t));
}

BitString BchCode::encode(const BitString& message) const {
  const int n = this->n();
  const int k = this->k();
  if (static_cast<int>(message.size()) != k) {
    throw std::invalid_argument("BCH message must have length k = " + std::to_string(k));
  }
  const int r = n - k;
  const auto& g = generator();
  // LFSR division of x^(n-k) m(x) by g(x); reg[i] holds the coefficient of x^i.
  std::vector<std::uint8_t> reg(static_cast<std::size_t>(r), 0);
  for (int j = 0; j < k; ++j) {
    const std::uint8_t feedback = static_cast<std::uint8_t>(message.test(j) ^ reg[r - 1]);
    for (int i = r - 1; i > 0; --i) reg[i] = reg[i - 1] ^ (feedback & g[i]);
    reg[0] = feedback & g[0];
  }
  BitString out(static_cast<std::size_t>(n));
  for (int j = 0; j < k; ++j) {
    if (message.test(j)) out.set(j);
  }
  for (int i = 0; i < r; ++i) {
    if (reg[i]) out.set(static_cast<std::size_t>(n - 1 - i));
  }
  return out;
}

std::vector<std::uint16_t> BchCode::syndromes(const BitString& word) const {
  const int n = this->n();
  const int t = this->t();
  const auto& f = field();
  std::vector<std::uint16_t> s(static_cast<std::size_t>(t), 0);
  const auto words = word.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t bits = words[w];
    while (bits) {
      const int j = static_cast<int>(w * 64) + std::countr_zero(bits);
      bits &= bits - 1;
      const int e = n - 1 - j;
      int step = 2 * e;
      if (step >= n) step -= n;
      int idx = e;
      for (int h = 0; h < t; ++h) {
        s[h] ^= f.exp_raw(idx);
        idx += step;
        if (idx >= n) idx -= n;
      }
    }
  }
  return s;
}

std::optional<DecodeResult> BchCode::decode(const BitString& word) const {
  const int n = this->n();
  const int t = this->t();
  if (static_cast<int>(word.size()) != n) {
    throw std::invalid_argument("BCH word must have length n = " + std::to_string(n));
  }
  const auto& f = field();
  const auto odd = syndromes(word);
  bool clean = true;
  for (auto v : odd) clean = clean && v == 0;
  if (clean) return DecodeResult{word, 0};

  // S[1..2t]; even syndromes of a binary word are squares.
  std::vector<std::uint16_t> s(static_cast<std::size_t>(2 * t + 1), 0);
  for (int i = 1; i <= 2 * t; ++i) {
    s[i] = (i & 1) ? odd[(i - 1) / 2] : f.mul(s[i / 2], s[i / 2]);
  }

  // Berlekamp-Massey for the error locator Lambda(x) = prod (1 + X_l x).
  std::vector<std::uint16_t> lambda(static_cast<std::size_t>(2 * t + 2), 0);
  std::vector<std::uint16_t> prev(lambda.size(), 0);
  std::vector<std::uint16_t> tmp(lambda.size(), 0);
  lambda[0] = 1;
  prev[0] = 1;
  int L = 0;
  int shift = 1;
  std::uint16_t prev_disc = 1;
  for (int r = 0; r < 2 * t; ++r) {
    std::uint16_t d = s[r + 1];
    for (int i = 1; i <= L; ++i) d ^= f.mul(lambda[i], s[r + 1 - i]);
    if (d == 0) {
      ++shift;
      continue;
    }
    const std::uint16_t coef = f.div(d, prev_disc);
    if (2 * L <= r) {
      tmp = lambda;
      for (std::size_t i = 0; i + shift < lambda.size(); ++i) {
        lambda[i + shift] ^= f.mul(coef, prev[i]);
      }
      L = r + 1 - L;
      prev = tmp;
      prev_disc = d;
      shift = 1;
    } else {
      for (std::size_t i = 0; i + shift < lambda.size(); ++i) {
        lambda[i + shift] ^= f.mul(coef, prev[i]);
      }
      ++shift;
    }
  }
  if (L > t) return std::nullopt;
  for (std::size_t i = static_cast<std::size_t>(L) + 1; i < lambda.size(); ++i) {
    if (lambda[i] != 0) return std::nullopt;
  }
  if (lambda[L] == 0) return std::nullopt;

  // Chien search: Lambda(alpha^-e) == 0 marks an error at degree e.
  std::vector<int> terms;  // current log of lambda_i * alpha^(-e*i)
  std::vector<int> degrees;
  for (int i = 1; i <= L; ++i) {
    if (lambda[i] != 0) {
      terms.push_back(f.log(lambda[i]));
      degrees.push_back(i);
    }
  }
  BitString corrected = word;
  int found = 0;
  for (int e = 0; e < n && found < L; ++e) {
    std::uint16_t acc = 1;
    for (std::size_t q = 0; q < terms.size(); ++q) {
      acc ^= f.exp_raw(terms[q]);
      terms[q] -= degrees[q];
      if (terms[q] < 0) terms[q] += n;
    }
    if (acc == 0) {
      corrected.flip(static_cast<std::size_t>(n - 1 - e));
      ++found;
    }
  }
  if (found != L) return std::nullopt;
  for (auto v : syndromes(corrected)) {
    if (v != 0) return std::nullopt;
  }
  return DecodeResult{std::move(corrected), static_cast<std::size_t>(L)};
}

BitString BchCode::random_codeword(Rng& rng) const {
  BitString message(static_cast<std::size_t>(k()));
  std::uint64_t pool = 0;
  for (int j = 0; j < k(); ++j) {
    if (j % 64 == 0) pool = rng();
    if ((pool >> (j % 64)) & 1u) message.set(j);
  }
  return encode(message);
}

BitString BchCode::random_codeword(std::uint64_t seed) const {
  Rng rng = make_rng(seed);
  return random_codeword(rng);
}

}  // namespace headcount::bch
