#include "headcount/gf2m.hpp"

#include <bit>
#include <stdexcept>

namespace headcount::gf2m {

bool is_primitive(std::uint32_t poly, int degree) {
  if (degree < 2 || degree > 16) return false;
  if (((poly >> degree) & 1u) == 0 || (poly >> (degree + 1)) != 0) return false;
  if ((poly & 1u) == 0) return false;
  // Walk the powers of x; primitive iff x first returns to 1 after 2^m - 1 steps.
  const std::uint32_t order = (1u << degree) - 1;
  std::uint32_t x = 1;
  for (std::uint32_t i = 1; i <= order; ++i) {
    x <<= 1;
    if (x >> degree) x ^= poly;
    if (x == 1) return i == order;
  }
  return false;
}

std::uint32_t smallest_primitive_polynomial(int degree) {
  if (degree < 2 || degree > 16) throw std::invalid_argument("unsupported field degree");
  for (std::uint32_t p = (1u << degree) | 1u; p < (2u << degree); p += 2) {
    if (is_primitive(p, degree)) return p;
  }
  throw std::logic_error("no primitive polynomial found");
}

Field::Field(int degree)
    : degree_(degree),
      order_((1 << degree) - 1),
      poly_(smallest_primitive_polynomial(degree)),
      exp_(2 * static_cast<std::size_t>(order_)),
      log_(static_cast<std::size_t>(order_) + 1, -1) {
  std::uint32_t x = 1;
  for (int i = 0; i < order_; ++i) {
    exp_[i] = static_cast<std::uint16_t>(x);
    exp_[i + order_] = static_cast<std::uint16_t>(x);
    log_[x] = i;
    x <<= 1;
    if (x >> degree) x ^= poly_;
  }
}

std::uint16_t Field::inv(std::uint16_t a) const {
  if (a == 0) throw std::domain_error("inverse of zero in GF(2^m)");
  return exp_[mod(order_ - log_[a])];
}

std::uint16_t Field::div(std::uint16_t a, std::uint16_t b) const {
  if (b == 0) throw std::domain_error("division by zero in GF(2^m)");
  if (a == 0) return 0;
  return exp_[mod(log_[a] - log_[b])];
}

std::uint16_t Field::pow(std::uint16_t a, long long e) const {
  if (a == 0) return e == 0 ? 1 : 0;
  return exp_[mod(static_cast<long long>(log_[a]) * e)];
}

std::vector<int> cyclotomic_coset(int i, int order) {
  std::vector<int> coset;
  int j = i % order;
  do {
    coset.push_back(j);
    j = (2 * j) % order;
  } while (j != i % order);
  return coset;
}

std::vector<std::uint8_t> minimal_polynomial(const Field& field, int i) {
  // prod over the coset of (x + alpha^j), computed in GF(2^m)[x].
  std::vector<std::uint16_t> poly{1};
  for (int j : cyclotomic_coset(field.mod(i), field.order())) {
    const std::uint16_t root = field.exp(j);
    std::vector<std::uint16_t> next(poly.size() + 1, 0);
    for (std::size_t d = 0; d < poly.size(); ++d) {
      next[d + 1] ^= poly[d];
      next[d] ^= field.mul(poly[d], root);
    }
    poly = std::move(next);
  }
  std::vector<std::uint8_t> out(poly.size());
  for (std::size_t d = 0; d < poly.size(); ++d) {
    if (poly[d] > 1) throw std::logic_error("minimal polynomial has a non-binary coefficient");
    out[d] = static_cast<std::uint8_t>(poly[d]);
  }
  return out;
}

std::vector<std::uint8_t> gf2_mul(const std::vector<std::uint8_t>& a,
                                  const std::vector<std::uint8_t>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<std::uint8_t> out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i]) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] ^= b[j];
  }
  return out;
}

std::vector<std::uint8_t> gf2_mod(std::vector<std::uint8_t> a, const std::vector<std::uint8_t>& b) {
  if (b.empty() || b.back() != 1) throw std::invalid_argument("divisor must be monic");
  const std::size_t db = b.size() - 1;
  for (std::size_t i = a.size(); i-- > db;) {
    if (!a[i]) continue;
    for (std::size_t j = 0; j <= db; ++j) a[i - db + j] ^= b[j];
  }
  while (!a.empty() && a.back() == 0) a.pop_back();
  return a;
}

}  // namespace headcount::gf2m
