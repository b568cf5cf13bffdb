#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

#include "headcount/bits.hpp"
#include "headcount/random.hpp"

namespace headcount::simhash {

// n random hyperplanes through the origin of R^d, one per row, entries i.i.d.
// standard normal. Regenerating from (n, d, seed) yields identical planes,
// which is how two cameras agree on a projection without exchanging it.
template <typename Scalar = double>
class ProjectionSet {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  static ProjectionSet make(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("projection set needs at least one plane");
    if (d < 2) throw std::invalid_argument("projection set needs dimension >= 2");
    ProjectionSet out;
    out.seed_ = seed;
    out.planes_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < out.planes_.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.planes_.cols(); ++j) {
        out.planes_(i, j) = static_cast<Scalar>(normal(rng));
      }
    }
    return out;
  }

  const Matrix& planes() const { return planes_; }
  std::size_t bits() const { return static_cast<std::size_t>(planes_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(planes_.cols()); }
  std::uint64_t seed() const { return seed_; }

  bool operator==(const ProjectionSet& other) const {
    return seed_ == other.seed_ && planes_ == other.planes_;
  }

 private:
  Matrix planes_;
  std::uint64_t seed_ = 0;
};

template <typename Scalar = double>
ProjectionSet<Scalar> make_hyperplanes(std::size_t n, std::size_t d, std::uint64_t seed) {
  return ProjectionSet<Scalar>::make(n, d, seed);
}

// Bit i is 1 iff <v, plane_i> >= 0.
template <typename Derived, typename Scalar>
BitString simhash(const Eigen::MatrixBase<Derived>& v, const ProjectionSet<Scalar>& planes) {
  static_assert(Derived::ColsAtCompileTime == 1, "simhash expects a column vector");
  if (static_cast<std::size_t>(v.size()) != planes.dim()) {
    throw std::invalid_argument("embedding dimension does not match the projection set");
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> projected =
      planes.planes() * v.template cast<Scalar>();
  BitString out(planes.bits());
  for (Eigen::Index i = 0; i < projected.size(); ++i) {
    if (projected(i) >= Scalar(0)) out.set(static_cast<std::size_t>(i));
  }
  return out;
}

// Per-bit majority vote; exact ties resolve to 0.
BitString consensus(std::span<const BitString> hashes);

}  // namespace headcount::simhash
