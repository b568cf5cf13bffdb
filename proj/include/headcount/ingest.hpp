#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace headcount::ingest {

template <typename Scalar = double>
struct BasicEmbedding {
  std::string identity_id;  // ground truth; evaluation only
  int frame_index = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vector;  // unit L2 norm
};

using Embedding = BasicEmbedding<double>;
using Dataset = std::vector<Embedding>;

// All frames of one person at one site, in observation order.
struct Track {
  std::string identity_id;
  std::vector<Embedding> frames;
};

struct SiteSplit {
  std::vector<Track> site_a;
  std::vector<Track> site_b;
  std::size_t per_site = 0;
};

struct SyntheticConfig {
  std::size_t n_identities = 130;
  std::size_t frames_per_identity = 9;
  std::size_t dim = 128;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Reads the `id,frame,v0,...,v{d-1}` CSV format. Vectors are renormalized.
Dataset load_embeddings(const std::filesystem::path& path);
Dataset parse_embeddings(std::istream& in);
void write_embeddings(std::ostream& out, const Dataset& data);

Dataset gen_synthetic(const SyntheticConfig& config);

// Groups a dataset by identity, preserving first-appearance order.
std::vector<Track> group_by_identity(const Dataset& data);

SiteSplit split_sites(const Dataset& data, std::size_t per_site, std::uint64_t seed);

// Mean Hamming ratio between SimHash codes of two disjoint frame groups of
// the same identity. Each side's code is the consensus of `frames_per_code`
// frames; with frames_per_code = 1 this is the plain per-frame flip ratio.
double measure_flip_ratio(double sigma, std::size_t dim, std::size_t n_planes,
                          std::uint64_t seed, std::size_t pairs,
                          std::size_t frames_per_code = 1);

// Bisection on sigma in [0, 2] until measure_flip_ratio is within 0.01 of
// the target.
double calibrate_noise(double target_flip_ratio, std::size_t dim, std::size_t n_planes,
                       std::uint64_t seed, std::size_t frames_per_code = 1,
                       std::size_t pairs = 400);

}  // namespace headcount::ingest
