#include "headcount/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "headcount/random.hpp"
#include "headcount/simhash.hpp"

namespace headcount::ingest {
namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size() && !text.empty();
}

Eigen::VectorXd random_unit(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  do {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
  } while (v.norm() == 0.0);
  return v.normalized();
}

}  // namespace

void SyntheticConfig::validate() const {
  if (n_identities < 1) throw std::invalid_argument("synthetic config needs >= 1 identity");
  if (frames_per_identity < 1) throw std::invalid_argument("synthetic config needs >= 1 frame");
  if (dim < 2) throw std::invalid_argument("synthetic config needs dimension >= 2");
  if (!(sigma >= 0.0)) throw std::invalid_argument("synthetic sigma must be non-negative");
}

Dataset parse_embeddings(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  const auto header = split_csv(trim(line));
  if (header.size() < 4 || trim(header[0]) != "id" || trim(header[1]) != "frame") {
    throw ParseError(1, "header must be id,frame,v0,...,v{d-1} with d >= 2");
  }
  const std::size_t dim = header.size() - 2;

  Dataset out;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty()) continue;
    const auto fields = split_csv(row);
    if (fields.size() != dim + 2) {
      throw ParseError(line_no, "expected " + std::to_string(dim + 2) + " columns, found " +
                                    std::to_string(fields.size()));
    }
    Embedding e;
    e.identity_id = std::string(trim(fields[0]));
    if (e.identity_id.empty()) throw ParseError(line_no, "empty identity id");
    if (!parse_number(fields[1], e.frame_index)) {
      throw ParseError(line_no, "frame index is not an integer");
    }
    e.vector.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
      double x = 0.0;
      if (!parse_number(fields[j + 2], x) || !std::isfinite(x)) {
        throw ParseError(line_no, "value v" + std::to_string(j) + " is not a finite number");
      }
      e.vector(static_cast<Eigen::Index>(j)) = x;
    }
    const double norm = e.vector.norm();
    if (norm == 0.0) {
      throw ParseError(line_no, "zero vector for identity " + e.identity_id + " frame " +
                                    std::to_string(e.frame_index));
    }
    e.vector /= norm;
    out.push_back(std::move(e));
  }
  return out;
}

Dataset load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embeddings file " + path.string());
  return parse_embeddings(in);
}

void write_embeddings(std::ostream& out, const Dataset& data) {
  const std::size_t dim = data.empty() ? 2 : static_cast<std::size_t>(data.front().vector.size());
  out << "id,frame";
  for (std::size_t j = 0; j < dim; ++j) out << ",v" << j;
  out << '\n' << std::setprecision(17);
  for (const auto& e : data) {
    out << e.identity_id << ',' << e.frame_index;
    for (Eigen::Index j = 0; j < e.vector.size(); ++j) out << ',' << e.vector(j);
    out << '\n';
  }
}

Dataset gen_synthetic(const SyntheticConfig& config) {
  config.validate();
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset out;
  out.reserve(config.n_identities * config.frames_per_identity);
  const int width = static_cast<int>(std::to_string(config.n_identities).size());
  for (std::size_t id = 0; id < config.n_identities; ++id) {
    Rng rng = make_rng(config.seed, id);
    const Eigen::VectorXd mean = random_unit(config.dim, rng);
    std::ostringstream name;
    name << "id" << std::setw(width) << std::setfill('0') << id;
    for (std::size_t f = 0; f < config.frames_per_identity; ++f) {
      Eigen::VectorXd v = mean;
      if (config.sigma > 0.0) {
        for (Eigen::Index j = 0; j < v.size(); ++j) v(j) += config.sigma * normal(rng);
      }
      if (v.norm() == 0.0) v = mean;
      out.push_back({name.str(), static_cast<int>(f), v.normalized()});
    }
  }
  return out;
}

std::vector<Track> group_by_identity(const Dataset& data) {
  std::vector<Track> tracks;
  std::map<std::string, std::size_t> index;
  for (const auto& e : data) {
    auto [it, inserted] = index.try_emplace(e.identity_id, tracks.size());
    if (inserted) tracks.push_back({e.identity_id, {}});
    tracks[it->second].frames.push_back(e);
  }
  return tracks;
}

SiteSplit split_sites(const Dataset& data, std::size_t per_site, std::uint64_t seed) {
  if (per_site < 1) throw std::invalid_argument("per_site must be >= 1");
  SiteSplit split;
  split.per_site = per_site;
  const auto tracks = group_by_identity(data);
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const auto& t = tracks[i];
    if (t.frames.size() < 2 * per_site) {
      throw std::invalid_argument("identity " + t.identity_id + " has " +
                                  std::to_string(t.frames.size()) + " frames, needs " +
                                  std::to_string(2 * per_site));
    }
    std::vector<std::size_t> order(t.frames.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, i);
    std::shuffle(order.begin(), order.end(), rng);
    Track a{t.identity_id, {}};
    Track b{t.identity_id, {}};
    for (std::size_t j = 0; j < per_site; ++j) {
      a.frames.push_back(t.frames[order[j]]);
      b.frames.push_back(t.frames[order[per_site + j]]);
    }
    split.site_a.push_back(std::move(a));
    split.site_b.push_back(std::move(b));
  }
  return split;
}

double measure_flip_ratio(double sigma, std::size_t dim, std::size_t n_planes,
                          std::uint64_t seed, std::size_t pairs,
                          std::size_t frames_per_code) {
  if (pairs == 0 || frames_per_code == 0) {
    throw std::invalid_argument("flip-ratio measurement needs pairs and frames");
  }
  constexpr std::size_t kPlaneSets = 16;
  std::normal_distribution<double> normal(0.0, 1.0);
  double total = 0.0;
  std::vector<BitString> side_a(frames_per_code);
  std::vector<BitString> side_b(frames_per_code);
  std::size_t done = 0;
  for (std::size_t g = 0; g < kPlaneSets && done < pairs; ++g) {
    const auto planes = simhash::make_hyperplanes(n_planes, dim, mix_seed(seed, g));
    const std::size_t quota = (pairs - done + (kPlaneSets - g) - 1) / (kPlaneSets - g);
    for (std::size_t p = 0; p < quota; ++p, ++done) {
      Rng rng = make_rng(seed, 1000 + done);
      const Eigen::VectorXd mean = random_unit(dim, rng);
      for (std::size_t f = 0; f < 2 * frames_per_code; ++f) {
        Eigen::VectorXd v = mean;
        for (Eigen::Index j = 0; j < v.size(); ++j) v(j) += sigma * normal(rng);
        auto code = simhash::simhash(v, planes);
        (f < frames_per_code ? side_a[f] : side_b[f - frames_per_code]) = std::move(code);
      }
      const auto a = simhash::consensus(side_a);
      const auto b = simhash::consensus(side_b);
      total += static_cast<double>(hamming(a, b)) / static_cast<double>(n_planes);
    }
  }
  return total / static_cast<double>(pairs);
}

double calibrate_noise(double target_flip_ratio, std::size_t dim, std::size_t n_planes,
                       std::uint64_t seed, std::size_t frames_per_code, std::size_t pairs) {
  if (!(target_flip_ratio >= 0.0 && target_flip_ratio < 0.5)) {
    throw std::invalid_argument("target flip ratio must lie in [0, 0.5)");
  }
  if (target_flip_ratio == 0.0) return 0.0;
  constexpr double kTolerance = 0.01;
  auto measure = [&](double s) {
    return measure_flip_ratio(s, dim, n_planes, seed, pairs, frames_per_code);
  };
  double lo = 0.0;
  double hi = 2.0;
  const double at_hi = measure(hi);
  if (at_hi < target_flip_ratio - kTolerance) {
    std::ostringstream msg;
    msg << "flip ratio " << target_flip_ratio << " unreachable for sigma in [0, 2]; achieved ["
        << measure(lo) << ", " << at_hi << "]";
    throw std::runtime_error(msg.str());
  }
  double best = hi;
  double best_err = std::abs(at_hi - target_flip_ratio);
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double r = measure(mid);
    const double err = std::abs(r - target_flip_ratio);
    if (err < best_err) {
      best = mid;
      best_err = err;
    }
    if (err <= kTolerance / 2) return mid;
    (r < target_flip_ratio ? lo : hi) = mid;
  }
  if (best_err > kTolerance) {
    throw std::runtime_error("bisection did not reach the target flip ratio");
  }
  return best;
}

}  // namespace headcount::ingest
