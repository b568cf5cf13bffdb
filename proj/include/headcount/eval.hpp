#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "headcount/bch.hpp"
#include "headcount/ingest.hpp"

namespace headcount::eval {

struct TrialCounts {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
};

struct Metrics {
  double precision = 1.0;  // 1.0 when nothing was predicted
  double recall = 0.0;
  double f1 = 0.0;
};

Metrics metrics(double tp, double fn, double fp);

// One seeded repetition: split frames into sites, hash, enroll every
// identity at A, reproduce at B against the same identity (TP/FN) and
// against every other identity's helper (FP, per verified success).
TrialCounts run_trial(const ingest::Dataset& data, int n_bits, double error_ratio, std::uint64_t seed,
                      std::size_t per_site = 4);

struct GridConfig {
  std::vector<int> n_bits_list{64, 128, 256};
  std::vector<double> error_ratios{0.10, 0.15, 0.20, 0.25};
  std::size_t n_seeds = 100;
  std::size_t per_site = 4;
  std::uint64_t master_seed = 0;
  // Synthetic data unless an embeddings file is given.
  std::optional<std::filesystem::path> embeddings;
  ingest::SyntheticConfig synthetic;
  // Target Hamming ratio between the two sites' consensus hashes of one identity.
  double flip_ratio = 0.10;
  std::size_t threads = 0;  // 0 uses the hardware concurrency

  void validate() const;
};

struct GridRow {
  int n_bits = 0;
  double error_ratio = 0;
  bch::CodeParams code;
  double tp_mean = 0, fn_mean = 0, fp_mean = 0;
  Metrics m;
  std::size_t identities = 0;
  bool accounting_ok = true;  // TP + FN == identities in every trial
};

struct GridResult {
  std::vector<GridRow> rows;  // sorted by (n_bits, r)
  double sigma = 0;           // synthetic noise level used
  double measured_flip_ratio = 0;
};

// Loads the configured embeddings or generates a calibrated synthetic set.
ingest::Dataset grid_dataset(const GridConfig& cfg, double* sigma_out = nullptr);

GridResult run_grid(const GridConfig& cfg, const ingest::Dataset& data);
GridResult run_grid(const GridConfig& cfg);

void write_csv(std::ostream& out, const std::vector<GridRow>& rows);

}  // namespace headcount::eval
