#include "headcount/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "headcount/fuzzy.hpp"
#include "headcount/simhash.hpp"

namespace headcount::eval {
namespace {

std::vector<BitString> site_hashes(const std::vector<ingest::Track>& tracks,
                                   const simhash::ProjectionSet<double>& planes) {
  std::vector<BitString> out;
  out.reserve(tracks.size());
  std::vector<BitString> frames;
  for (const auto& track : tracks) {
    frames.clear();
    for (const auto& e : track.frames) frames.push_back(simhash::simhash(e.vector, planes));
    out.push_back(simhash::consensus(frames));
  }
  return out;
}

}  // namespace

Metrics metrics(double tp, double fn, double fp) {
  Metrics m;
  m.precision = tp + fp > 0 ? tp / (tp + fp) : 1.0;
  m.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

TrialCounts run_trial(const ingest::Dataset& data, int n_bits, double error_ratio, std::uint64_t seed,
                      std::size_t per_site) {
  const auto code = bch::select_code(n_bits, error_ratio);
  const auto split = ingest::split_sites(data, per_site, mix_seed(seed, 1));
  if (split.site_a.empty()) throw std::invalid_argument("dataset has no identities");
  const std::size_t dim = static_cast<std::size_t>(split.site_a.front().frames.front().vector.size());
  const auto planes = simhash::make_hyperplanes<double>(static_cast<std::size_t>(code.n()), dim, mix_seed(seed, 2));
  const auto hashes_a = site_hashes(split.site_a, planes);
  const auto hashes_b = site_hashes(split.site_b, planes);

  Rng rng = make_rng(seed, 3);
  std::vector<fuzzy::Enrollment> enrolled;
  enrolled.reserve(hashes_a.size());
  for (const auto& w : hashes_a) enrolled.push_back(fuzzy::gen(w, code, rng));

  TrialCounts counts;
  for (std::size_t i = 0; i < hashes_b.size(); ++i) {
    for (std::size_t j = 0; j < enrolled.size(); ++j) {
      const auto r = fuzzy::rep(hashes_b[i], enrolled[j].helper);
      if (i == j) {
        (r && r->id == enrolled[j].id ? counts.tp : counts.fn) += 1;
      } else if (r) {
        ++counts.fp;
      }
    }
  }
  return counts;
}

void GridConfig::validate() const {
  if (n_bits_list.empty() || error_ratios.empty()) throw std::invalid_argument("grid lists must be non-empty");
  if (n_seeds < 1) throw std::invalid_argument("at least one seed is required");
  if (per_site < 1) throw std::invalid_argument("per_site must be at least 1");
  for (double r : error_ratios) {
    if (!(r > 0 && r < 0.5)) throw std::invalid_argument("error ratios must lie in (0, 0.5)");
  }
  for (int n : n_bits_list) {
    if (n != 64 && n != 128 && n != 256) throw std::invalid_argument("n_bits must be 64, 128 or 256");
  }
}

ingest::Dataset grid_dataset(const GridConfig& cfg, double* sigma_out) {
  if (cfg.embeddings) {
    if (sigma_out) *sigma_out = 0;
    return ingest::load_embeddings(*cfg.embeddings);
  }
  auto synthetic = cfg.synthetic;
  synthetic.seed = mix_seed(cfg.master_seed, 0x5e7);
  // Calibrated against the quantity the extractor compares: the consensus
  // hashes of two disjoint per_site frame groups.
  synthetic.sigma = ingest::calibrate_noise(cfg.flip_ratio, synthetic.dim, 127, mix_seed(cfg.master_seed, 0xca1),
                                            cfg.per_site);
  if (sigma_out) *sigma_out = synthetic.sigma;
  return ingest::gen_synthetic(synthetic);
}

GridResult run_grid(const GridConfig& cfg, const ingest::Dataset& data) {
  cfg.validate();
  struct Cell {
    int n_bits;
    double r;
  };
  std::vector<Cell> cells;
  for (int n : cfg.n_bits_list) {
    for (double r : cfg.error_ratios) cells.push_back({n, r});
  }
  GridResult result;
  result.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t c = next++; c < cells.size(); c = next++) {
      try {
        GridRow row;
        row.n_bits = cells[c].n_bits;
        row.error_ratio = cells[c].r;
        row.code = bch::select_code(row.n_bits, row.error_ratio).params();
        double tp = 0, fn = 0, fp = 0;
        for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
          const auto t = run_trial(data, row.n_bits, row.error_ratio, mix_seed(cfg.master_seed, s), cfg.per_site);
          if (s == 0) row.identities = t.tp + t.fn;
          row.accounting_ok = row.accounting_ok && t.tp + t.fn == row.identities;
          tp += static_cast<double>(t.tp);
          fn += static_cast<double>(t.fn);
          fp += static_cast<double>(t.fp);
        }
        const double n = static_cast<double>(cfg.n_seeds);
        row.tp_mean = tp / n;
        row.fn_mean = fn / n;
        row.fp_mean = fp / n;
        row.m = metrics(tp, fn, fp);
        result.rows[c] = row;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  std::sort(result.rows.begin(), result.rows.end(), [](const GridRow& a, const GridRow& b) {
    return std::tie(a.n_bits, a.error_ratio) < std::tie(b.n_bits, b.error_ratio);
  });
  return result;
}

GridResult run_grid(const GridConfig& cfg) {
  cfg.validate();
  double sigma = 0;
  const auto data = grid_dataset(cfg, &sigma);
  auto result = run_grid(cfg, data);
  result.sigma = sigma;
  if (!cfg.embeddings) {
    result.measured_flip_ratio = ingest::measure_flip_ratio(sigma, cfg.synthetic.dim, 127,
                                                            mix_seed(cfg.master_seed, 0xca2), 400, cfg.per_site);
  }
  return result;
}

void write_csv(std::ostream& out, const std::vector<GridRow>& rows) {
  out << "n_bits,r,n,k,t,tp_mean,fn_mean,fp_mean,precision,recall,f1\n";
  char line[256];
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, "%d,%.2f,%u,%u,%u,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n", row.n_bits,
                  row.error_ratio, static_cast<unsigned>(row.code.n), static_cast<unsigned>(row.code.k),
                  static_cast<unsigned>(row.code.t), row.tp_mean, row.fn_mean, row.fp_mean, row.m.precision,
                  row.m.recall, row.m.f1);
    out << line;
  }
}

}  // namespace headcount::eval
