#include "headcount/e2e.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "headcount/ingest.hpp"
#include "headcount/protocol/camera.hpp"
#include "headcount/protocol/client.hpp"
#include "headcount/protocol/server.hpp"

namespace headcount::eval {

std::size_t E2EConfig::shared() const {
  return static_cast<std::size_t>(std::llround(overlap * static_cast<double>(identities)));
}

void E2EConfig::validate() const {
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw std::invalid_argument("overlap must lie in [0, 1]");
  if (runs < 1) throw std::invalid_argument("at least one run is required");
  if (per_site < 1) throw std::invalid_argument("per_site must be at least 1");
  if (!(flip_ratio >= 0.0 && flip_ratio < 0.5)) throw std::invalid_argument("flip ratio must lie in [0, 0.5)");
}

double E2ERun::abs_error() const { return std::abs(estimated_flow - static_cast<double>(shared)); }

double E2ERun::rel_error() const {
  if (shared == 0) return estimated_flow == 0 ? 0.0 : INFINITY;
  return abs_error() / static_cast<double>(shared);
}

E2EReport run_e2e(const E2EConfig& cfg) {
  cfg.validate();
  E2EReport report;
  report.cfg = cfg;
  const std::size_t n = cfg.identities;
  const std::size_t g = cfg.shared();
  report.sigma = cfg.zero_noise ? 0.0
                                : ingest::calibrate_noise(cfg.flip_ratio, cfg.dim, 127,
                                                          mix_seed(cfg.master_seed, 0xca1), cfg.per_site);
  const auto ctx = he::Context::create(cfg.backend == he::Backend::lattice ? he::HeParams::lattice()
                                                                           : he::HeParams::emulated());
  for (std::size_t run = 0; run < cfg.runs; ++run) {
    const std::uint64_t seed = mix_seed(cfg.master_seed, run);
    ingest::SyntheticConfig syn;
    syn.n_identities = 2 * n - g;
    syn.frames_per_identity = 2 * cfg.per_site;
    syn.dim = cfg.dim;
    syn.sigma = report.sigma;
    syn.seed = mix_seed(seed, 4);
    const auto split = ingest::split_sites(ingest::gen_synthetic(syn), cfg.per_site, mix_seed(seed, 1));

    // A sees identities [0, n); B sees [0, g) and [n, 2n - g).
    std::vector<ingest::Track> tracks_a(split.site_a.begin(), split.site_a.begin() + static_cast<long>(n));
    std::vector<ingest::Track> tracks_b(split.site_b.begin(), split.site_b.begin() + static_cast<long>(g));
    tracks_b.insert(tracks_b.end(), split.site_b.begin() + static_cast<long>(n), split.site_b.end());
    Rng order = make_rng(seed, 5);
    std::shuffle(tracks_a.begin(), tracks_a.end(), order);
    std::shuffle(tracks_b.begin(), tracks_b.end(), order);

    protocol::Server server({.store = std::nullopt, .rng_seed = mix_seed(seed, 6)});
    protocol::InProcTransport transport(server);
    protocol::Client client(transport, he::keygen(ctx, mix_seed(seed, 7)));
    protocol::EpochPlan plan;
    plan.epoch_id = 1;
    plan.plane_seed = mix_seed(seed, 2);
    plan.bloom_seed = mix_seed(seed, 8);
    plan.n_bits = static_cast<std::uint16_t>(cfg.n_bits);
    plan.dim = static_cast<std::uint16_t>(cfg.dim);
    plan.error_permille = static_cast<std::uint16_t>(std::lround(cfg.error_ratio * 1000));
    plan.bloom_m = cfg.bloom_m;
    plan.bloom_k = cfg.bloom_k;
    client.announce(plan);

    protocol::RecordingAudit audit_a, audit_b;
    Rng rng_a = make_rng(seed, 9);
    Rng rng_b = make_rng(seed, 10);
    protocol::run_camera(transport, protocol::Site::A, plan.epoch_id, tracks_a, rng_a, &audit_a);
    const auto report_b = protocol::run_camera(transport, protocol::Site::B, plan.epoch_id, tracks_b, rng_b, &audit_b);
    const auto est = client.flow(plan.epoch_id, plan.epoch_id, true);

    E2ERun r;
    r.seed = seed;
    r.shared = g;
    r.t = est.t_intersection;
    r.oracle_t = bloom::intersect(*audit_a.filter, *audit_b.filter).bits_set();
    r.estimated_flow = est.estimated_flow;
    r.footfall_a = est.footfall_a.value_or(0);
    r.footfall_b = est.footfall_b.value_or(0);
    r.matched = report_b.stats ? report_b.stats->matched : 0;
    report.runs.push_back(r);
  }
  return report;
}

void write_e2e_csv(std::ostream& out, const E2EReport& report) {
  out << "seed,shared,t,oracle_t,estimated_flow,abs_error,rel_error,footfall_a,footfall_b,matched\n";
  char line[256];
  for (const auto& r : report.runs) {
    std::snprintf(line, sizeof line, "%llu,%zu,%llu,%llu,%.4f,%.4f,%.4f,%.4f,%.4f,%zu\n",
                  static_cast<unsigned long long>(r.seed), r.shared, static_cast<unsigned long long>(r.t),
                  static_cast<unsigned long long>(r.oracle_t), r.estimated_flow, r.abs_error(), r.rel_error(),
                  r.footfall_a, r.footfall_b, r.matched);
    out << line;
  }
}

}  // namespace headcount::eval
