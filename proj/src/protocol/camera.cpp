#include "headcount/protocol/camera.hpp"

#include <openssl/crypto.h>

#include <algorithm>
#include <stdexcept>
#include <string>

#include "headcount/simhash.hpp"

namespace headcount::protocol {
namespace {

struct EpochContext {
  bch::BchCode code;
  simhash::ProjectionSet<double> planes;
};

EpochContext epoch_context(const EpochConfig& cfg, const he::PublicKey& pk) {
  cfg.validate();
  if (pk.context().params_digest() != cfg.params_digest) {
    throw std::invalid_argument("public key parameters differ from the epoch announcement");
  }
  auto code = bch::BchCode::lookup(cfg.code);
  auto planes = simhash::make_hyperplanes<double>(static_cast<std::size_t>(code.n()), cfg.dim, cfg.plane_seed);
  return {std::move(code), std::move(planes)};
}

BitString track_hash(const ingest::Track& track, std::size_t index, const EpochContext& ec) {
  const auto label = "track " + std::to_string(index) + " (" + track.identity_id + ")";
  if (track.frames.empty()) throw std::invalid_argument(label + " has no frames");
  std::vector<BitString> frames;
  frames.reserve(track.frames.size());
  for (const auto& e : track.frames) {
    if (static_cast<std::size_t>(e.vector.size()) != ec.planes.dim()) {
      throw std::invalid_argument(label + " has a " + std::to_string(e.vector.size()) +
                                  "-dimensional embedding; the epoch expects " + std::to_string(ec.planes.dim()));
    }
    frames.push_back(simhash::simhash(e.vector, ec.planes));
  }
  auto w = simhash::consensus(frames);
  for (auto& f : frames) f.wipe();
  return w;
}

EpochSubmission seal(bloom::BloomFilter& filter, const EpochConfig& cfg, Site site, const he::PublicKey& pk,
                     Rng& rng, AuditSink* audit) {
  if (audit) audit->on_filter(filter);
  auto bits = filter.unpacked();
  EpochSubmission sub{cfg.epoch_id, site, he::encrypt_bits(pk, bits, rng)};
  OPENSSL_cleanse(bits.data(), bits.size());
  filter.wipe();
  return sub;
}

fuzzy::Enrollment enroll(const BitString& w, const bch::BchCode& code, Rng& rng, const CameraOptions& options) {
  if (options.stable_salt) return fuzzy::gen(w, code, rng(), *options.stable_salt);
  return fuzzy::gen(w, code, rng);
}

void insert(bloom::BloomFilter& filter, fuzzy::Identifier& id, std::size_t track, AuditSink* audit) {
  if (audit) audit->on_identifier(track, id);
  filter.insert(id.bytes);
  OPENSSL_cleanse(id.bytes.data(), id.bytes.size());
}

}  // namespace

CameraAOutput camera_a_epoch(const std::vector<ingest::Track>& tracks, const EpochConfig& cfg,
                             const he::PublicKey& pk, Rng& rng, AuditSink* audit, const CameraOptions& options) {
  const auto ec = epoch_context(cfg, pk);
  bloom::BloomFilter filter(cfg.bloom_m, cfg.bloom_k, cfg.bloom_seed);
  CameraAOutput out;
  out.tracks = tracks.size();
  out.helpers.epoch_id = cfg.epoch_id;
  out.helpers.helpers.reserve(tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    auto w = track_hash(tracks[i], i, ec);
    if (audit) audit->on_hash(i, w);
    auto e = enroll(w, ec.code, rng, options);
    w.wipe();
    insert(filter, e.id, i, audit);
    out.helpers.helpers.push_back(std::move(e.helper));
  }
  std::shuffle(out.helpers.helpers.begin(), out.helpers.helpers.end(), rng);
  out.submission = seal(filter, cfg, Site::A, pk, rng, audit);
  return out;
}

CameraBOutput camera_b_epoch(const std::vector<ingest::Track>& tracks, const HelperBatch& batch,
                             const EpochConfig& cfg, const he::PublicKey& pk, Rng& rng, AuditSink* audit,
                             const CameraOptions& options) {
  if (batch.epoch_id != cfg.helper_epoch) {
    throw std::invalid_argument("helper batch belongs to epoch " + std::to_string(batch.epoch_id) +
                                ", expected " + std::to_string(cfg.helper_epoch));
  }
  const auto ec = epoch_context(cfg, pk);
  for (const auto& h : batch.helpers) {
    if (h.code != cfg.code) throw std::invalid_argument("helper code differs from the epoch announcement");
  }
  bloom::BloomFilter filter(cfg.bloom_m, cfg.bloom_k, cfg.bloom_seed);
  std::vector<bool> consumed(batch.helpers.size(), false);
  CameraBOutput out;
  out.stats.tracks.reserve(tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    auto w = track_hash(tracks[i], i, ec);
    if (audit) audit->on_hash(i, w);
    TrackOutcome outcome;
    std::optional<fuzzy::Reproduction> best;
    for (std::size_t j = 0; j < batch.helpers.size(); ++j) {
      if (consumed[j]) continue;
      auto r = fuzzy::rep(w, batch.helpers[j]);
      if (!r) continue;
      ++outcome.candidates;
      if (!best || r->errors_corrected < best->errors_corrected) {
        if (best) OPENSSL_cleanse(best->id.bytes.data(), best->id.bytes.size());
        best = std::move(r);
        outcome.helper_index = j;
      } else {
        OPENSSL_cleanse(r->id.bytes.data(), r->id.bytes.size());
      }
    }
    if (best) {
      consumed[*outcome.helper_index] = true;
      outcome.matched = true;
      outcome.errors_corrected = best->errors_corrected;
      insert(filter, best->id, i, audit);
      ++out.stats.matched;
    } else {
      auto e = enroll(w, ec.code, rng, options);
      insert(filter, e.id, i, audit);
      ++out.stats.fresh;
    }
    w.wipe();
    out.stats.tracks.push_back(outcome);
  }
  out.submission = seal(filter, cfg, Site::B, pk, rng, audit);
  return out;
}

CameraReport run_camera(Transport& transport, Site site, std::uint64_t epoch_id,
                        const std::vector<ingest::Track>& tracks, Rng& rng, AuditSink* audit,
                        const CameraOptions& options) {
  CameraReport report;
  report.cfg = read_epoch_config(call(transport, fetch_frame(MsgType::announce, epoch_id), MsgType::announce).payload);
  if (report.cfg.epoch_id != epoch_id) throw DecodeError("server returned the announcement of another epoch");
  const auto pk = announced_key(report.cfg);
  report.tracks = tracks.size();
  if (site == Site::A) {
    auto out = camera_a_epoch(tracks, report.cfg, pk, rng, audit, options);
    report.helpers = out.helpers.helpers.size();
    call(transport, to_frame(out.helpers), MsgType::helper_batch);
    call(transport, to_frame(out.submission), MsgType::submission);
  } else {
    const auto batch = read_helper_batch(
        call(transport, fetch_frame(MsgType::helper_batch, report.cfg.helper_epoch), MsgType::helper_batch).payload);
    report.helpers = batch.helpers.size();
    auto out = camera_b_epoch(tracks, batch, report.cfg, pk, rng, audit, options);
    call(transport, to_frame(out.submission), MsgType::submission);
    report.stats = std::move(out.stats);
  }
  return report;
}

}  // namespace headcount::protocol
