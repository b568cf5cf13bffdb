#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "headcount/bits.hpp"
#include "headcount/bloom.hpp"
#include "headcount/fuzzy.hpp"
#include "headcount/he/public.hpp"
#include "headcount/ingest.hpp"
#include "headcount/protocol/messages.hpp"
#include "headcount/protocol/transport.hpp"
#include "headcount/random.hpp"

namespace headcount::protocol {

// Observes camera-local plaintext before it is erased. Evaluation and tests
// only; nothing passed here is ever sent.
class AuditSink {
 public:
  virtual ~AuditSink() = default;
  virtual void on_hash(std::size_t /*track*/, const BitString& /*w*/) {}
  virtual void on_identifier(std::size_t /*track*/, const fuzzy::Identifier& /*id*/) {}
  virtual void on_filter(const bloom::BloomFilter& /*filter*/) {}
};

// Keeps copies of everything it observes.
struct RecordingAudit : AuditSink {
  std::vector<BitString> hashes;
  std::vector<fuzzy::Identifier> identifiers;
  std::optional<bloom::BloomFilter> filter;

  void on_hash(std::size_t, const BitString& w) override { hashes.push_back(w); }
  void on_identifier(std::size_t, const fuzzy::Identifier& id) override { identifiers.push_back(id); }
  void on_filter(const bloom::BloomFilter& f) override { filter = f; }
};

struct CameraOptions {
  // One salt for every enrollment, so identifiers repeat across epochs;
  // per-enrollment salts from rng otherwise.
  std::optional<fuzzy::Salt> stable_salt;
};

struct CameraAOutput {
  HelperBatch helpers;
  EpochSubmission submission;
  std::size_t tracks = 0;
};

struct TrackOutcome {
  bool matched = false;
  std::optional<std::size_t> helper_index;  // position in the received batch
  std::size_t errors_corrected = 0;
  std::size_t candidates = 0;  // verified successes before the choice
};

struct MatchStats {
  std::vector<TrackOutcome> tracks;
  std::size_t matched = 0;
  std::size_t fresh = 0;  // tracks enrolled locally after NoMatch
};

struct CameraBOutput {
  EpochSubmission submission;
  MatchStats stats;
};

// Enrolls every track into a fresh filter and encrypts it.
// Helper order is shuffled with rng. No plaintext derived from the tracks
// survives the call.
CameraAOutput camera_a_epoch(const std::vector<ingest::Track>& tracks, const EpochConfig& cfg,
                             const he::PublicKey& pk, Rng& rng, AuditSink* audit = nullptr,
                             const CameraOptions& options = {});

// Greedy one-to-one matching in track order: each track takes the unconsumed
// helper whose reproduction corrected the fewest bits, ties to the lowest
// index; a track with no match is enrolled with a fresh identifier.
CameraBOutput camera_b_epoch(const std::vector<ingest::Track>& tracks, const HelperBatch& batch,
                             const EpochConfig& cfg, const he::PublicKey& pk, Rng& rng,
                             AuditSink* audit = nullptr, const CameraOptions& options = {});

struct CameraReport {
  EpochConfig cfg;
  std::size_t tracks = 0;
  std::size_t helpers = 0;  // sent by A, received by B
  std::optional<MatchStats> stats;
};

// One epoch at one site over a transport: fetches the announcement (and for
// B the helper batch of cfg.helper_epoch), runs the pipeline and submits.
CameraReport run_camera(Transport& transport, Site site, std::uint64_t epoch_id,
                        const std::vector<ingest::Track>& tracks, Rng& rng, AuditSink* audit = nullptr,
                        const CameraOptions& options = {});

}  // namespace headcount::protocol
