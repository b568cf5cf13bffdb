#include <algorithm>
#include <chrono>
#include <filesystem>
#include <thread>

#include "doctest.h"
#include "headcount/bloom.hpp"
#include "headcount/he/secret.hpp"
#include "headcount/ingest.hpp"
#include "headcount/protocol/camera.hpp"
#include "headcount/protocol/client.hpp"
#include "headcount/protocol/server.hpp"

using namespace headcount;
using namespace headcount::protocol;

namespace {

constexpr he::Backend kBackends[] = {he::Backend::emulated, he::Backend::lattice};

std::shared_ptr<const he::Context> context_for(he::Backend b) {
  return he::Context::create(b == he::Backend::lattice ? he::HeParams::lattice() : he::HeParams::emulated());
}

ingest::SiteSplit make_split(std::size_t identities, double sigma, std::uint64_t seed) {
  ingest::SyntheticConfig syn;
  syn.n_identities = identities;
  syn.frames_per_identity = 8;
  syn.sigma = sigma;
  syn.seed = seed;
  return ingest::split_sites(ingest::gen_synthetic(syn), 4, seed + 1);
}

EpochPlan plan_for(std::uint64_t epoch) {
  EpochPlan plan;
  plan.epoch_id = epoch;
  plan.plane_seed = 0x1111 + epoch;
  plan.bloom_seed = 0x2222 + epoch;
  return plan;
}

bool contains(const std::vector<std::uint8_t>& hay, std::span<const std::uint8_t> needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

ErrorCode error_of(Server& server, const Frame& f) {
  const auto resp = server.handle(f);
  REQUIRE(resp.type == MsgType::error);
  return read_error(resp.payload).code;
}

struct Deployment {
  explicit Deployment(he::Backend b, ServerOptions opts = {.store = std::nullopt, .rng_seed = 5})
      : ctx(context_for(b)), keys(he::keygen(ctx, 42)), server(std::move(opts)), transport(server),
        client(transport, he::keygen(ctx, 42)) {}

  std::shared_ptr<const he::Context> ctx;
  he::KeyPair keys;
  Server server;
  InProcTransport transport;
  Client client;
};

}  // namespace

TEST_CASE("frames round-trip and reject malformed headers") {
  const Frame f{MsgType::flow_query, {1, 2, 3}};
  const auto bytes = encode_frame(f);
  REQUIRE(bytes.size() == kHeaderSize + 3);
  CHECK(std::equal(bytes.begin(), bytes.begin() + 4, "HDCT"));
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 4);
  CHECK(bytes[6] == 3);
  const auto back = decode_frame(bytes);
  CHECK(back.type == f.type);
  CHECK(back.payload == f.payload);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_frame(bad), DecodeError);
  bad = bytes;
  bad[4] = 2;
  CHECK_THROWS_AS(decode_frame(bad), DecodeError);
  bad = bytes;
  bad[5] = 9;
  CHECK_THROWS_AS(decode_frame(bad), DecodeError);
  CHECK_THROWS_AS(decode_frame(std::span(bytes).first(bytes.size() - 1)), DecodeError);
}

TEST_CASE("messages round-trip through their payload encodings") {
  for (auto backend : kBackends) {
    CAPTURE(he::backend_name(backend));
    Deployment d(backend);
    const auto cfg = make_epoch_config(plan_for(3), d.keys.public_key);
    CHECK(read_epoch_config(to_frame(cfg).payload) == cfg);
    CHECK(announced_key(cfg).key_id() == d.keys.public_key.key_id());

    const auto split = make_split(6, 0.03, 9);
    Rng rng = make_rng(1);
    auto a = camera_a_epoch(split.site_a, cfg, d.keys.public_key, rng);
    CHECK(read_helper_batch(to_frame(a.helpers).payload) == a.helpers);

    const auto sub = read_submission(to_frame(a.submission).payload, *d.ctx);
    CHECK(sub.epoch_id == 3);
    CHECK(sub.site == Site::A);
    CHECK(sub.filter == a.submission.filter);
    CHECK(peek_submission(to_frame(a.submission).payload) == std::pair<std::uint64_t, Site>{3, Site::A});

    const auto q = read_flow_query(to_frame(FlowQuery{3, 4}).payload);
    CHECK(q.epoch_a == 3);
    CHECK(q.epoch_b == 4);
    const auto ct = he::encrypt_value(d.keys.public_key, 77, rng);
    const auto fr = read_flow_response(to_frame(FlowResponse{3, 4, ct}).payload, *d.ctx);
    CHECK(he::decrypt_count(d.keys.secret_key, fr.count) == 77);
    const auto fq = read_footfall_query(to_frame(FootfallQuery{5, Site::B}).payload);
    CHECK(fq.epoch_id == 5);
    CHECK(fq.site == Site::B);
    const auto ff = read_footfall_response(to_frame(FootfallResponse{5, Site::B, ct}).payload, *d.ctx);
    CHECK(ff.site == Site::B);
    CHECK(he::decrypt_count(d.keys.secret_key, ff.count) == 77);
    const auto err = read_error(to_frame(ErrorMsg{ErrorCode::conflict, "dup"}).payload);
    CHECK(err.code == ErrorCode::conflict);
    CHECK(err.message == "dup");

    CHECK_THROWS_AS(read_flow_query(std::vector<std::uint8_t>{1, 2}), DecodeError);
    auto trailing = to_frame(FlowQuery{1, 2}).payload;
    trailing.push_back(0);
    CHECK_THROWS_AS(read_flow_query(trailing), DecodeError);
  }
}

TEST_CASE("no message schema admits a private field kind") {
  Deployment d(he::Backend::emulated);
  const auto cfg = make_epoch_config(plan_for(1), d.keys.public_key);
  Rng rng = make_rng(2);
  const auto a = camera_a_epoch(make_split(3, 0.03, 4).site_a, cfg, d.keys.public_key, rng);
  const auto ct = he::encrypt_value(d.keys.public_key, 1, rng);

  auto check = [](MsgType t, const auto& msg) {
    CAPTURE(msg_type_name(t));
    FieldWriter w;
    write_payload(w, msg);
    CHECK(w.kinds() == message_schema(t));
    CHECK(to_frame(msg).type == t);
  };
  check(MsgType::announce, cfg);
  check(MsgType::helper_batch, a.helpers);
  check(MsgType::submission, a.submission);
  check(MsgType::flow_query, FlowQuery{1, 1});
  check(MsgType::flow_response, FlowResponse{1, 1, ct});
  check(MsgType::footfall_query, FootfallQuery{1, Site::A});
  check(MsgType::footfall_response, FootfallResponse{1, Site::A, ct});
  check(MsgType::error, ErrorMsg{ErrorCode::internal, "x"});

  for (std::uint8_t t = 1; t <= 8; ++t) {
    for (auto k : message_schema(static_cast<MsgType>(t))) {
      CAPTURE(field_kind_name(k));
      CHECK_FALSE(is_private(k));
    }
  }
  CHECK(is_private(FieldKind::embedding));
  CHECK(is_private(FieldKind::simhash));
  CHECK(is_private(FieldKind::plain_filter));
  CHECK(is_private(FieldKind::identifier));
}

TEST_CASE("camera traffic carries no camera-local plaintext") {
  for (auto backend : kBackends) {
    CAPTURE(he::backend_name(backend));
    Deployment d(backend);
    d.client.announce(plan_for(1));
    const auto split = make_split(40, 0.03, 11);
    RecordingTransport wire_a(d.transport), wire_b(d.transport);
    RecordingAudit audit_a, audit_b;
    Rng rng_a = make_rng(3), rng_b = make_rng(4);
    run_camera(wire_a, Site::A, 1, split.site_a, rng_a, &audit_a);
    run_camera(wire_b, Site::B, 1, split.site_b, rng_b, &audit_b);

    std::vector<std::vector<std::uint8_t>> sent = wire_a.sent;
    sent.insert(sent.end(), wire_b.sent.begin(), wire_b.sent.end());
    for (const auto& bytes : sent) {
      const auto type = decode_frame(bytes).type;
      CHECK((type == MsgType::announce || type == MsgType::helper_batch || type == MsgType::submission));
    }
    for (const auto* audit : {&audit_a, &audit_b}) {
      REQUIRE(audit->hashes.size() == 40);
      REQUIRE(audit->identifiers.size() == 40);
      REQUIRE(audit->filter);
      ByteWriter packed;
      audit->filter->serialize(packed);
      const auto filter_bits = std::span(packed.bytes()).subspan(13);
      const auto unpacked = audit->filter->unpacked();
      for (const auto& bytes : sent) {
        const auto frame = decode_frame(bytes);
        for (const auto& w : audit->hashes) {
          if (!contains(bytes, w.to_bytes())) continue;
          // Only an offset w ^ c with c the zero codeword may equal a hash.
          REQUIRE(frame.type == MsgType::helper_batch);
          const auto batch = read_helper_batch(frame.payload);
          CHECK(std::any_of(batch.helpers.begin(), batch.helpers.end(),
                            [&](const fuzzy::HelperData& h) { return h.offset == w; }));
        }
        for (const auto& id : audit->identifiers) CHECK_FALSE(contains(bytes, id.bytes));
        CHECK_FALSE(contains(bytes, filter_bits));
        CHECK_FALSE(contains(bytes, unpacked));
      }
    }
  }
}

TEST_CASE("decrypted flow equals the plaintext intersection on both backends") {
  for (auto backend : kBackends) {
    CAPTURE(he::backend_name(backend));
    Deployment d(backend);
    d.client.announce(plan_for(7));
    const auto split = make_split(50, 0.03, 21);
    std::vector<ingest::Track> b_tracks(split.site_b.begin(), split.site_b.begin() + 25);
    RecordingAudit audit_a, audit_b;
    Rng rng_a = make_rng(5), rng_b = make_rng(6);
    run_camera(d.transport, Site::A, 7, split.site_a, rng_a, &audit_a);
    const auto rb = run_camera(d.transport, Site::B, 7, b_tracks, rng_b, &audit_b);
    CHECK(d.server.submissions() == 2);

    const auto est = d.client.flow(7, 7, true);
    const auto oracle = bloom::intersect(*audit_a.filter, *audit_b.filter).bits_set();
    CHECK(est.t_intersection == oracle);
    CHECK(est.estimated_flow == doctest::Approx(bloom::estimate_cardinality(4096, 3, oracle)));
    CHECK(est.estimated_flow >= 0);
    CHECK(d.client.footfall_bits(7, Site::A) == audit_a.filter->bits_set());
    CHECK(d.client.footfall_bits(7, Site::B) == audit_b.filter->bits_set());
    CHECK(*est.footfall_a == doctest::Approx(50).epsilon(0.05));
    CHECK(*est.footfall_b == doctest::Approx(25).epsilon(0.1));
    CHECK(est.estimated_flow <= std::min(*est.footfall_a, *est.footfall_b) + 3);
    REQUIRE(rb.stats);
    CHECK(rb.stats->matched <= 25);
    CHECK(rb.stats->matched + rb.stats->fresh == 25);

    // Same plaintext result, fresh release randomness.
    const auto again = d.client.flow(7, 7);
    CHECK(again.t_intersection == est.t_intersection);
  }
}

TEST_CASE("server rejects duplicates and unregistered submissions") {
  Deployment d(he::Backend::emulated);
  const auto cfg = d.client.announce(plan_for(7));
  CHECK(d.server.epochs() == 1);
  // Identical re-announcement is idempotent; a different one conflicts.
  CHECK(d.server.handle(to_frame(cfg)).type == MsgType::announce);
  auto changed = cfg;
  changed.bloom_seed ^= 1;
  CHECK(error_of(d.server, to_frame(changed)) == ErrorCode::conflict);
  auto older = make_epoch_config(plan_for(6), d.keys.public_key);
  CHECK(error_of(d.server, to_frame(older)) == ErrorCode::conflict);

  Rng rng = make_rng(8);
  const auto split = make_split(5, 0.03, 31);
  auto a = camera_a_epoch(split.site_a, cfg, d.keys.public_key, rng);
  CHECK(d.server.handle(to_frame(a.submission)).type == MsgType::submission);
  CHECK(error_of(d.server, to_frame(a.submission)) == ErrorCode::conflict);
  CHECK(error_of(d.server, to_frame(FlowQuery{7, 7})) == ErrorCode::not_found);
  CHECK(error_of(d.server, to_frame(FootfallQuery{7, Site::B})) == ErrorCode::not_found);
  CHECK(error_of(d.server, to_frame(FootfallQuery{8, Site::A})) == ErrorCode::not_found);
  CHECK(error_of(d.server, fetch_frame(MsgType::helper_batch, 7)) == ErrorCode::not_found);

  auto unannounced = a.submission;
  unannounced.epoch_id = 9;
  CHECK(error_of(d.server, to_frame(unannounced)) == ErrorCode::unregistered);

  // Same epoch, filter encrypted under another backend's parameters.
  const auto lattice = he::Context::create(he::HeParams::lattice());
  const auto other = he::keygen(lattice, 1);
  EpochSubmission foreign{7, Site::B, he::encrypt_bits(other.public_key, std::vector<std::uint8_t>(4096, 0), rng)};
  CHECK(error_of(d.server, to_frame(foreign)) == ErrorCode::unregistered);
  // Right parameters, another key.
  const auto stranger = he::keygen(d.ctx, 99);
  foreign.filter = he::encrypt_bits(stranger.public_key, std::vector<std::uint8_t>(4096, 0), rng);
  CHECK(error_of(d.server, to_frame(foreign)) == ErrorCode::unregistered);

  HelperBatch wrong_epoch{9, {}};
  CHECK(error_of(d.server, to_frame(wrong_epoch)) == ErrorCode::unregistered);
  CHECK(d.server.handle(to_frame(a.helpers)).type == MsgType::helper_batch);
  CHECK(error_of(d.server, to_frame(a.helpers)) == ErrorCode::conflict);

  CHECK(error_of(d.server, Frame{MsgType::flow_response, {}}) == ErrorCode::bad_request);
  CHECK(error_of(d.server, Frame{MsgType::flow_query, {1}}) == ErrorCode::bad_request);
  const auto garbage = d.server.handle_bytes(std::vector<std::uint8_t>{1, 2, 3});
  CHECK(decode_frame(garbage).type == MsgType::error);

  try {
    call(d.transport, to_frame(a.submission), MsgType::submission);
    FAIL("expected a conflict");
  } catch (const ProtocolError& e) {
    CHECK(e.code() == ErrorCode::conflict);
  }
}

TEST_CASE("flow queries across incompatible epochs are refused") {
  Deployment d(he::Backend::emulated);
  d.client.announce(plan_for(1));
  auto plan = plan_for(2);
  plan.bloom_m = 2048;
  d.client.announce(plan);
  const auto split = make_split(4, 0.03, 41);
  Rng rng = make_rng(9);
  run_camera(d.transport, Site::A, 1, split.site_a, rng);
  run_camera(d.transport, Site::A, 2, split.site_a, rng);
  const auto cfg2 = d.client.fetch_announcement(2);
  auto b = camera_b_epoch(split.site_b, read_helper_batch(d.server.handle(fetch_frame(MsgType::helper_batch, 2)).payload),
                          cfg2, d.keys.public_key, rng);
  CHECK(d.server.handle(to_frame(b.submission)).type == MsgType::submission);
  CHECK(error_of(d.server, to_frame(FlowQuery{1, 2})) == ErrorCode::incompatible);
  CHECK(d.client.flow(2, 2).t_intersection > 0);
}

TEST_CASE("camera A output for empty and repeated inputs") {
  Deployment d(he::Backend::emulated);
  const auto cfg = make_epoch_config(plan_for(1), d.keys.public_key);
  Rng rng = make_rng(1);
  const auto empty = camera_a_epoch({}, cfg, d.keys.public_key, rng);
  CHECK(empty.helpers.helpers.empty());
  const auto bits = he::decrypt_bits(d.keys.secret_key, empty.submission.filter);
  CHECK(std::count(bits.begin(), bits.end(), 1) == 0);

  const auto split = make_split(20, 0.03, 51);
  Rng r1 = make_rng(77), r2 = make_rng(77);
  const auto x = camera_a_epoch(split.site_a, cfg, d.keys.public_key, r1);
  const auto y = camera_a_epoch(split.site_a, cfg, d.keys.public_key, r2);
  CHECK(to_frame(x.helpers).payload == to_frame(y.helpers).payload);
  CHECK(x.helpers.helpers.size() == 20);

  auto bad = split.site_a;
  bad[3].frames[1].vector = Eigen::VectorXd::Ones(64).normalized();
  try {
    camera_a_epoch(bad, cfg, d.keys.public_key, rng);
    FAIL("expected a dimension error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("track 3 (" + bad[3].identity_id + ")") != std::string::npos);
  }
  auto hollow = split.site_a;
  hollow[0].frames.clear();
  CHECK_THROWS_AS(camera_a_epoch(hollow, cfg, d.keys.public_key, rng), std::invalid_argument);
}

TEST_CASE("camera A helpers are shuffled against track order") {
  Deployment d(he::Backend::emulated);
  const auto cfg = make_epoch_config(plan_for(1), d.keys.public_key);
  const auto split = make_split(30, 0.0, 61);
  Rng rng = make_rng(3);
  const auto a = camera_a_epoch(split.site_a, cfg, d.keys.public_key, rng);
  // Track i reproduces helper i exactly when nothing was shuffled.
  std::size_t in_place = 0;
  for (std::size_t i = 0; i < 30; ++i) {
    Rng local = make_rng(4);
    auto b = camera_b_epoch({split.site_b[i]}, a.helpers, cfg, d.keys.public_key, local);
    REQUIRE(b.stats.matched == 1);
    if (*b.stats.tracks[0].helper_index == i) ++in_place;
  }
  CHECK(in_place < 30);
}

TEST_CASE("camera B matching at the extremes") {
  Deployment d(he::Backend::emulated);
  const auto cfg = make_epoch_config(plan_for(1), d.keys.public_key);
  Rng rng = make_rng(12);

  SUBCASE("zero noise: every track matches and the filters coincide") {
    const auto split = make_split(130, 0.0, 71);
    RecordingAudit audit_a, audit_b;
    const auto a = camera_a_epoch(split.site_a, cfg, d.keys.public_key, rng, &audit_a);
    const auto b = camera_b_epoch(split.site_b, a.helpers, cfg, d.keys.public_key, rng, &audit_b);
    CHECK(b.stats.matched == 130);
    CHECK(b.stats.fresh == 0);
    CHECK(*audit_a.filter == *audit_b.filter);
    for (const auto& t : b.stats.tracks) CHECK(t.errors_corrected == 0);
    const auto ct = he::encrypted_intersection_count(*d.ctx, a.submission.filter, b.submission.filter);
    const auto t = he::decrypt_count(d.keys.secret_key, ct);
    CHECK(t == audit_a.filter->bits_set());
    CHECK(bloom::estimate_cardinality(4096, 3, t) == doctest::Approx(130).epsilon(0.05));
  }

  SUBCASE("disjoint identities match at most rarely and still count at B") {
    const auto split = make_split(100, 0.03, 81);
    std::vector<ingest::Track> a_tracks(split.site_a.begin(), split.site_a.begin() + 50);
    std::vector<ingest::Track> b_tracks(split.site_b.begin() + 50, split.site_b.end());
    const auto a = camera_a_epoch(a_tracks, cfg, d.keys.public_key, rng);
    const auto b = camera_b_epoch(b_tracks, a.helpers, cfg, d.keys.public_key, rng);
    CHECK(b.stats.matched <= 1);
    CHECK(b.stats.matched + b.stats.fresh == 50);
    const auto bits = he::decrypt_bits(d.keys.secret_key, b.submission.filter);
    const auto set = static_cast<std::uint64_t>(std::count(bits.begin(), bits.end(), 1));
    CHECK(bloom::estimate_cardinality(4096, 3, set) == doctest::Approx(50).epsilon(0.1));
  }

  SUBCASE("each helper is consumed once") {
    const auto split = make_split(10, 0.0, 91);
    const auto a = camera_a_epoch(split.site_a, cfg, d.keys.public_key, rng);
    std::vector<ingest::Track> twice = split.site_b;
    twice.insert(twice.end(), split.site_b.begin(), split.site_b.end());
    const auto b = camera_b_epoch(twice, a.helpers, cfg, d.keys.public_key, rng);
    CHECK(b.stats.matched == 10);
    CHECK(b.stats.fresh == 10);
    std::vector<std::size_t> used;
    for (const auto& t : b.stats.tracks) {
      if (t.helper_index) used.push_back(*t.helper_index);
    }
    std::sort(used.begin(), used.end());
    CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
  }

  SUBCASE("helper batch from another epoch is refused") {
    HelperBatch other{2, {}};
    CHECK_THROWS_AS(camera_b_epoch({}, other, cfg, d.keys.public_key, rng), std::invalid_argument);
  }
}

TEST_CASE("revisits compare two epochs of one camera") {
  Deployment d(he::Backend::emulated);
  d.client.announce(plan_for(1));
  auto later = plan_for(1);
  later.epoch_id = 2;
  later.helper_epoch = 1;
  d.client.announce(later);
  const auto split = make_split(20, 0.0, 101);
  Rng rng = make_rng(13);
  run_camera(d.transport, Site::A, 1, split.site_a, rng);
  std::vector<ingest::Track> returning(split.site_b.begin(), split.site_b.begin() + 10);
  const auto rb = run_camera(d.transport, Site::B, 2, returning, rng);
  CHECK(rb.stats->matched == 10);
  const auto est = d.client.flow(1, 2);
  CHECK(est.estimated_flow == doctest::Approx(10).epsilon(0.2));
}

TEST_CASE("client estimates from decrypted counts") {
  const auto ctx = context_for(he::Backend::emulated);
  const auto keys = he::keygen(ctx, 1);
  Rng rng = make_rng(2);
  CHECK(client_flow_estimate(keys.secret_key, he::encrypt_value(keys.public_key, 0, rng), 4096, 3).estimated_flow == 0);
  const auto e = client_flow_estimate(keys.secret_key, he::encrypt_value(keys.public_key, 300, rng), 4096, 3);
  CHECK(e.t_intersection == 300);
  CHECK(e.estimated_flow == doctest::Approx(103.8).epsilon(0.001));
  CHECK(client_footfall_estimate(keys.secret_key, he::encrypt_value(keys.public_key, 0, rng), 4096, 3) == 0);

  // A wrong key is surfaced, not absorbed.
  const auto other = he::keygen(ctx, 2);
  CHECK_THROWS_AS(client_flow_estimate(other.secret_key, he::encrypt_value(keys.public_key, 5, rng), 4096, 3),
                  he::KeyMismatch);
}

TEST_CASE("footfall of one site is stable across queries") {
  Deployment d(he::Backend::lattice);
  d.client.announce(plan_for(1));
  Rng rng = make_rng(14);
  run_camera(d.transport, Site::A, 1, make_split(130, 0.03, 111).site_a, rng);
  const auto f1 = d.client.footfall(1, Site::A);
  const auto f2 = d.client.footfall(1, Site::A);
  CHECK(f1 == f2);
  CHECK(f1 == doctest::Approx(130).epsilon(0.05));
}

TEST_CASE("the append-only store restores state") {
  const auto path = std::filesystem::temp_directory_path() / "headcount_store_test.log";
  std::filesystem::remove(path);
  const auto split = make_split(12, 0.0, 121);
  std::uint64_t t_before = 0;
  {
    Deployment d(he::Backend::emulated, {.store = path, .rng_seed = 1});
    d.client.announce(plan_for(4));
    Rng rng = make_rng(15);
    run_camera(d.transport, Site::A, 4, split.site_a, rng);
    run_camera(d.transport, Site::B, 4, split.site_b, rng);
    t_before = d.client.flow(4, 4).t_intersection;
  }
  Deployment d(he::Backend::emulated, {.store = path, .rng_seed = 2});
  CHECK(d.server.epochs() == 1);
  CHECK(d.server.submissions() == 2);
  CHECK(d.client.flow(4, 4).t_intersection == t_before);
  CHECK(error_of(d.server, fetch_frame(MsgType::helper_batch, 5)) == ErrorCode::not_found);
  std::filesystem::remove(path);
}

TEST_CASE("the protocol runs over TCP") {
  Deployment d(he::Backend::lattice);
  TcpListener listener(d.server, Endpoint::parse("127.0.0.1:0"));
  REQUIRE(listener.port() != 0);
  std::thread serving([&] { listener.serve(); });
  {
    TcpTransport tcp(Endpoint{"127.0.0.1", listener.port()});
    Client client(tcp, he::keygen(d.ctx, 42));
    client.announce(plan_for(1));
    const auto split = make_split(30, 0.03, 131);
    RecordingAudit audit_a, audit_b;
    Rng rng = make_rng(16);
    {
      TcpTransport cam(Endpoint{"127.0.0.1", listener.port()});
      run_camera(cam, Site::A, 1, split.site_a, rng, &audit_a);
      run_camera(cam, Site::B, 1, split.site_b, rng, &audit_b);
    }
    const auto est = client.flow(1, 1, true);
    CHECK(est.t_intersection == bloom::intersect(*audit_a.filter, *audit_b.filter).bits_set());
    CHECK_THROWS_AS(client.flow(1, 9), ProtocolError);
  }
  listener.stop();
  serving.join();
}

TEST_CASE("endpoints parse host and port") {
  const auto e = Endpoint::parse("10.0.0.2:7000");
  CHECK(e.host == "10.0.0.2");
  CHECK(e.port == 7000);
  CHECK(Endpoint::parse(":81").port == 81);
  CHECK_THROWS(Endpoint::parse("nohost"));
  CHECK_THROWS(Endpoint::parse("h:99999"));
}

TEST_CASE("a stable salt makes identifiers repeat across epochs") {
  Deployment d(he::Backend::emulated);
  const auto cfg = make_epoch_config(plan_for(1), d.keys.public_key);
  const auto split = make_split(10, 0.0, 141);
  CameraOptions stable;
  stable.stable_salt = fuzzy::Salt{1, 2, 3};
  RecordingAudit first, second, fresh1, fresh2;
  Rng r1 = make_rng(1), r2 = make_rng(2);
  camera_a_epoch(split.site_a, cfg, d.keys.public_key, r1, &first, stable);
  camera_a_epoch(split.site_a, cfg, d.keys.public_key, r2, &second, stable);
  CHECK(first.identifiers == second.identifiers);
  camera_a_epoch(split.site_a, cfg, d.keys.public_key, r1, &fresh1);
  camera_a_epoch(split.site_a, cfg, d.keys.public_key, r2, &fresh2);
  CHECK(fresh1.identifiers != fresh2.identifiers);
}
