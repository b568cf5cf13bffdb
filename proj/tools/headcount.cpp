#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "headcount/e2e.hpp"
#include "headcount/eval.hpp"
#include "headcount/ingest.hpp"
#include "headcount/protocol/camera.hpp"
#include "headcount/protocol/client.hpp"
#include "headcount/protocol/server.hpp"
#include "json.hpp"

using namespace headcount;
using namespace headcount::protocol;

namespace {

// Failure the user caused; reported without a stack of context.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TransportOptions {
  std::string kind = "tcp";
  std::string server = "127.0.0.1:7600";
  std::string store;

  void add(CLI::App* app) {
    app->add_option("--transport", kind, "inproc or tcp")->check(CLI::IsMember({"inproc", "tcp"}));
    app->add_option("--server", server, "server address for --transport tcp");
    app->add_option("--store", store, "append-only store shared by inproc commands");
  }
};

// Keeps whatever the transport needs alive.
struct Connection {
  std::unique_ptr<Server> server;
  std::unique_ptr<Transport> transport;
};

Connection connect(const TransportOptions& opts) {
  Connection c;
  if (opts.kind == "inproc") {
    ServerOptions so;
    if (!opts.store.empty()) so.store = opts.store;
    c.server = std::make_unique<Server>(so);
    c.transport = std::make_unique<InProcTransport>(*c.server);
  } else {
    c.transport = std::make_unique<TcpTransport>(Endpoint::parse(opts.server));
  }
  return c;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not an integer list: " + text);
    }
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

std::uint16_t percent_to_permille(double percent) {
  if (!(percent > 0 && percent < 50)) throw UsageError("error ratio must be a percentage in (0, 50)");
  return static_cast<std::uint16_t>(std::lround(percent * 10));
}

fuzzy::Salt parse_salt(const std::string& hex) {
  fuzzy::Salt salt{};
  if (hex.size() != 2 * salt.size()) throw UsageError("stable salt must be 32 hex digits");
  for (std::size_t i = 0; i < salt.size(); ++i) {
    const auto byte = hex.substr(2 * i, 2);
    if (byte.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos) {
      throw UsageError("stable salt must be 32 hex digits");
    }
    salt[i] = static_cast<std::uint8_t>(std::stoul(byte, nullptr, 16));
  }
  return salt;
}

TcpListener* active_listener = nullptr;

void on_signal(int) {
  if (active_listener) active_listener->stop();
}

void print_flow(const FlowEstimate& e) {
  std::printf("epoch_a=%llu epoch_b=%llu t=%llu flow=%.2f", static_cast<unsigned long long>(e.epoch_a),
              static_cast<unsigned long long>(e.epoch_b), static_cast<unsigned long long>(e.t_intersection),
              e.estimated_flow);
  if (e.footfall_a) std::printf(" footfall_a=%.2f footfall_b=%.2f", *e.footfall_a, *e.footfall_b);
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving crowd-flow estimation"};
  app.require_subcommand(1);

  // server
  auto* server_cmd = app.add_subcommand("server", "Run the server on a TCP address");
  std::string listen = "127.0.0.1:7600";
  std::string server_store;
  server_cmd->add_option("--listen", listen, "host:port to listen on");
  server_cmd->add_option("--store", server_store, "append-only store file");

  // client
  auto* client_cmd = app.add_subcommand("client", "Key holder: announce epochs and query counts");
  client_cmd->require_subcommand(1);
  std::string key_path = "headcount.key";
  client_cmd->add_option("--key", key_path, "key pair file");
  TransportOptions client_transport;
  client_transport.add(client_cmd);

  auto* keygen_cmd = client_cmd->add_subcommand("keygen", "Generate a key pair");
  std::string backend = "lattice";
  std::optional<std::uint64_t> key_seed;
  keygen_cmd->add_option("--backend", backend, "lattice or emulated")->check(CLI::IsMember({"lattice", "emulated"}));
  keygen_cmd->add_option("--seed", key_seed, "deterministic key generation");

  auto* announce_cmd = client_cmd->add_subcommand("announce", "Announce an epoch");
  EpochPlan plan;
  double error_percent = 25;
  std::optional<std::uint64_t> helper_epoch, reference_epoch, seed;
  announce_cmd->add_option("--epoch", plan.epoch_id, "epoch id")->required();
  announce_cmd->add_option("--helper-epoch", helper_epoch, "epoch whose helpers camera B uses");
  announce_cmd->add_option("--reference-epoch", reference_epoch, "copy plane and Bloom seeds from this epoch");
  announce_cmd->add_option("--seed", seed, "derive the plane and Bloom seeds from this value");
  announce_cmd->add_option("--duration", plan.duration_s, "epoch length in seconds");
  announce_cmd->add_option("--n-bits", plan.n_bits, "SimHash length")->check(CLI::IsMember({64, 128, 256}));
  announce_cmd->add_option("--error-ratio", error_percent, "correction radius in percent");
  announce_cmd->add_option("--dim", plan.dim, "embedding dimension");
  announce_cmd->add_option("--bloom-m", plan.bloom_m, "Bloom filter bits");
  announce_cmd->add_option("--bloom-k", plan.bloom_k, "Bloom hash count");

  auto* flow_cmd = client_cmd->add_subcommand("flow", "Estimate the flow from site A of one epoch to site B of another");
  std::uint64_t epoch_a = 0, epoch_b = 0;
  bool with_footfall = false;
  flow_cmd->add_option("--epoch-a", epoch_a)->required();
  flow_cmd->add_option("--epoch-b", epoch_b)->required();
  flow_cmd->add_flag("--footfall", with_footfall, "also estimate both footfalls");

  auto* footfall_cmd = client_cmd->add_subcommand("footfall", "Estimate the footfall of one site");
  std::uint64_t footfall_epoch = 0;
  std::string footfall_site = "A";
  footfall_cmd->add_option("--epoch", footfall_epoch)->required();
  footfall_cmd->add_option("--site", footfall_site)->check(CLI::IsMember({"A", "B"}));

  // camera
  auto* camera_cmd = app.add_subcommand("camera", "Process one epoch of tracks at one site");
  std::string site = "A";
  std::string camera_config;
  camera_cmd->add_option("--site", site)->required()->check(CLI::IsMember({"A", "B"}));
  camera_cmd->add_option("--config", camera_config, "JSON: epoch, embeddings, optional seed and stable_salt")
      ->required();
  std::string stable_salt;
  camera_cmd->add_option("--stable-salt", stable_salt, "32 hex digits; reuse one salt so identifiers repeat across epochs");
  TransportOptions camera_transport;
  camera_transport.add(camera_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluation runs");
  eval_cmd->require_subcommand(1);
  auto* grid_cmd = eval_cmd->add_subcommand("grid", "Key-reproduction grid over (n_bits, r)");
  std::string n_bits_text = "64,128,256", ratios_text = "10,15,20,25", out_path, embeddings_path;
  eval::GridConfig grid;
  grid_cmd->add_option("--n-bits", n_bits_text, "comma-separated subset of 64,128,256");
  grid_cmd->add_option("--error-ratios", ratios_text, "comma-separated percentages");
  grid_cmd->add_option("--seeds", grid.n_seeds, "seeds per configuration");
  grid_cmd->add_option("--flip-ratio", grid.flip_ratio, "target consensus flip ratio for synthetic data");
  grid_cmd->add_option("--per-site", grid.per_site, "frames per site per identity");
  grid_cmd->add_option("--seed", grid.master_seed, "master seed for data, splits and planes");
  grid_cmd->add_option("--threads", grid.threads);
  grid_cmd->add_option("--out", out_path, "CSV output path");
  auto* emb_opt = grid_cmd->add_option("--embeddings", embeddings_path, "embedding CSV instead of synthetic data");
  auto* syn_flag = grid_cmd->add_flag("--synthetic", "generate synthetic identities (default)");
  syn_flag->excludes(emb_opt);
  grid_cmd->add_option("--identities", grid.synthetic.n_identities);
  grid_cmd->add_option("--frames", grid.synthetic.frames_per_identity);
  grid_cmd->add_option("--dim", grid.synthetic.dim);

  auto* e2e_cmd = eval_cmd->add_subcommand("e2e", "End-to-end flow accuracy against ground truth");
  eval::E2EConfig e2e;
  std::string e2e_backend = "lattice", e2e_out;
  double e2e_percent = 25;
  e2e_cmd->add_option("--overlap", e2e.overlap, "fraction of A's identities seen at B");
  e2e_cmd->add_option("--identities", e2e.identities);
  e2e_cmd->add_option("--backend", e2e_backend)->check(CLI::IsMember({"lattice", "emulated"}));
  e2e_cmd->add_option("--runs", e2e.runs);
  e2e_cmd->add_option("--seed", e2e.master_seed);
  e2e_cmd->add_option("--n-bits", e2e.n_bits)->check(CLI::IsMember({64, 128, 256}));
  e2e_cmd->add_option("--error-ratio", e2e_percent, "correction radius in percent");
  e2e_cmd->add_option("--flip-ratio", e2e.flip_ratio);
  e2e_cmd->add_option("--bloom-m", e2e.bloom_m);
  e2e_cmd->add_option("--bloom-k", e2e.bloom_k);
  e2e_cmd->add_flag("--zero-noise", e2e.zero_noise);
  e2e_cmd->add_option("--out", e2e_out, "CSV output path");

  for (auto* sub : {keygen_cmd, announce_cmd, flow_cmd, footfall_cmd}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*server_cmd) {
      ServerOptions so;
      if (!server_store.empty()) so.store = server_store;
      Server server(so);
      TcpListener listener(server, Endpoint::parse(listen));
      active_listener = &listener;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::fprintf(stderr, "listening on port %u, %zu epochs restored\n", listener.port(), server.epochs());
      listener.serve();
      return 0;
    }

    if (*client_cmd) {
      if (*keygen_cmd) {
        const auto be = he::parse_backend(backend);
        const auto ctx =
            he::Context::create(be == he::Backend::lattice ? he::HeParams::lattice() : he::HeParams::emulated());
        Rng rng = key_seed ? make_rng(*key_seed, 0x6b6579) : entropy_rng();
        save_key_pair(key_path, he::keygen(ctx, rng));
        std::printf("wrote %s (%s backend)\n", key_path.c_str(), backend.c_str());
        return 0;
      }
      auto conn = connect(client_transport);
      Client client(*conn.transport, load_key_pair(key_path));
      if (*announce_cmd) {
        plan.error_permille = percent_to_permille(error_percent);
        plan.helper_epoch = helper_epoch;
        if (reference_epoch) {
          const auto ref = client.fetch_announcement(*reference_epoch);
          plan.plane_seed = ref.plane_seed;
          plan.bloom_seed = ref.bloom_seed;
        } else {
          Rng rng = seed ? make_rng(*seed) : entropy_rng();
          plan.plane_seed = rng();
          plan.bloom_seed = rng();
        }
        const auto cfg = client.announce(plan);
        std::printf("announced epoch %llu: code (%u,%u,%u), m=%u k=%u\n",
                    static_cast<unsigned long long>(cfg.epoch_id), cfg.code.n, cfg.code.k, cfg.code.t, cfg.bloom_m,
                    cfg.bloom_k);
      } else if (*flow_cmd) {
        print_flow(client.flow(epoch_a, epoch_b, with_footfall));
      } else if (*footfall_cmd) {
        std::printf("epoch=%llu site=%s footfall=%.2f\n", static_cast<unsigned long long>(footfall_epoch),
                    footfall_site.c_str(), client.footfall(footfall_epoch, parse_site(footfall_site)));
      }
      return 0;
    }

    if (*camera_cmd) {
      std::ifstream in(camera_config);
      if (!in) throw UsageError("cannot read " + camera_config);
      const auto j = nlohmann::json::parse(in);
      const auto epoch = j.at("epoch").get<std::uint64_t>();
      const auto tracks = ingest::group_by_identity(ingest::load_embeddings(j.at("embeddings").get<std::string>()));
      Rng rng = j.contains("seed") ? make_rng(j["seed"].get<std::uint64_t>()) : entropy_rng();
      if (stable_salt.empty() && j.contains("stable_salt")) stable_salt = j["stable_salt"].get<std::string>();
      CameraOptions options;
      if (!stable_salt.empty()) options.stable_salt = parse_salt(stable_salt);
      auto conn = connect(camera_transport);
      const auto report = run_camera(*conn.transport, parse_site(site), epoch, tracks, rng, nullptr, options);
      std::printf("epoch %llu site %s: %zu tracks, %zu helpers", static_cast<unsigned long long>(epoch), site.c_str(),
                  report.tracks, report.helpers);
      if (report.stats) std::printf(", %zu matched, %zu enrolled locally", report.stats->matched, report.stats->fresh);
      std::printf("\n");
      return 0;
    }

    if (*grid_cmd) {
      grid.n_bits_list = parse_int_list(n_bits_text);
      grid.error_ratios.clear();
      for (int p : parse_int_list(ratios_text)) grid.error_ratios.push_back(percent_to_permille(p) / 1000.0);
      if (!embeddings_path.empty()) grid.embeddings = embeddings_path;
      const auto result = eval::run_grid(grid);
      if (out_path.empty()) {
        eval::write_csv(std::cout, result.rows);
      } else {
        std::ofstream out(out_path);
        eval::write_csv(out, result.rows);
        if (!out) throw std::runtime_error("cannot write " + out_path);
      }
      if (!grid.embeddings) {
        std::fprintf(stderr, "synthetic sigma %.4f, measured flip ratio %.4f\n", result.sigma,
                     result.measured_flip_ratio);
      }
      for (const auto& row : result.rows) {
        if (!row.accounting_ok) {
          std::fprintf(stderr, "TP + FN differs from the identity count at n_bits=%d r=%.2f\n", row.n_bits,
                       row.error_ratio);
          return 3;
        }
      }
      return 0;
    }

    if (*e2e_cmd) {
      e2e.backend = he::parse_backend(e2e_backend);
      e2e.error_ratio = percent_to_permille(e2e_percent) / 1000.0;
      const auto report = eval::run_e2e(e2e);
      if (e2e_out.empty()) {
        eval::write_e2e_csv(std::cout, report);
      } else {
        std::ofstream out(e2e_out);
        eval::write_e2e_csv(out, report);
        if (!out) throw std::runtime_error("cannot write " + e2e_out);
      }
      double mean = 0;
      for (const auto& r : report.runs) mean += r.estimated_flow / static_cast<double>(report.runs.size());
      std::fprintf(stderr, "true overlap %zu, mean estimate %.2f over %zu runs\n", e2e.shared(), mean,
                   report.runs.size());
      for (const auto& r : report.runs) {
        if (!r.exact()) {
          std::fprintf(stderr, "decrypted t=%llu differs from the plaintext oracle %llu\n",
                       static_cast<unsigned long long>(r.t), static_cast<unsigned long long>(r.oracle_t));
          return 3;
        }
      }
      return 0;
    }
  } catch (const ProtocolError& e) {
    std::fprintf(stderr, "server error (%s): %s\n", error_code_name(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
