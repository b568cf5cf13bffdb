#include "headcount/protocol/server.hpp"

#ifndef HEADCOUNT_SERVER_BUILD
#error "the server is compiled only as a server build"
#endif

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <fstream>
#include <iterator>
#include <map>
#include <system_error>

namespace headcount::protocol {

struct Server::Impl {
  struct Registration {
    EpochConfig cfg;
    std::vector<std::uint8_t> payload;
    std::shared_ptr<const he::PublicKey> pk;
  };
  using FilterKey = std::pair<std::uint64_t, Site>;

  mutable std::mutex mu;
  std::map<std::uint64_t, Registration> epochs;
  std::map<std::uint64_t, std::vector<std::uint8_t>> helpers;
  std::map<FilterKey, std::shared_ptr<const he::EncryptedBloom>> filters;
  std::map<Digest, std::shared_ptr<const he::Context>> contexts;
  std::mutex rng_mu;
  Rng rng;
  std::optional<std::filesystem::path> store;
  std::ofstream log;

  // Caller holds mu.
  std::shared_ptr<const he::Context> context_for(const he::HeParams& params) {
    auto ctx = he::Context::create(params);
    auto [it, inserted] = contexts.try_emplace(ctx->params_digest(), ctx);
    return it->second;
  }

  const Registration& registration(std::uint64_t epoch) const {
    auto it = epochs.find(epoch);
    if (it == epochs.end()) {
      throw ProtocolError(ErrorCode::not_found, "epoch " + std::to_string(epoch) + " was never announced");
    }
    return it->second;
  }

  void append(const Frame& f) {
    if (!log.is_open()) return;
    const auto bytes = encode_frame(f);
    log.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    log.flush();
    if (!log) throw ProtocolError(ErrorCode::internal, "store write failed");
  }

  Frame announce(const Frame& f) {
    if (is_fetch(f)) {
      std::lock_guard<std::mutex> lock(mu);
      return {MsgType::announce, registration(fetch_epoch(f)).payload};
    }
    auto cfg = read_epoch_config(f.payload);
    cfg.validate();
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = epochs.find(cfg.epoch_id); it != epochs.end()) {
      if (it->second.payload == f.payload) return ack_frame(MsgType::announce);
      throw ProtocolError(ErrorCode::conflict, "epoch " + std::to_string(cfg.epoch_id) + " is already announced");
    }
    if (!epochs.empty() && cfg.epoch_id < epochs.rbegin()->first) {
      throw ProtocolError(ErrorCode::conflict, "epoch ids must increase; latest is " +
                                                   std::to_string(epochs.rbegin()->first));
    }
    auto ctx = context_for(cfg.he_params);
    if (ctx->params_digest() != cfg.params_digest) {
      throw ProtocolError(ErrorCode::bad_request, "parameter digest does not match the HE parameters");
    }
    ByteReader r(cfg.public_key);
    auto pk = std::make_shared<const he::PublicKey>(he::PublicKey::deserialize(r, ctx));
    r.expect_end();
    append(f);
    epochs.emplace(cfg.epoch_id, Registration{std::move(cfg), f.payload, std::move(pk)});
    return ack_frame(MsgType::announce);
  }

  Frame helper_batch(const Frame& f) {
    if (is_fetch(f)) {
      const auto epoch = fetch_epoch(f);
      std::lock_guard<std::mutex> lock(mu);
      auto it = helpers.find(epoch);
      if (it == helpers.end()) {
        throw ProtocolError(ErrorCode::not_found, "no helper batch for epoch " + std::to_string(epoch));
      }
      return {MsgType::helper_batch, it->second};
    }
    const auto batch = read_helper_batch(f.payload);
    std::lock_guard<std::mutex> lock(mu);
    const auto it = epochs.find(batch.epoch_id);
    if (it == epochs.end()) {
      throw ProtocolError(ErrorCode::unregistered, "helper batch for unannounced epoch " + std::to_string(batch.epoch_id));
    }
    for (const auto& h : batch.helpers) {
      if (h.code != it->second.cfg.code) throw ProtocolError(ErrorCode::bad_request, "helper code differs from the announcement");
    }
    if (helpers.count(batch.epoch_id)) {
      throw ProtocolError(ErrorCode::conflict, "helper batch for epoch " + std::to_string(batch.epoch_id) + " already stored");
    }
    append(f);
    helpers.emplace(batch.epoch_id, f.payload);
    return ack_frame(MsgType::helper_batch);
  }

  Frame submission(const Frame& f) {
    const auto [epoch, site] = peek_submission(f.payload);
    std::shared_ptr<const he::PublicKey> pk;
    EpochConfig cfg;
    {
      std::lock_guard<std::mutex> lock(mu);
      const auto it = epochs.find(epoch);
      if (it == epochs.end()) {
        throw ProtocolError(ErrorCode::unregistered, "submission for unannounced epoch " + std::to_string(epoch));
      }
      pk = it->second.pk;
      cfg = it->second.cfg;
    }
    EpochSubmission sub;
    try {
      sub = read_submission(f.payload, pk->context());
    } catch (const he::ParamsMismatch& e) {
      throw ProtocolError(ErrorCode::unregistered, std::string("submission parameters are not registered: ") + e.what());
    }
    if (sub.filter.key_id != pk->key_id()) {
      throw ProtocolError(ErrorCode::unregistered, "submission is encrypted under an unannounced key");
    }
    if (sub.filter.m != cfg.bloom_m) throw ProtocolError(ErrorCode::bad_request, "filter length differs from the announcement");
    std::lock_guard<std::mutex> lock(mu);
    const FilterKey key{epoch, site};
    if (filters.count(key)) {
      throw ProtocolError(ErrorCode::conflict, "epoch " + std::to_string(epoch) + " site " + site_name(site) +
                                                   " already submitted");
    }
    append(f);
    filters.emplace(key, std::make_shared<const he::EncryptedBloom>(std::move(sub.filter)));
    return ack_frame(MsgType::submission);
  }

  std::shared_ptr<const he::EncryptedBloom> filter(std::uint64_t epoch, Site site) const {
    const auto it = filters.find({epoch, site});
    if (it == filters.end()) {
      throw ProtocolError(ErrorCode::not_found,
                          "no submission for epoch " + std::to_string(epoch) + " site " + site_name(site));
    }
    return it->second;
  }

  he::Ciphertext released(const he::PublicKey& pk, const he::Ciphertext& ct) {
    std::lock_guard<std::mutex> lock(rng_mu);
    return he::release(pk, ct, rng);
  }

  Frame flow_query(const Frame& f) {
    const auto q = read_flow_query(f.payload);
    std::shared_ptr<const he::EncryptedBloom> a, b;
    std::shared_ptr<const he::PublicKey> pk;
    {
      std::lock_guard<std::mutex> lock(mu);
      const auto& ra = registration(q.epoch_a);
      const auto& rb = registration(q.epoch_b);
      if (ra.cfg.params_digest != rb.cfg.params_digest || ra.pk->key_id() != rb.pk->key_id() ||
          ra.cfg.bloom_m != rb.cfg.bloom_m || ra.cfg.bloom_k != rb.cfg.bloom_k ||
          ra.cfg.bloom_seed != rb.cfg.bloom_seed) {
        throw ProtocolError(ErrorCode::incompatible, "epochs use different keys or filter parameters");
      }
      a = filter(q.epoch_a, Site::A);
      b = filter(q.epoch_b, Site::B);
      pk = ra.pk;
    }
    const auto ct = he::encrypted_intersection_count(pk->context(), *a, *b);
    return to_frame(FlowResponse{q.epoch_a, q.epoch_b, released(*pk, ct)});
  }

  Frame footfall_query(const Frame& f) {
    const auto q = read_footfall_query(f.payload);
    std::shared_ptr<const he::EncryptedBloom> enc;
    std::shared_ptr<const he::PublicKey> pk;
    {
      std::lock_guard<std::mutex> lock(mu);
      pk = registration(q.epoch_id).pk;
      enc = filter(q.epoch_id, q.site);
    }
    const auto ct = he::encrypted_popcount(pk->context(), *enc);
    return to_frame(FootfallResponse{q.epoch_id, q.site, released(*pk, ct)});
  }

  Frame dispatch(const Frame& f) {
    switch (f.type) {
      case MsgType::announce: return announce(f);
      case MsgType::helper_batch: return helper_batch(f);
      case MsgType::submission: return submission(f);
      case MsgType::flow_query: return flow_query(f);
      case MsgType::footfall_query: return footfall_query(f);
      default:
        throw ProtocolError(ErrorCode::bad_request, std::string(msg_type_name(f.type)) + " is not a request");
    }
  }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->rng = options.rng_seed ? make_rng(*options.rng_seed, 0x5e) : entropy_rng();
  if (!options.store) return;
  impl_->store = options.store;
  if (std::filesystem::exists(*options.store)) {
    std::ifstream in(*options.store, std::ios::binary);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    while (pos < bytes.size()) {
      if (bytes.size() - pos < kHeaderSize) throw std::runtime_error("store ends inside a frame header");
      const auto len = payload_length(std::span<const std::uint8_t>(bytes).subspan(pos).first<kHeaderSize>());
      if (bytes.size() - pos - kHeaderSize < len) throw std::runtime_error("store ends inside a frame");
      const auto frame = decode_frame(std::span<const std::uint8_t>(bytes).subspan(pos, kHeaderSize + len));
      impl_->dispatch(frame);
      pos += kHeaderSize + len;
    }
  }
  impl_->log.open(*options.store, std::ios::binary | std::ios::app);
  if (!impl_->log) throw std::runtime_error("cannot open store " + options.store->string());
}

Server::~Server() = default;

Frame Server::handle(const Frame& request) {
  ErrorMsg err;
  try {
    return impl_->dispatch(request);
  } catch (const ProtocolError& e) {
    err = {e.code(), e.what()};
  } catch (const DecodeError& e) {
    err = {ErrorCode::bad_request, e.what()};
  } catch (const he::ParamsMismatch& e) {
    err = {ErrorCode::incompatible, e.what()};
  } catch (const std::invalid_argument& e) {
    err = {ErrorCode::bad_request, e.what()};
  } catch (const std::exception& e) {
    err = {ErrorCode::internal, e.what()};
  }
  return to_frame(err);
}

std::vector<std::uint8_t> Server::handle_bytes(std::span<const std::uint8_t> request) {
  Frame f;
  try {
    f = decode_frame(request);
  } catch (const DecodeError& e) {
    return encode_frame(to_frame(ErrorMsg{ErrorCode::bad_request, e.what()}));
  }
  return encode_frame(handle(f));
}

std::size_t Server::epochs() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->epochs.size();
}

std::size_t Server::submissions() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->filters.size();
}

Frame InProcTransport::exchange(const Frame& request) {
  return decode_frame(server_.handle_bytes(encode_frame(request)));
}

TcpListener::TcpListener(Server& server, const Endpoint& bind) : server_(server) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(bind.port);
  if (const int rc = ::getaddrinfo(bind.host.empty() ? nullptr : bind.host.c_str(), port.c_str(), &hints, &res);
      rc != 0) {
    throw std::runtime_error("cannot resolve " + bind.host + ": " + ::gai_strerror(rc));
  }
  int last_errno = 0;
  for (addrinfo* a = res; a && listen_fd_ < 0; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      listen_fd_ = fd;
    } else {
      last_errno = errno;
      ::close(fd);
    }
  }
  ::freeaddrinfo(res);
  if (listen_fd_ < 0) throw std::system_error(last_errno, std::generic_category(), "listen on " + bind.host + ":" + port);
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                                           : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TcpListener::~TcpListener() {
  stop();
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpListener::serve() {
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      if (stopping_) break;
      throw std::system_error(errno, std::generic_category(), "accept");
    }
    std::lock_guard<std::mutex> lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    connections_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void TcpListener::serve_connection(int fd) {
  try {
    while (auto request = read_frame(fd)) write_frame(fd, server_.handle(*request));
  } catch (const DecodeError& e) {
    try {
      write_frame(fd, to_frame(ErrorMsg{ErrorCode::bad_request, e.what()}));
    } catch (const std::exception&) {
    }
  } catch (const std::exception&) {
  }
  std::lock_guard<std::mutex> lock(mu_);
  std::erase(connections_, fd);
  ::close(fd);
}

void TcpListener::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  std::lock_guard<std::mutex> lock(mu_);
  for (int fd : connections_) ::shutdown(fd, SHUT_RDWR);
}

}  // namespace headcount::protocol
