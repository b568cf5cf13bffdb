#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "headcount/he/public.hpp"
#include "headcount/protocol/messages.hpp"
#include "headcount/protocol/transport.hpp"

// The server stores what cameras and the client send it and answers flow
// and footfall queries on ciphertexts. Nothing in
// this interface or its state is secret-key material.
namespace headcount::protocol {

struct ServerOptions {
  // Append-only log of accepted frames, replayed on startup.
  std::optional<std::filesystem::path> store;
  // Seeds the release randomness; entropy when unset.
  std::optional<std::uint64_t> rng_seed;
};

class Server {
 public:
  explicit Server(ServerOptions options = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Never throws for a bad request; failures come back as Error frames.
  Frame handle(const Frame& request);
  std::vector<std::uint8_t> handle_bytes(std::span<const std::uint8_t> request);

  std::size_t epochs() const;
  std::size_t submissions() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Calls a Server in the same process through the full wire encoding.
class InProcTransport : public Transport {
 public:
  explicit InProcTransport(Server& server) : server_(server) {}
  Frame exchange(const Frame& request) override;

 private:
  Server& server_;
};

// Accepts TCP connections and serves each on its own thread.
class TcpListener {
 public:
  TcpListener(Server& server, const Endpoint& bind);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  // Blocks until stop().
  void serve();
  void stop();

 private:
  void serve_connection(int fd);

  Server& server_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::mutex mu_;
  std::vector<int> connections_;
  std::vector<std::thread> workers_;
};

}  // namespace headcount::protocol
