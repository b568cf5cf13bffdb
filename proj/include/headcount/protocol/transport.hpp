#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "headcount/protocol/messages.hpp"

namespace headcount::protocol {

// Request/response exchange of whole frames.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual Frame exchange(const Frame& request) = 0;
};

// Sends request and returns the response; an Error frame becomes a
// ProtocolError and any type other than `expected` a DecodeError.
Frame call(Transport& t, const Frame& request, MsgType expected);

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  // "host:port" or ":port".
  static Endpoint parse(const std::string& text);
};

// One persistent connection; reconnects once if the server closed it.
class TcpTransport : public Transport {
 public:
  explicit TcpTransport(Endpoint server);
  ~TcpTransport() override;
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  Frame exchange(const Frame& request) override;

 private:
  void connect();
  void close();

  Endpoint server_;
  int fd_ = -1;
};

// Forwards to another transport and keeps the encoded bytes of every frame.
class RecordingTransport : public Transport {
 public:
  explicit RecordingTransport(Transport& inner) : inner_(inner) {}
  Frame exchange(const Frame& request) override;

  std::vector<std::vector<std::uint8_t>> sent;
  std::vector<std::vector<std::uint8_t>> received;

 private:
  Transport& inner_;
};

// Blocking frame I/O on a connected stream socket. read_frame returns nullopt
// on a clean end of stream before any header byte.
void write_frame(int fd, const Frame& f);
std::optional<Frame> read_frame(int fd);

}  // namespace headcount::protocol
