#include "headcount/protocol/transport.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <system_error>

namespace headcount::protocol {
namespace {

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw std::system_error(errno, std::generic_category(), "send");
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

// Returns the number of bytes read before end of stream.
std::size_t read_exact(int fd, std::uint8_t* data, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, data + got, n - got, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw std::system_error(errno, std::generic_category(), "recv");
    }
    if (r == 0) break;
    got += static_cast<std::size_t>(r);
  }
  return got;
}

}  // namespace

Frame call(Transport& t, const Frame& request, MsgType expected) {
  Frame response = t.exchange(request);
  if (response.type == MsgType::error) {
    const auto err = read_error(response.payload);
    throw ProtocolError(err.code, err.message);
  }
  if (response.type != expected) {
    throw DecodeError(std::string("expected ") + msg_type_name(expected) + ", got " + msg_type_name(response.type));
  }
  return response;
}

Endpoint Endpoint::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("endpoint must be host:port, got '" + text + "'");
  Endpoint e;
  if (colon > 0) e.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  std::size_t used = 0;
  unsigned long value = 0;
  try {
    value = std::stoul(port, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (port.empty() || used != port.size() || value > 65535) {
    throw std::invalid_argument("bad port in endpoint '" + text + "'");
  }
  e.port = static_cast<std::uint16_t>(value);
  return e;
}

void write_frame(int fd, const Frame& f) {
  const auto bytes = encode_frame(f);
  write_all(fd, bytes.data(), bytes.size());
}

std::optional<Frame> read_frame(int fd) {
  std::array<std::uint8_t, kHeaderSize> header{};
  const auto got = read_exact(fd, header.data(), header.size());
  if (got == 0) return std::nullopt;
  if (got < header.size()) throw DecodeError("connection closed inside a frame header");
  const auto len = payload_length(header);
  Frame f;
  f.type = static_cast<MsgType>(header[5]);
  f.payload.resize(len);
  if (read_exact(fd, f.payload.data(), len) != len) throw DecodeError("connection closed inside a frame payload");
  return f;
}

TcpTransport::TcpTransport(Endpoint server) : server_(std::move(server)) {}

TcpTransport::~TcpTransport() { close(); }

void TcpTransport::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void TcpTransport::connect() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(server_.port);
  if (const int rc = ::getaddrinfo(server_.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw std::runtime_error("cannot resolve " + server_.host + ": " + ::gai_strerror(rc));
  }
  int last_errno = 0;
  for (addrinfo* a = res; a; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      fd_ = fd;
      break;
    }
    last_errno = errno;
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) {
    throw std::system_error(last_errno, std::generic_category(),
                            "connect to " + server_.host + ":" + port);
  }
}

Frame TcpTransport::exchange(const Frame& request) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (fd_ < 0) connect();
    try {
      write_frame(fd_, request);
      if (auto response = read_frame(fd_)) return std::move(*response);
    } catch (const std::system_error&) {
      if (attempt == 1) throw;
    }
    close();
  }
  throw std::runtime_error("server closed the connection");
}

Frame RecordingTransport::exchange(const Frame& request) {
  sent.push_back(encode_frame(request));
  Frame response = inner_.exchange(request);
  received.push_back(encode_frame(response));
  return response;
}

}  // namespace headcount::protocol
