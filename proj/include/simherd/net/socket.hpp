#pragma once

// Thin RAII wrappers over POSIX TCP sockets: a listener, a connected stream
// and a newline-delimited reader.

#include <simherd/error.hpp>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace simherd::net {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Fd& operator=(Fd&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  // Wakes any thread blocked in accept/recv on this descriptor.
  void shutdown_both() const {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

 private:
  int fd_ = -1;
};

inline std::string errno_message(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;
  std::string to_string() const { return host + ":" + std::to_string(port); }
};

// Parses "host:port" (host may be empty, meaning loopback).
inline Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorKind::invalid_argument, "expected host:port, got \"" + std::string(text) + "\"");
  }
  Endpoint ep;
  if (colon > 0) ep.host = std::string(text.substr(0, colon));
  try {
    std::size_t used = 0;
    const std::string port(text.substr(colon + 1));
    ep.port = std::stoi(port, &used);
    if (used != port.size() || ep.port < 0 || ep.port > 65535) throw std::out_of_range("port");
  } catch (const std::exception&) {
    throw Error(ErrorKind::invalid_argument, "bad port in \"" + std::string(text) + "\"");
  }
  return ep;
}

class Listener {
 public:
  // Binds 127.0.0.1:port (0 picks an ephemeral port). Throws on failure.
  static Listener bind_loopback(int port, const std::string& host = "127.0.0.1") {
    Fd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!fd.valid()) throw Error(ErrorKind::invalid_argument, errno_message("socket"));
    int yes = 1;
    ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
      throw Error(ErrorKind::invalid_argument, "bad listen address " + host);
    }
    if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      throw Error(ErrorKind::invalid_argument, errno_message(("bind " + host + ":" + std::to_string(port)).c_str()));
    }
    if (::listen(fd.get(), 128) != 0) throw Error(ErrorKind::invalid_argument, errno_message("listen"));
    socklen_t len = sizeof addr;
    ::getsockname(fd.get(), reinterpret_cast<sockaddr*>(&addr), &len);
    Listener l;
    l.fd_ = std::move(fd);
    l.endpoint_ = {host, ntohs(addr.sin_port)};
    return l;
  }

  // Blocks for the next connection; nullopt once the listener is shut down.
  std::optional<Fd> accept() const {
    for (;;) {
      const int c = ::accept4(fd_.get(), nullptr, nullptr, SOCK_CLOEXEC);
      if (c >= 0) {
        int yes = 1;
        ::setsockopt(c, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
        return Fd(c);
      }
      if (errno == EINTR || errno == ECONNABORTED) continue;
      return std::nullopt;
    }
  }

  void close() {
    fd_.shutdown_both();
    fd_.reset();
  }
  void interrupt() const { fd_.shutdown_both(); }

  const Endpoint& endpoint() const { return endpoint_; }

 private:
  Fd fd_;
  Endpoint endpoint_;
};

inline Fd connect_to(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const auto port = std::to_string(ep.port);
  if (const int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &found); rc != 0) {
    throw Error(ErrorKind::disconnected, "cannot resolve " + ep.host + ": " + ::gai_strerror(rc));
  }
  Fd fd;
  for (auto* ai = found; ai; ai = ai->ai_next) {
    Fd candidate(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!candidate.valid()) continue;
    if (::connect(candidate.get(), ai->ai_addr, ai->ai_addrlen) == 0) {
      fd = std::move(candidate);
      break;
    }
  }
  ::freeaddrinfo(found);
  if (!fd.valid()) throw Error(ErrorKind::disconnected, errno_message(("connect " + ep.to_string()).c_str()));
  int yes = 1;
  ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
  return fd;
}

// Writes the whole buffer; false when the peer is gone.
inline bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

class LineReader {
 public:
  explicit LineReader(int fd, std::size_t max_line = 64 * 1024 * 1024) : fd_(fd), max_line_(max_line) {}

  // Next LF-terminated line without the terminator (a trailing CR is kept).
  // nullopt on EOF, error, or an over-long line.
  std::optional<std::string> next() {
    for (;;) {
      const auto nl = buffer_.find('\n', scanned_);
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        scanned_ = 0;
        return line;
      }
      scanned_ = buffer_.size();
      if (buffer_.size() > max_line_) return std::nullopt;
      char chunk[8192];
      const auto n = ::read(fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return std::nullopt;
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  std::size_t max_line_;
  std::string buffer_;
  std::size_t scanned_ = 0;
};

}  // namespace simherd::net
