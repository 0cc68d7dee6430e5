#pragma once

#include <simherd/net/socket.hpp>
#include <simherd/server/server.hpp>

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <thread>

namespace simherd::testing_support {

// Raw line-level peer for byte-exact transcript checks.
class LineClient {
 public:
  explicit LineClient(const net::Endpoint& ep) : fd_(net::connect_to(ep)), reader_(fd_.get()) {}

  std::string roundtrip(const std::string& line) {
    send(line);
    return receive();
  }
  void send(const std::string& line) { net::write_all(fd_.get(), line + "\n"); }
  std::string receive() {
    auto line = reader_.next();
    return line ? *line : std::string("<eof>");
  }

 private:
  net::Fd fd_;
  net::LineReader reader_;
};

inline std::unique_ptr<server::Server> start_test_server(std::size_t workers = 2, std::size_t max_workspaces = 256) {
  server::ServerConfig config;
  config.port = 0;
  config.workers = workers;
  config.max_workspaces = max_workspaces;
  return std::make_unique<server::Server>(config);
}

// Polls `done` until it holds or the deadline passes.
inline bool eventually(const std::function<bool()>& done, std::chrono::milliseconds limit = std::chrono::seconds(20)) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    if (done()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  return done();
}

}  // namespace simherd::testing_support
