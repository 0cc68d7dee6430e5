#pragma once

// Pieces shared by the operator subcommands: usage errors, CSV formatting and
// getting hold of a server session.

#include <simherd/client/session.hpp>
#include <simherd/server/server.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace simherd::cli {

// Bad flags or config: the driver maps this to exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal that parses back to the same double.
inline std::string csv_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string csv_line(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    const auto& c = cells[i];
    if (c.find_first_of(",\"\n") == std::string::npos) {
      line += c;
      continue;
    }
    line += '"';
    for (char ch : c) {
      if (ch == '"') line += '"';
      line += ch;
    }
    line += '"';
  }
  return line + '\n';
}

inline std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::trunc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw Error(ErrorKind::invalid_argument, "cannot write " + path.string());
  return out;
}

// A session to an external server (locator or SIMHERD_SERVER_ADDR), or to a
// server embedded in this process when neither is given.
class Connection {
 public:
  Connection(const std::string& locator, std::size_t workers) {
    const char* env = std::getenv("SIMHERD_SERVER_ADDR");
    if (!locator.empty() || (env && *env)) {
      session_ = client::start_server(locator, {"--workers", std::to_string(workers)});
      return;
    }
    server::ServerConfig config;
    config.port = 0;
    config.workers = workers;
    embedded_ = std::make_unique<server::Server>(config);
    session_ = client::ServerSession::connect(embedded_->endpoint());
  }
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  ~Connection() {
    try {
      session_->stop_server();
    } catch (const Error&) {
    }
    embedded_.reset();
  }

  const std::shared_ptr<client::ServerSession>& session() const { return session_; }

 private:
  std::unique_ptr<server::Server> embedded_;
  std::shared_ptr<client::ServerSession> session_;
};

}  // namespace simherd::cli
