#pragma once

// Client side of the wire protocol. A ServerSession owns one connection and
// multiplexes requests over it by id, so it can be shared between threads.
// RemoteWorkspace is a thin handle that forwards each call as one request.

#include <simherd/net/socket.hpp>

#include <nlohmann/json.hpp>

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <cstdlib>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

extern char** environ;

namespace simherd::client {

using Json = nlohmann::ordered_json;
using Row = std::vector<std::string>;

// Rebuilds a typed error from a "<kind>: <detail>" envelope message.
inline Error error_from_envelope(const std::string& message) {
  const auto kind = error_kind_from_message(message);
  const std::string prefix = std::string(to_string(kind)) + ": ";
  if (message.rfind(prefix, 0) == 0) return Error(kind, message.substr(prefix.size()));
  return Error(kind, message);
}

class ServerSession {
 public:
  // Connects to an already running server; this session will not shut it down.
  static std::shared_ptr<ServerSession> connect(const net::Endpoint& endpoint) {
    return std::shared_ptr<ServerSession>(new ServerSession(net::connect_to(endpoint), endpoint, -1));
  }

  // Launches `binary serve --port 0 ...` and connects to the address it prints.
  static std::shared_ptr<ServerSession> spawn(const std::string& binary, const std::vector<std::string>& extra_args = {}) {
    if (::access(binary.c_str(), X_OK) != 0) {
      throw Error(ErrorKind::invalid_argument, "server binary \"" + binary + "\" is not an executable file");
    }
    int pipe_fds[2];
    if (::pipe2(pipe_fds, O_CLOEXEC) != 0) throw Error(ErrorKind::invalid_argument, net::errno_message("pipe"));
    std::vector<std::string> args = {binary, "serve", "--port", "0"};
    args.insert(args.end(), extra_args.begin(), extra_args.end());
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, pipe_fds[1], STDOUT_FILENO);
    pid_t pid = -1;
    const int rc = ::posix_spawn(&pid, binary.c_str(), &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(pipe_fds[1]);
    net::Fd out(pipe_fds[0]);
    if (rc != 0) throw Error(ErrorKind::invalid_argument, "cannot start " + binary + ": " + std::strerror(rc));

    net::LineReader reader(out.get());
    std::optional<std::string> line;
    while ((line = reader.next())) {
      if (line->rfind("listening ", 0) == 0) break;
    }
    if (!line) {
      ::kill(pid, SIGTERM);
      ::waitpid(pid, nullptr, 0);
      throw Error(ErrorKind::disconnected, binary + " exited before it started listening");
    }
    const auto endpoint = net::parse_endpoint(line->substr(std::string("listening ").size()));
    try {
      return std::shared_ptr<ServerSession>(new ServerSession(net::connect_to(endpoint), endpoint, pid));
    } catch (...) {
      ::kill(pid, SIGTERM);
      ::waitpid(pid, nullptr, 0);
      throw;
    }
  }

  ServerSession(const ServerSession&) = delete;
  ServerSession& operator=(const ServerSession&) = delete;
  ~ServerSession() { disconnect(); }

  const net::Endpoint& endpoint() const { return endpoint_; }
  bool owns_server() const { return child_ > 0; }
  pid_t server_pid() const { return child_; }
  bool connected() const { return !closed_.load(); }

  // Sends one request and waits for its response. Error envelopes become
  // simherd::Error with the server's kind.
  Json call(const std::string& op, Json args = Json::object()) {
    std::future<Json> reply;
    {
      std::lock_guard lock(mutex_);
      if (closed_) throw Error(ErrorKind::disconnected, "session to " + endpoint_.to_string() + " is closed");
      const auto id = next_id_++;
      Json request;
      request["id"] = id;
      request["op"] = op;
      request["args"] = std::move(args);
      std::promise<Json> promise;
      reply = promise.get_future();
      pending_.emplace(id, std::move(promise));
      if (!net::write_all(fd_.get(), request.dump() + "\n")) {
        pending_.erase(id);
        throw Error(ErrorKind::disconnected, "lost connection to " + endpoint_.to_string());
      }
    }
    Json response = reply.get();
    if (!response.value("ok", false)) throw error_from_envelope(response.value("error", std::string("unknown error")));
    return response.contains("result") ? response["result"] : Json(nullptr);
  }

  // Shuts the server down if this session launched it, otherwise just
  // disconnects. Every later call fails with a disconnected error.
  void stop_server() {
    if (child_ > 0 && !closed_) {
      try {
        call("shutdown");
      } catch (const Error&) {
      }
    }
    reap_child(std::chrono::seconds(5));
    disconnect();
  }

  void disconnect() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
      fd_.shutdown_both();
    }
    {
      std::lock_guard lock(join_mutex_);
      if (reader_.joinable() && std::this_thread::get_id() != reader_.get_id()) reader_.join();
    }
    // A spawned server nobody shut down must not outlive us.
    reap_child(std::chrono::seconds(0));
  }

 private:
  ServerSession(net::Fd fd, net::Endpoint endpoint, pid_t child)
      : fd_(std::move(fd)), endpoint_(std::move(endpoint)), child_(child) {
    reader_ = std::thread([this] { read_loop(); });
  }

  // Waits up to `grace` for the spawned server to exit, then kills it.
  void reap_child(std::chrono::milliseconds grace) {
    if (child_ <= 0) return;
    const auto deadline = std::chrono::steady_clock::now() + grace;
    while (::waitpid(child_, nullptr, WNOHANG) == 0) {
      if (std::chrono::steady_clock::now() >= deadline) {
        ::kill(child_, SIGKILL);
        ::waitpid(child_, nullptr, 0);
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    child_ = -1;
  }

  void read_loop() {
    net::LineReader reader(fd_.get());
    while (auto line = reader.next()) {
      Json response;
      try {
        response = Json::parse(*line);
      } catch (const Json::parse_error&) {
        continue;
      }
      if (!response.contains("id") || !response["id"].is_number_integer()) continue;
      std::lock_guard lock(mutex_);
      auto it = pending_.find(response["id"].get<std::int64_t>());
      if (it == pending_.end()) continue;
      it->second.set_value(std::move(response));
      pending_.erase(it);
    }
    std::lock_guard lock(mutex_);
    closed_ = true;
    for (auto& [id, promise] : pending_) {
      promise.set_exception(std::make_exception_ptr(
          Error(ErrorKind::disconnected, "connection to " + endpoint_.to_string() + " closed")));
    }
    pending_.clear();
  }

  net::Fd fd_;
  net::Endpoint endpoint_;
  pid_t child_ = -1;
  std::mutex mutex_;
  std::mutex join_mutex_;
  std::atomic<bool> closed_{false};
  std::int64_t next_id_ = 0;
  std::map<std::int64_t, std::promise<Json>> pending_;
  std::thread reader_;
};

// `locator` is either a server binary path or "addr:host:port". The
// SIMHERD_SERVER_ADDR environment variable, when set, wins over both.
inline std::shared_ptr<ServerSession> start_server(const std::string& locator,
                                                   const std::vector<std::string>& extra_args = {}) {
  if (const char* env = std::getenv("SIMHERD_SERVER_ADDR"); env && *env) {
    return ServerSession::connect(net::parse_endpoint(env));
  }
  if (locator.rfind("addr:", 0) == 0) return ServerSession::connect(net::parse_endpoint(locator.substr(5)));
  return ServerSession::spawn(locator, extra_args);
}

inline void stop_server(ServerSession& session) { session.stop_server(); }

class RemoteWorkspace {
 public:
  RemoteWorkspace(std::shared_ptr<ServerSession> session, std::uint64_t id) : session_(std::move(session)), id_(id) {}

  std::uint64_t id() const { return id_; }
  ServerSession& session() const { return *session_; }

  void open_model(const std::string& path) { call("open_model", {{"path", path}}); }
  void close_model() { call("close_model"); }
  void command(const std::string& text) { call("command", {{"text", text}}); }
  std::string report(const std::string& text) { return call("report", {{"text", text}}).get<std::string>(); }
  void set_params_random() { call("set_params_random"); }
  std::vector<std::string> get_param_names() { return call("get_param_names").get<std::vector<std::string>>(); }
  // Raw JSON: numeric widgets give [min, step, max], others a list of choices.
  Json get_param_ranges() { return call("get_param_ranges"); }

  void schedule_reporters_and_run(const std::vector<std::string>& reporters, long start_at_tick = 0,
                                  long interval_ticks = 1, long stop_at_tick = -1,
                                  const std::string& go_command = "go") {
    call("schedule_reporters_and_run", {{"reporters", reporters},
                                        {"start_at_tick", start_at_tick},
                                        {"interval_ticks", interval_ticks},
                                        {"stop_at_tick", stop_at_tick},
                                        {"go_command", go_command}});
  }

  std::vector<Row> get_scheduled_reporter_results() {
    return call("get_scheduled_reporter_results").get<std::vector<Row>>();
  }

 private:
  Json call(const std::string& op, Json args = Json::object()) {
    args["ws"] = id_;
    return session_->call(op, std::move(args));
  }

  std::shared_ptr<ServerSession> session_;
  std::uint64_t id_;
};

// Table 1 style entry point: creates workspaces and remembers the ones it made.
class Client {
 public:
  explicit Client(std::shared_ptr<ServerSession> session) : session_(std::move(session)) {}

  ServerSession& session() { return *session_; }

  std::shared_ptr<RemoteWorkspace> new_workspace() {
    const auto id = session_->call("new_workspace").get<std::uint64_t>();
    auto ws = std::make_shared<RemoteWorkspace>(session_, id);
    std::lock_guard lock(mutex_);
    known_.push_back(ws);
    return ws;
  }

  void delete_workspace(const RemoteWorkspace& ws) {
    session_->call("delete_workspace", {{"ws", ws.id()}});
    forget(ws.id());
  }

  void delete_all() {
    session_->call("delete_all_workspaces");
    std::lock_guard lock(mutex_);
    known_.clear();
  }

  std::vector<std::uint64_t> list_workspaces() { return session_->call("list_workspaces").get<std::vector<std::uint64_t>>(); }

  std::vector<std::shared_ptr<RemoteWorkspace>> get_all() const {
    std::lock_guard lock(mutex_);
    return known_;
  }

 private:
  void forget(std::uint64_t id) {
    std::lock_guard lock(mutex_);
    std::erase_if(known_, [id](const auto& w) { return w->id() == id; });
  }

  std::shared_ptr<ServerSession> session_;
  mutable std::mutex mutex_;
  std::vector<std::shared_ptr<RemoteWorkspace>> known_;
};

}  // namespace simherd::client
