#pragma once

// NDJSON-over-TCP transport for the controller. Each connection is served by
// its own thread, one request at a time, so responses on a connection come
// back in request order.

#include <simherd/net/socket.hpp>
#include <simherd/server/controller.hpp>

#include <atomic>
#include <condition_variable>
#include <list>
#include <memory>
#include <mutex>
#include <thread>

namespace simherd::server {

class Server {
 public:
  explicit Server(ServerConfig config)
      : controller_(config), listener_(net::Listener::bind_loopback(config.port, config.host)) {
    accept_thread_ = std::thread([this] { accept_loop(); });
  }
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;
  ~Server() {
    request_shutdown();
    stop();
  }

  const net::Endpoint& endpoint() const { return listener_.endpoint(); }
  Controller& controller() { return controller_; }

  void request_shutdown() {
    {
      std::lock_guard lock(mutex_);
      shutdown_requested_ = true;
    }
    cv_.notify_all();
  }

  bool wait_for(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    return cv_.wait_for(lock, timeout, [&] { return shutdown_requested_; });
  }

  // Blocks until a client sends `shutdown` (or request_shutdown is called),
  // then tears everything down.
  void run() {
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [&] { return shutdown_requested_; });
    }
    stop();
  }

  // Refuses new connections, aborts runs, and joins every thread. Idempotent.
  void stop() {
    std::lock_guard stop_lock(stop_mutex_);
    if (stopped_) return;
    stopped_ = true;
    listener_.interrupt();
    if (accept_thread_.joinable()) accept_thread_.join();
    listener_.close();
    std::list<Connection> connections;
    {
      std::lock_guard lock(mutex_);
      connections.swap(connections_);
    }
    for (auto& c : connections) c.fd->shutdown_both();
    controller_.delete_all();
    controller_.permits().close();
    for (auto& c : connections) {
      if (c.thread.joinable()) c.thread.join();
    }
  }

 private:
  struct Connection {
    std::shared_ptr<net::Fd> fd;
    std::shared_ptr<std::atomic<bool>> done;
    std::thread thread;
  };

  void accept_loop() {
    while (auto fd = listener_.accept()) {
      std::lock_guard lock(mutex_);
      reap_finished();
      if (shutdown_requested_) continue;  // dropped; the listener closes shortly
      Connection c{std::make_shared<net::Fd>(std::move(*fd)), std::make_shared<std::atomic<bool>>(false), {}};
      c.thread = std::thread([this, fd = c.fd, done = c.done] {
        serve(*fd);
        done->store(true);
      });
      connections_.push_back(std::move(c));
    }
  }

  void reap_finished() {
    for (auto it = connections_.begin(); it != connections_.end();) {
      if (it->done->load()) {
        it->thread.join();
        it = connections_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void serve(const net::Fd& fd) {
    net::LineReader reader(fd.get());
    while (auto line = reader.next()) {
      if (!line->empty() && line->back() == '\r') line->pop_back();
      if (line->find_first_not_of(" \t") == std::string::npos) continue;
      Json response;
      bool shutdown = false;
      try {
        response = controller_.handle(Json::parse(*line), shutdown);
      } catch (const Json::parse_error& e) {
        response = Controller::malformed(e.what());
      }
      Log::debug("-> " + *line);
      const auto out = response.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n";
      if (!net::write_all(fd.get(), out)) break;
      if (shutdown) {
        request_shutdown();
        break;
      }
    }
  }

  Controller controller_;
  net::Listener listener_;
  std::thread accept_thread_;

  std::mutex mutex_;
  std::condition_variable cv_;
  bool shutdown_requested_ = false;
  std::list<Connection> connections_;

  std::mutex stop_mutex_;
  bool stopped_ = false;
};

}  // namespace simherd::server
