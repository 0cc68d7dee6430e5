#pragma once

#include <simherd/cli/common.hpp>
#include <simherd/log.hpp>

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <iostream>
#include <thread>

namespace simherd::cli {

// Runs a server until a client sends `shutdown` or the process gets SIGINT or
// SIGTERM. Call before any other thread exists so every thread inherits the
// blocked signal mask.
inline void run_serve(const server::ServerConfig& config, std::ostream& announce = std::cout) {
  ::signal(SIGPIPE, SIG_IGN);
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  std::unique_ptr<server::Server> server;
  try {
    server = std::make_unique<server::Server>(config);
  } catch (const Error& e) {
    throw UsageError(std::string("cannot listen: ") + e.what());
  }
  announce << "listening " << server->endpoint().to_string() << std::endl;
  Log::info("serving with " + std::to_string(config.workers) + " workers");

  std::atomic<bool> done{false};
  std::thread waiter([&] {
    int sig = 0;
    while (sigwait(&set, &sig) == 0) {
      if (done) return;
      Log::info("signal " + std::to_string(sig) + ", shutting down");
      server->request_shutdown();
      return;
    }
  });
  server->run();
  done = true;
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
}

}  // namespace simherd::cli
