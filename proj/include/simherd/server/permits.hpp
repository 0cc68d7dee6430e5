#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <vector>

namespace simherd::server {

/// Counting semaphore with FIFO hand-off. Bounds how many workspaces advance
/// their models at once (the server's worker count).
class CpuPermits {
 public:
  explicit CpuPermits(std::size_t permits) : available_(permits == 0 ? 1 : permits), total_(available_) {}

  // Waits for a permit in arrival order. Returns false, without a permit, when
  // `cancelled` becomes true or the pool is closed.
  bool acquire(const std::function<bool()>& cancelled = {}) {
    std::unique_lock lock(mutex_);
    const std::uint64_t ticket = next_ticket_++;
    cv_.wait(lock, [&] {
      return closed_ || (cancelled && cancelled()) || (ticket == head_ && available_ > 0);
    });
    if (ticket == head_ && available_ > 0 && !closed_ && !(cancelled && cancelled())) {
      ++head_;
      skip_abandoned();
      --available_;
      cv_.notify_all();
      return true;
    }
    // Give up our place in line; skip past it if it is at the head.
    abandoned_.push_back(ticket);
    skip_abandoned();
    cv_.notify_all();
    return false;
  }

  void release() {
    std::lock_guard lock(mutex_);
    ++available_;
    cv_.notify_all();
  }

  bool contended() const {
    std::lock_guard lock(mutex_);
    return next_ticket_ - head_ > abandoned_.size();
  }

  // Re-evaluates cancellation predicates of blocked acquirers.
  void poke() {
    std::lock_guard lock(mutex_);
    cv_.notify_all();
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    cv_.notify_all();
  }

  std::size_t total() const { return total_; }

 private:
  void skip_abandoned() {
    bool progressed = true;
    while (progressed) {
      progressed = false;
      for (auto it = abandoned_.begin(); it != abandoned_.end(); ++it) {
        if (*it == head_) {
          ++head_;
          abandoned_.erase(it);
          progressed = true;
          break;
        }
      }
    }
  }

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t available_;
  std::size_t total_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t head_ = 0;
  std::vector<std::uint64_t> abandoned_;
  bool closed_ = false;
};

/// A held permit that is handed back to waiters after each time slice.
class PermitLease {
 public:
  static constexpr auto kSlice = std::chrono::milliseconds(5);

  PermitLease(CpuPermits& permits, std::function<bool()> cancelled)
      : permits_(permits), cancelled_(std::move(cancelled)) {
    held_ = permits_.acquire(cancelled_);
    since_ = std::chrono::steady_clock::now();
  }
  PermitLease(const PermitLease&) = delete;
  PermitLease& operator=(const PermitLease&) = delete;
  ~PermitLease() {
    if (held_) permits_.release();
  }

  bool held() const { return held_; }

  // Called between ticks: yields to queued workspaces once the slice is used.
  void maybe_yield() {
    if (!held_) return;
    const auto now = std::chrono::steady_clock::now();
    if (now - since_ < kSlice || !permits_.contended()) return;
    permits_.release();
    held_ = permits_.acquire(cancelled_);
    since_ = std::chrono::steady_clock::now();
  }

 private:
  CpuPermits& permits_;
  std::function<bool()> cancelled_;
  bool held_ = false;
  std::chrono::steady_clock::time_point since_;
};

}  // namespace simherd::server
