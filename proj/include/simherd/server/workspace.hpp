#pragma once

// One headless workspace on the server: an optional open model, its own
// command thread with a FIFO task queue, and the buffer of its scheduled run.
//
// Ordering: commands from all connections are executed strictly in
// submission order on the command thread. Reporters do not enter the queue;
// they wait until everything submitted before them has finished, except a
// running go/repeat/scheduled loop, which they may observe between ticks.
//
// Locks, outermost first: queue_mutex_, then state_mutex_. results_mutex_
// is taken alone.

#include <simherd/cmdlang/interpreter.hpp>
#include <simherd/cmdlang/parser.hpp>
#include <simherd/engine/registry.hpp>
#include <simherd/log.hpp>
#include <simherd/server/permits.hpp>

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace simherd::server {

enum class RunStatus { none, pending, running, complete, stopped_early, failed };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::none: return "none";
    case RunStatus::pending: return "pending";
    case RunStatus::running: return "running";
    case RunStatus::complete: return "complete";
    case RunStatus::stopped_early: return "stopped-early";
    case RunStatus::failed: return "failed";
  }
  return "unknown";
}

struct ScheduleRequest {
  std::vector<std::string> reporters;
  long start_at_tick = 0;
  long interval_ticks = 1;
  long stop_at_tick = -1;
  std::string go_command = "go";
};

using Row = std::vector<std::string>;

// A row is recorded at tick t iff t >= start, (t - start) % interval == 0 and
// (stop < 0 or t <= stop).
inline bool samples_tick(const ScheduleRequest& s, long tick) {
  return tick >= s.start_at_tick && (tick - s.start_at_tick) % s.interval_ticks == 0 &&
         (s.stop_at_tick < 0 || tick <= s.stop_at_tick);
}

class Workspace {
 public:
  Workspace(std::uint64_t id, CpuPermits& permits) : id_(id), permits_(permits) {
    thread_ = std::thread([this] { command_loop(); });
  }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
  ~Workspace() { close(); }

  std::uint64_t id() const { return id_; }

  void open_model(const std::string& path) {
    run_sync([path](Workspace& ws) {
      auto model = engine::make_model(path);
      std::lock_guard lock(ws.state_mutex_);
      ws.model_ = std::move(model);
    });
  }

  void close_model() {
    run_sync([](Workspace& ws) {
      std::lock_guard lock(ws.state_mutex_);
      ws.model_.reset();
    });
  }

  // Parse errors surface immediately. Commands containing `go` are queued and
  // acknowledged at once; everything else completes before returning.
  void command(const std::string& text) {
    auto parsed = cmdlang::parse_command(text);
    if (std::holds_alternative<cmdlang::Stop>(parsed.node)) stop_generation_.fetch_add(1);
    auto shared = std::make_shared<cmdlang::Command>(std::move(parsed));
    if (cmdlang::is_long_running(*shared)) {
      submit(
          [shared](Workspace& ws, const TaskContext& ctx) {
            std::unique_lock lock(ws.state_mutex_);
            cmdlang::ExecHooks hooks;
            hooks.abort = [&] { return ctx.aborted(); };
            hooks.tick_boundary = [&] { ws.tick_boundary(lock, ctx); };
            cmdlang::execute(ws.model_.get(), *shared, hooks);
          },
          true);
      return;
    }
    run_sync([shared](Workspace& ws) {
      std::lock_guard lock(ws.state_mutex_);
      cmdlang::execute(ws.model_.get(), *shared);
    });
  }

  std::string report(const std::string& text) {
    const auto reporter = cmdlang::parse_reporter(text);
    wait_for_predecessors();
    ReaderGuard reader(*this);
    std::lock_guard lock(state_mutex_);
    return cmdlang::evaluate(model_.get(), reporter);
  }

  void set_params_random() {
    run_sync([](Workspace& ws) {
      std::lock_guard lock(ws.state_mutex_);
      ws.require_model().set_params_random();
    });
  }

  std::vector<engine::ParamSpec> param_specs() {
    std::vector<engine::ParamSpec> specs;
    run_sync([&specs](Workspace& ws) {
      std::lock_guard lock(ws.state_mutex_);
      specs = ws.require_model().param_specs();
    });
    return specs;
  }

  void schedule(ScheduleRequest request) {
    if (request.interval_ticks < 1) throw Error(ErrorKind::invalid_argument, "interval_ticks must be >= 1");
    if (request.start_at_tick < 0) throw Error(ErrorKind::invalid_argument, "start_at_tick must be >= 0");
    auto reporters = std::make_shared<std::vector<cmdlang::Reporter>>();
    for (const auto& r : request.reporters) reporters->push_back(cmdlang::parse_reporter(r));
    auto go = std::make_shared<cmdlang::Command>(cmdlang::parse_command(request.go_command));
    {
      std::lock_guard lock(results_mutex_);
      if (status_ == RunStatus::pending || status_ == RunStatus::running) {
        throw Error(ErrorKind::busy, "workspace " + std::to_string(id_) + " already has a scheduled run");
      }
      status_ = RunStatus::pending;
      buffer_.clear();
      run_error_.clear();
      drained_ = false;
    }
    submit(
        [reporters, go, request = std::move(request)](Workspace& ws, const TaskContext& ctx) {
          ws.run_schedule(request, *reporters, *go, ctx);
        },
        true);
  }

  // Empty until the run has finished; then the whole buffer exactly once.
  std::vector<Row> take_results() {
    std::lock_guard lock(results_mutex_);
    if (drained_) return {};
    switch (status_) {
      case RunStatus::complete:
      case RunStatus::stopped_early:
        drained_ = true;
        return std::exchange(buffer_, {});
      case RunStatus::failed:
        drained_ = true;
        throw Error(ErrorKind::eval, "scheduled run failed: " + run_error_);
      default: return {};
    }
  }

  RunStatus run_status() const {
    std::lock_guard lock(results_mutex_);
    return status_;
  }

  // Aborts in-flight work, fails queued tasks, and joins the command thread.
  void close() {
    {
      std::lock_guard lock(queue_mutex_);
      closing_ = true;
      stop_generation_.fetch_add(1);
    }
    queue_cv_.notify_all();
    permits_.poke();
    {
      std::lock_guard lock(reader_mutex_);
    }
    reader_cv_.notify_all();
    std::lock_guard join_lock(join_mutex_);
    if (thread_.joinable()) thread_.join();
    std::lock_guard lock(results_mutex_);
    if (status_ == RunStatus::pending || status_ == RunStatus::running) status_ = RunStatus::stopped_early;
  }

  bool closing() const {
    std::lock_guard lock(queue_mutex_);
    return closing_;
  }

 private:
  struct TaskContext {
    Workspace& ws;
    std::uint64_t generation;
    PermitLease* lease = nullptr;
    bool aborted() const { return ws.stop_generation_.load() != generation; }
  };

  struct Task {
    std::uint64_t seq = 0;
    bool long_running = false;
    std::uint64_t generation = 0;
    std::function<void(Workspace&, const TaskContext&)> body;
    std::promise<void> done;
  };

  // Marks a pending reporter so the running loop lets it in between ticks.
  struct ReaderGuard {
    Workspace& ws;
    explicit ReaderGuard(Workspace& w) : ws(w) { ws.readers_waiting_.fetch_add(1); }
    ~ReaderGuard() {
      {
        std::lock_guard lock(ws.reader_mutex_);
        ws.readers_waiting_.fetch_sub(1);
      }
      ws.reader_cv_.notify_all();
    }
  };

  std::future<void> submit(std::function<void(Workspace&, const TaskContext&)> body, bool long_running) {
    std::lock_guard lock(queue_mutex_);
    if (closing_) throw Error(ErrorKind::not_found, "workspace " + std::to_string(id_) + " was deleted");
    Task task;
    task.seq = next_seq_++;
    task.long_running = long_running;
    task.generation = stop_generation_.load();
    task.body = std::move(body);
    auto future = task.done.get_future();
    queue_.push_back(std::move(task));
    queue_cv_.notify_all();
    return future;
  }

  template <typename F>
  void run_sync(F&& fn) {
    submit([fn = std::forward<F>(fn)](Workspace& ws, const TaskContext&) { fn(ws); }, false).get();
  }

  void wait_for_predecessors() {
    std::unique_lock lock(queue_mutex_);
    const std::uint64_t before = next_seq_;
    queue_cv_.wait(lock, [&] {
      return closing_ || done_count_ >= before || (running_long_ && done_count_ + 1 == before);
    });
    if (closing_) throw Error(ErrorKind::not_found, "workspace " + std::to_string(id_) + " was deleted");
  }

  engine::Model& require_model() {
    if (!model_) throw Error(ErrorKind::no_model, "no model is open");
    return *model_;
  }

  // Between ticks: let waiting reporters read the state, then give the CPU
  // permit to queued workspaces once our slice is used up.
  void tick_boundary(std::unique_lock<std::mutex>& state_lock, const TaskContext& ctx) {
    if (readers_waiting_.load() > 0) {
      state_lock.unlock();
      {
        std::unique_lock lock(reader_mutex_);
        reader_cv_.wait(lock, [&] { return readers_waiting_.load() == 0 || ctx.aborted(); });
      }
      state_lock.lock();
    }
    if (ctx.lease) {
      state_lock.unlock();
      ctx.lease->maybe_yield();
      state_lock.lock();
    }
  }

  void run_schedule(const ScheduleRequest& request, const std::vector<cmdlang::Reporter>& reporters,
                    const cmdlang::Command& go, const TaskContext& ctx) {
    {
      std::lock_guard lock(results_mutex_);
      if (status_ == RunStatus::pending) status_ = RunStatus::running;
    }
    std::vector<Row> rows;
    RunStatus outcome = RunStatus::complete;
    std::string error;
    try {
      std::unique_lock lock(state_mutex_);
      auto& model = require_model();
      if (!model.is_set_up()) throw Error(ErrorKind::eval, "model has not been set up");

      auto sample = [&] {
        if (!samples_tick(request, model.ticks())) return;
        Row row;
        row.reserve(reporters.size());
        for (const auto& r : reporters) {
          try {
            row.push_back(cmdlang::evaluate(&model, r));
          } catch (const std::exception& e) {
            row.push_back(e.what());
          }
        }
        rows.push_back(std::move(row));
      };

      sample();
      cmdlang::ExecHooks hooks;
      hooks.abort = [&] { return ctx.aborted(); };
      while (true) {
        if (request.stop_at_tick >= 0 && model.ticks() >= request.stop_at_tick) break;
        if (model.should_stop()) break;
        if (ctx.aborted() || (ctx.lease && !ctx.lease->held())) {
          outcome = RunStatus::stopped_early;
          break;
        }
        const long before = model.ticks();
        if (cmdlang::execute(&model, go, hooks) == cmdlang::ExecOutcome::aborted) {
          outcome = RunStatus::stopped_early;
          break;
        }
        if (model.ticks() == before) break;  // the go command made no progress
        sample();
        tick_boundary(lock, ctx);
      }
    } catch (const std::exception& e) {
      outcome = RunStatus::failed;
      error = e.what();
    }
    std::lock_guard lock(results_mutex_);
    status_ = outcome;
    buffer_ = std::move(rows);
    run_error_ = std::move(error);
  }

  void command_loop() {
    for (;;) {
      Task task;
      {
        std::unique_lock lock(queue_mutex_);
        queue_cv_.wait(lock, [&] { return closing_ || !queue_.empty(); });
        if (closing_) break;
        task = std::move(queue_.front());
        queue_.pop_front();
        running_long_ = task.long_running;
      }
      // Reporters may now read alongside a long task.
      if (task.long_running) queue_cv_.notify_all();
      TaskContext ctx{*this, task.generation};
      try {
        if (task.long_running) {
          PermitLease lease(permits_, [&] { return ctx.aborted(); });
          ctx.lease = &lease;
          task.body(*this, ctx);
        } else {
          task.body(*this, ctx);
        }
        task.done.set_value();
      } catch (const std::exception& e) {
        // Queued loops were acknowledged on submission; their failures only reach the log.
        if (task.long_running) Log::warn("workspace " + std::to_string(id_) + ": " + e.what());
        task.done.set_exception(std::current_exception());
      }
      {
        std::lock_guard lock(queue_mutex_);
        ++done_count_;
        running_long_ = false;
      }
      queue_cv_.notify_all();
    }
    // Fail whatever is still queued.
    std::deque<Task> leftover;
    {
      std::lock_guard lock(queue_mutex_);
      leftover.swap(queue_);
    }
    for (auto& task : leftover) {
      task.done.set_exception(std::make_exception_ptr(
          Error(ErrorKind::not_found, "workspace " + std::to_string(id_) + " was deleted")));
    }
    queue_cv_.notify_all();
  }

  const std::uint64_t id_;
  CpuPermits& permits_;

  mutable std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::deque<Task> queue_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t done_count_ = 0;
  bool running_long_ = false;
  bool closing_ = false;
  std::atomic<std::uint64_t> stop_generation_{0};

  std::mutex state_mutex_;
  std::unique_ptr<engine::Model> model_;

  std::mutex reader_mutex_;
  std::condition_variable reader_cv_;
  std::atomic<int> readers_waiting_{0};

  mutable std::mutex results_mutex_;
  RunStatus status_ = RunStatus::none;
  std::vector<Row> buffer_;
  std::string run_error_;
  bool drained_ = false;

  std::mutex join_mutex_;
  std::thread thread_;
};

}  // namespace simherd::server
