#pragma once

// Runs many scheduled simulations over a server session while keeping a fixed
// number of workspaces busy. Outputs come back in input order no matter which
// run finishes first.

#include <simherd/analysis/stability.hpp>
#include <simherd/client/session.hpp>
#include <simherd/engine/param_spec.hpp>
#include <simherd/prng.hpp>

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace simherd::analysis {

using Row = std::vector<std::string>;
using Rows = std::vector<Row>;

inline const std::string kWolfSheepPath = "models/Wolf Sheep Predation.nlogo";

struct RunSpec {
  std::vector<std::string> commands;  // sent in order, then the schedule starts
  std::vector<std::string> reporters = {"ticks", "count sheep", "count wolves"};
  long start_at_tick = 0;
  long interval_ticks = 1;
  long stop_at_tick = 100;
  std::string go_command = "go";
};

struct BatchOptions {
  std::string model_path = kWolfSheepPath;
  std::size_t workers = 1;
  std::chrono::microseconds poll_interval{500};
  std::function<void(std::size_t done, std::size_t total)> progress;
};

// Raised when a batch cannot finish. `completed` holds the outputs of the
// leading runs that did finish, in input order.
class BatchError : public Error {
 public:
  BatchError(ErrorKind kind, const std::string& detail, std::vector<Rows> completed)
      : Error(kind, detail + " (" + std::to_string(completed.size()) + " leading runs completed)"),
        completed_(std::move(completed)) {}
  const std::vector<Rows>& completed() const { return completed_; }

 private:
  std::vector<Rows> completed_;
};

inline std::vector<Rows> run_batch(const std::shared_ptr<client::ServerSession>& session,
                                   const std::vector<RunSpec>& runs, const BatchOptions& options = {}) {
  if (options.workers < 1) throw Error(ErrorKind::invalid_argument, "workers must be at least 1");
  std::vector<std::optional<Rows>> out(runs.size());
  if (runs.empty()) return {};

  auto prefix = [&] {
    std::vector<Rows> done;
    for (auto& o : out) {
      if (!o) break;
      done.push_back(*o);
    }
    return done;
  };

  std::vector<client::RemoteWorkspace> pool;
  std::vector<long> assigned;
  std::size_t next = 0;
  std::size_t finished = 0;

  auto start = [&](std::size_t k) {
    assigned[k] = -1;
    if (next >= runs.size()) return;
    const auto& run = runs[next];
    auto& ws = pool[k];
    for (const auto& c : run.commands) ws.command(c);
    ws.schedule_reporters_and_run(run.reporters, run.start_at_tick, run.interval_ticks, run.stop_at_tick,
                                  run.go_command);
    assigned[k] = static_cast<long>(next++);
  };

  try {
    const std::size_t size = std::min(options.workers, runs.size());
    for (std::size_t k = 0; k < size; ++k) {
      pool.emplace_back(session, session->call("new_workspace").get<std::uint64_t>());
      pool.back().open_model(options.model_path);
      assigned.push_back(-1);
    }
    for (std::size_t k = 0; k < size; ++k) start(k);
    while (finished < runs.size()) {
      bool progressed = false;
      for (std::size_t k = 0; k < pool.size(); ++k) {
        if (assigned[k] < 0) continue;
        auto rows = pool[k].get_scheduled_reporter_results();
        if (rows.empty()) continue;
        out[static_cast<std::size_t>(assigned[k])] = std::move(rows);
        ++finished;
        progressed = true;
        if (options.progress) options.progress(finished, runs.size());
        start(k);
      }
      if (!progressed) std::this_thread::sleep_for(options.poll_interval);
    }
  } catch (const Error& e) {
    for (auto& ws : pool) {
      try {
        session->call("delete_workspace", {{"ws", ws.id()}});
      } catch (const Error&) {
      }
    }
    throw BatchError(e.kind(), std::string("batch failed: ") + e.what(), prefix());
  }
  for (auto& ws : pool) session->call("delete_workspace", {{"ws", ws.id()}});

  std::vector<Rows> result;
  result.reserve(out.size());
  for (auto& o : out) result.push_back(std::move(*o));
  return result;
}

inline std::vector<double> stability_scores(const std::vector<Rows>& outputs) {
  std::vector<double> scores;
  scores.reserve(outputs.size());
  for (const auto& rows : outputs) scores.push_back(stability_score_rows(rows));
  return scores;
}

// Commands applying one Saltelli row to Wolf Sheep Predation: `random-seed`
// reseeds, other names are sliders; both initial populations are pinned at 100.
inline std::vector<std::string> wsp_sample_commands(const std::vector<std::string>& names,
                                                    const std::vector<double>& values) {
  std::vector<std::string> commands;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == "random-seed") {
      commands.push_back("random-seed " + engine::format_number(std::trunc(values[i])));
    } else {
      commands.push_back("set " + names[i] + " " + engine::format_number(values[i]));
    }
  }
  commands.push_back("set model-version \"sheep-wolves-grass\"");
  commands.push_back("set initial-number-sheep 100");
  commands.push_back("set initial-number-wolves 100");
  commands.push_back("setup");
  return commands;
}

// Commands for one calibration individual; each evaluation gets its own seed.
inline std::vector<std::string> wsp_gene_commands(const std::vector<std::string>& names,
                                                  const std::vector<long>& genes, std::uint64_t seed) {
  std::vector<std::string> commands{"random-seed " + std::to_string(seed % (std::uint64_t{1} << 53))};
  for (std::size_t i = 0; i < names.size(); ++i) {
    commands.push_back("set " + names[i] + " " + std::to_string(genes[i]));
  }
  commands.push_back("set model-version \"sheep-wolves-grass\"");
  commands.push_back("setup");
  return commands;
}

}  // namespace simherd::analysis
