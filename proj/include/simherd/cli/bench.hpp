#pragma once

// Throughput benchmark: `runs` randomized runs of one model over `workers`
// parallel workspaces, appending "Model,runs,simherd,millis" to a CSV.

#include <simherd/analysis/batch.hpp>
#include <simherd/cli/common.hpp>
#include <simherd/engine/registry.hpp>

#include <chrono>

namespace simherd::cli {

struct BenchOptions {
  std::string model = "fire";
  std::size_t runs = 200;
  std::size_t workers = 8;
  long ticks = 100;
  std::string out = "bench.csv";
  std::uint64_t seed = 999;
};

struct BenchModel {
  std::string label;
  std::string path;
};

inline BenchModel bench_model(const std::string& name) {
  const auto key = engine::model_key_from_path(name);
  if (key == engine::FireModel::kKey) return {"Fire", "models/Fire.nlogo"};
  if (key == engine::WolfSheepModel::kKey || key == "wsp" || key == "wolf-sheep") {
    return {"Wolf Sheep Predation", analysis::kWolfSheepPath};
  }
  throw UsageError("unknown model \"" + name + "\" (expected fire or wolf-sheep-predation)");
}

// One run per index: reseed, draw every slider uniformly from its lattice,
// set up, and sample `ticks` for `ticks` ticks.
inline std::vector<analysis::RunSpec> bench_runs(const BenchOptions& options) {
  const auto model = bench_model(options.model);
  const auto prototype = engine::make_model(model.path);
  std::vector<analysis::RunSpec> runs;
  runs.reserve(options.runs);
  for (std::size_t i = 0; i < options.runs; ++i) {
    Prng rng(mix_seed(options.seed, i));
    analysis::RunSpec run;
    run.commands.push_back("random-seed " + std::to_string(rng.next() >> 12));
    for (const auto& spec : prototype->param_specs()) {
      if (spec.kind != engine::ParamKind::numeric) continue;
      run.commands.push_back("set " + spec.name + " " +
                             engine::format_number(spec.lattice_value(rng.uniform_int(spec.lattice_size()))));
    }
    if (model.path == analysis::kWolfSheepPath) run.commands.push_back("set model-version \"sheep-wolves-grass\"");
    run.commands.push_back("setup");
    run.reporters = {"ticks"};
    run.stop_at_tick = options.ticks;
    runs.push_back(std::move(run));
  }
  return runs;
}

// Times create-open-run-drain for the whole batch and appends the CSV row.
// Zero runs is a no-op that leaves the file untouched.
inline long long run_bench(const std::shared_ptr<client::ServerSession>& session, const BenchOptions& options) {
  if (options.workers < 1) throw UsageError("--workers must be at least 1");
  if (options.ticks < 0) throw UsageError("--ticks must be non-negative");
  const auto model = bench_model(options.model);
  if (options.runs == 0) return 0;
  const auto runs = bench_runs(options);

  analysis::BatchOptions batch;
  batch.model_path = model.path;
  batch.workers = options.workers;
  const auto start = std::chrono::steady_clock::now();
  analysis::run_batch(session, runs, batch);
  const auto millis =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();

  auto out = open_output(options.out, std::ios::app);
  out << csv_line({model.label, std::to_string(options.runs), "simherd", std::to_string(millis)});
  return millis;
}

}  // namespace simherd::cli
