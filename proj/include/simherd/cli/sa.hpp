#pragma once

// Sobol' sensitivity study of Wolf Sheep Predation stability: for each sample
// size, Saltelli rows -> scheduled runs -> stability scores -> indices.

#include <simherd/analysis/batch.hpp>
#include <simherd/analysis/saltelli.hpp>
#include <simherd/cli/common.hpp>
#include <simherd/log.hpp>

#include <algorithm>

namespace simherd::cli {

struct SaOptions {
  std::vector<std::size_t> sizes = {8, 16, 32};
  std::size_t workers = 4;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  long ticks = 100;
  analysis::BaseSequence base = analysis::BaseSequence::sobol;
};

struct SaRun {
  std::size_t sample_size = 0;
  std::size_t evaluations = 0;
  analysis::SensitivityResult result;
};

// Problem read from the model itself: a random-seed variable plus every slider
// except the two initial populations, bounded by [min, max] of its range.
inline analysis::SobolProblem wsp_problem(client::RemoteWorkspace& ws) {
  analysis::SobolProblem problem{{"random-seed"}, {{1, 100000}}};
  auto names = ws.get_param_names();
  const auto ranges = ws.get_param_ranges();
  if (names.size() < 2 || ranges.size() != names.size()) {
    throw Error(ErrorKind::invalid_argument, "unexpected parameter listing from the server");
  }
  // The last two widgets (model-version chooser, show-energy? toggle) are not numeric.
  for (std::size_t i = 0; i + 2 < names.size(); ++i) {
    problem.names.push_back(names[i]);
    problem.bounds.push_back({ranges[i][0].get<double>(), ranges[i][2].get<double>()});
  }
  for (const char* fixed : {"initial-number-wolves", "initial-number-sheep"}) {
    const auto it = std::find(problem.names.begin(), problem.names.end(), fixed);
    if (it == problem.names.end()) continue;
    problem.bounds.erase(problem.bounds.begin() + (it - problem.names.begin()));
    problem.names.erase(it);
  }
  return problem;
}

inline analysis::SobolProblem fetch_wsp_problem(const std::shared_ptr<client::ServerSession>& session) {
  client::RemoteWorkspace ws(session, session->call("new_workspace").get<std::uint64_t>());
  try {
    ws.open_model(analysis::kWolfSheepPath);
    auto problem = wsp_problem(ws);
    session->call("delete_workspace", {{"ws", ws.id()}});
    return problem;
  } catch (...) {
    session->call("delete_workspace", {{"ws", ws.id()}});
    throw;
  }
}

inline SaRun run_sa_size(const std::shared_ptr<client::ServerSession>& session, const analysis::SobolProblem& problem,
                         std::size_t n, const SaOptions& options) {
  const auto rows = analysis::saltelli_sample(problem, n, options.seed, options.base);
  std::vector<analysis::RunSpec> runs;
  runs.reserve(rows.size());
  for (const auto& row : rows) {
    analysis::RunSpec run;
    run.commands = analysis::wsp_sample_commands(problem.names, row);
    run.stop_at_tick = options.ticks;
    runs.push_back(std::move(run));
  }
  analysis::BatchOptions batch;
  batch.workers = options.workers;
  const auto scores = analysis::stability_scores(analysis::run_batch(session, runs, batch));
  return {n, scores.size(), analysis::sobol_analyze(problem, scores)};
}

inline void write_sa_csvs(const analysis::SobolProblem& problem, const std::vector<SaRun>& runs,
                          const std::filesystem::path& dir) {
  auto s1 = open_output(dir / "sa_s1.csv");
  auto st = open_output(dir / "sa_st_relative.csv");
  std::vector<std::string> header{"sample_size"};
  header.insert(header.end(), problem.names.begin(), problem.names.end());
  st << csv_line(header);
  header.push_back("interactions");
  s1 << csv_line(header);
  for (const auto& run : runs) {
    std::vector<std::string> a{std::to_string(run.sample_size)}, b = a;
    for (double v : run.result.s1_with_interactions) a.push_back(csv_number(v));
    for (double v : run.result.st_relative) b.push_back(csv_number(v));
    s1 << csv_line(a);
    st << csv_line(b);
  }
}

inline std::vector<SaRun> run_sa(const std::shared_ptr<client::ServerSession>& session, const SaOptions& options) {
  if (options.sizes.empty()) throw UsageError("--sizes needs at least one sample size");
  for (auto n : options.sizes) {
    if (n < 1) throw UsageError("--sizes entries must be at least 1");
  }
  if (options.workers < 1) throw UsageError("--workers must be at least 1");
  const auto problem = fetch_wsp_problem(session);
  std::vector<SaRun> runs;
  for (auto n : options.sizes) {
    runs.push_back(run_sa_size(session, problem, n, options));
    Log::info("sample size " + std::to_string(n) + ": " + std::to_string(runs.back().evaluations) + " evaluations");
  }
  write_sa_csvs(problem, runs, options.out_dir);
  return runs;
}

}  // namespace simherd::cli
