#include "test_support.hpp"

#include <simherd/analysis/batch.hpp>
#include <simherd/analysis/saltelli.hpp>
#include <simherd/cli/sa.hpp>
#include <simherd/client/session.hpp>

#include <gtest/gtest.h>

#include <dirent.h>
#include <signal.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <set>

using namespace simherd;
using namespace simherd::client;
using simherd::testing_support::start_test_server;

namespace {

std::string addr(const server::Server& s) { return "addr:" + s.endpoint().to_string(); }

// Live (non-zombie) children of this process, read from /proc.
std::size_t live_children() {
  std::size_t n = 0;
  DIR* dir = ::opendir("/proc");
  if (!dir) return 0;
  while (auto* entry = ::readdir(dir)) {
    std::ifstream stat(std::string("/proc/") + entry->d_name + "/stat");
    std::string line;
    if (!stat || !std::getline(stat, line)) continue;
    const auto close = line.rfind(')');
    if (close == std::string::npos) continue;
    std::istringstream rest(line.substr(close + 2));
    char state = 0;
    long ppid = 0;
    rest >> state >> ppid;
    if (ppid == ::getpid() && state != 'Z') ++n;
  }
  ::closedir(dir);
  return n;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::invalid_argument;
}

}  // namespace

TEST(ClientSession, ConnectsToRunningServerWithoutSpawning) {
  auto server = start_test_server();
  auto session = start_server(addr(*server));
  EXPECT_FALSE(session->owns_server());
  EXPECT_EQ(session->call("new_workspace"), 0);
  stop_server(*session);
  // Not ours, so it must still be up.
  auto again = start_server(addr(*server));
  EXPECT_EQ(again->call("list_workspaces"), Json::array({0}));
}

TEST(ClientSession, SpawnsAndStopsTheServerBinary) {
  const auto before = live_children();
  auto session = start_server(SIMHERD_BINARY, {"--workers", "2"});
  ASSERT_TRUE(session->owns_server());
  const pid_t pid = session->server_pid();
  EXPECT_EQ(session->call("new_workspace"), 0);
  stop_server(*session);
  EXPECT_NE(::kill(pid, 0), 0);
  EXPECT_EQ(live_children(), before);
}

TEST(ClientSession, StartStopCyclesLeakNoProcess) {
  const auto before = live_children();
  for (int i = 0; i < 5; ++i) {
    auto session = start_server(SIMHERD_BINARY);
    session->call("new_workspace");
    stop_server(*session);
  }
  EXPECT_EQ(live_children(), before);
}

TEST(ClientSession, DroppingASpawnedSessionReapsTheChild) {
  const auto before = live_children();
  { auto session = start_server(SIMHERD_BINARY); }
  EXPECT_EQ(live_children(), before);
}

TEST(ClientSession, BadBinaryPathIsAnError) {
  EXPECT_THROW(start_server("/nonexistent/simherd"), Error);
  EXPECT_THROW(start_server("addr:no-port-here"), Error);
}

TEST(ClientSession, EnvironmentAddressWins) {
  auto server = start_test_server();
  ::setenv("SIMHERD_SERVER_ADDR", server->endpoint().to_string().c_str(), 1);
  std::shared_ptr<ServerSession> session;
  EXPECT_NO_THROW(session = start_server("/nonexistent/simherd"));
  ::unsetenv("SIMHERD_SERVER_ADDR");
  ASSERT_TRUE(session);
  EXPECT_FALSE(session->owns_server());
}

TEST(ClientSession, CallsFailFastAfterStop) {
  auto server = start_test_server();
  auto session = start_server(addr(*server));
  stop_server(*session);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(kind_of([&] { session->call("list_workspaces"); }), ErrorKind::disconnected);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(100));
}

TEST(ClientSession, ServerLossFailsPendingCalls) {
  auto server = start_test_server();
  auto session = start_server(addr(*server));
  server.reset();
  EXPECT_EQ(kind_of([&] { session->call("list_workspaces"); }), ErrorKind::disconnected);
}

TEST(ClientSession, SharedSessionMultiplexesThreads) {
  auto server = start_test_server(4);
  auto session = start_server(addr(*server));
  std::vector<std::thread> threads;
  std::vector<std::string> seen(8);
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      RemoteWorkspace ws(session, session->call("new_workspace").get<std::uint64_t>());
      ws.open_model("Fire.nlogo");
      ws.command("set density " + std::to_string(10 + t));
      for (int k = 0; k < 20; ++k) seen[t] = ws.report("density");
    });
  }
  for (auto& th : threads) th.join();
  for (int t = 0; t < 8; ++t) EXPECT_EQ(seen[t], std::to_string(10 + t));
}

TEST(ClientApi, RegistryTracksCreatedWorkspaces) {
  auto server = start_test_server();
  Client client(start_server(addr(*server)));
  auto a = client.new_workspace();
  auto b = client.new_workspace();
  auto c = client.new_workspace();
  client.delete_workspace(*b);
  std::set<std::uint64_t> ids;
  for (const auto& ws : client.get_all()) ids.insert(ws->id());
  EXPECT_EQ(ids, (std::set<std::uint64_t>{a->id(), c->id()}));
  EXPECT_EQ(client.list_workspaces(), (std::vector<std::uint64_t>{a->id(), c->id()}));
  client.delete_all();
  EXPECT_TRUE(client.get_all().empty());
  EXPECT_TRUE(client.list_workspaces().empty());
}

TEST(ClientApi, ServerErrorsBecomeTypedErrors) {
  auto server = start_test_server();
  auto session = start_server(addr(*server));
  Client client(session);
  auto ws = client.new_workspace();
  EXPECT_EQ(kind_of([&] { ws->command("setup"); }), ErrorKind::no_model);
  EXPECT_EQ(kind_of([&] { ws->open_model("Nope.nlogo"); }), ErrorKind::not_found);
  ws->open_model("Wolf Sheep Predation.nlogo");
  EXPECT_EQ(kind_of([&] { ws->command("ask turtles [die]"); }), ErrorKind::parse);
  EXPECT_EQ(kind_of([&] { ws->command("set initial-number-sheep 999"); }), ErrorKind::range);
  EXPECT_EQ(kind_of([&] { RemoteWorkspace(session, 99).report("ticks"); }),
            ErrorKind::not_found);
  EXPECT_EQ(ws->report("initial-number-sheep"), "100");
}

TEST(ClientApi, DefaultScheduleRunsUntilTheModelStops) {
  auto server = start_test_server();
  Client client(start_server(addr(*server)));
  auto ws = client.new_workspace();
  ws->open_model("Fire.nlogo");
  ws->command("random-seed 3");
  ws->command("set density 30");
  ws->command("setup");
  ws->schedule_reporters_and_run({"ticks", "burned-trees"});
  std::vector<Row> rows;
  ASSERT_TRUE(testing_support::eventually([&] {
    rows = ws->get_scheduled_reporter_results();
    return !rows.empty();
  }));
  EXPECT_EQ(rows.front().front(), "0");
  EXPECT_EQ(ws->report("not any? turtles"), "true");
}

// The published Fire timing script, line for line: 200 workspaces each
// running the listing, polled with report until done.
TEST(ClientScripts, FireComparisonScript) {
  auto server = start_test_server(4);
  Client client(start_server(addr(*server)));
  std::vector<std::shared_ptr<RemoteWorkspace>> workspaces;
  const int model_runs = 200;
  for (int i = 0; i < model_runs; ++i) {
    auto n = client.new_workspace();
    n->open_model("./Fire.nlogo");
    n->command("set density random 99");
    n->command("setup");
    n->command("repeat 100 [go]");
    workspaces.push_back(n);
  }
  int finished = 0;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(60);
  while (!workspaces.empty() && std::chrono::steady_clock::now() < deadline) {
    for (auto it = workspaces.begin(); it != workspaces.end();) {
      const long ticks = std::lround(std::stod((*it)->report("ticks")));
      const auto stop = (*it)->report("not any? turtles");
      if (ticks == 100 || stop == "true") {
        EXPECT_GE(std::stol((*it)->report("burned-trees")), 0);
        ++finished;
        it = workspaces.erase(it);
      } else {
        ++it;
      }
    }
  }
  EXPECT_EQ(finished, model_runs);
  client.delete_all();
}

// Problem construction from the SA driver: names minus the last two widgets
// and the initial populations, bounds from [min, max] of each range.
TEST(ClientScripts, SensitivityProblemFromParamListing) {
  auto server = start_test_server();
  auto session = start_server(addr(*server));
  RemoteWorkspace ws(session, session->call("new_workspace").get<std::uint64_t>());
  ws.open_model("Wolf Sheep Predation.nlogo");
  const auto problem = cli::wsp_problem(ws);
  EXPECT_EQ(problem.num_vars(), 6u);
  EXPECT_EQ(problem.names,
            (std::vector<std::string>{"random-seed", "sheep-gain-from-food", "sheep-reproduce", "wolf-gain-from-food",
                                      "wolf-reproduce", "grass-regrowth-time"}));
  const std::vector<std::pair<double, double>> bounds{{1, 100000}, {0, 50}, {1, 20}, {0, 100}, {0, 20}, {0, 100}};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(problem.bounds[i].lo, bounds[i].first) << problem.names[i];
    EXPECT_EQ(problem.bounds[i].hi, bounds[i].second) << problem.names[i];
  }
}

// ---------------------------------------------------------------- batches

namespace {

std::vector<analysis::RunSpec> sa_runs(std::size_t n, long ticks) {
  const analysis::SobolProblem problem{
      {"random-seed", "sheep-gain-from-food", "sheep-reproduce", "wolf-gain-from-food", "wolf-reproduce",
       "grass-regrowth-time"},
      {{1, 100000}, {0, 50}, {1, 20}, {0, 100}, {0, 20}, {0, 100}}};
  std::vector<analysis::RunSpec> runs;
  for (const auto& row : analysis::saltelli_sample(problem, n)) {
    analysis::RunSpec run;
    run.commands = analysis::wsp_sample_commands(problem.names, row);
    run.stop_at_tick = ticks;
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace

TEST(Batch, EmptyInputGivesEmptyOutput) {
  auto server = start_test_server();
  auto session = start_server(addr(*server));
  EXPECT_TRUE(analysis::run_batch(session, {}).empty());
}

TEST(Batch, OutputsDoNotDependOnWorkerCount) {
  auto server = start_test_server(8);
  auto session = start_server(addr(*server));
  const auto runs = sa_runs(3, 60);
  analysis::BatchOptions one, eight;
  eight.workers = 8;
  const auto a = analysis::run_batch(session, runs, one);
  const auto b = analysis::run_batch(session, runs, eight);
  ASSERT_EQ(a.size(), runs.size());
  EXPECT_EQ(a, b);
  EXPECT_TRUE(session->call("list_workspaces").empty());
}

TEST(Batch, SixVariablesTenBasePointsGiveBoundedScores) {
  auto server = start_test_server(4);
  auto session = start_server(addr(*server));
  analysis::BatchOptions options;
  options.workers = 4;
  std::size_t progress_calls = 0;
  options.progress = [&](std::size_t done, std::size_t total) {
    ++progress_calls;
    EXPECT_LE(done, total);
  };
  const auto scores = analysis::stability_scores(analysis::run_batch(session, sa_runs(10, 100), options));
  ASSERT_EQ(scores.size(), 140u);
  EXPECT_EQ(progress_calls, 140u);
  for (double s : scores) {
    EXPECT_TRUE(std::isfinite(s));
    EXPECT_GE(s, 0);
    EXPECT_LE(s, 1e6);
  }
}

TEST(Batch, ServerLossReportsCompletedPrefix) {
  auto server = start_test_server(2);
  auto session = start_server(addr(*server));
  analysis::BatchOptions options;
  options.progress = [&](std::size_t done, std::size_t) {
    if (done == 3) server->stop();
  };
  try {
    analysis::run_batch(session, sa_runs(2, 20), options);
    FAIL() << "expected a batch error";
  } catch (const analysis::BatchError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::disconnected);
    EXPECT_EQ(e.completed().size(), 3u);
    EXPECT_NE(std::string(e.what()).find("3 leading runs completed"), std::string::npos);
  }
}

TEST(Batch, BadRunSurfacesAsBatchError) {
  auto server = start_test_server();
  auto session = start_server(addr(*server));
  auto runs = sa_runs(1, 10);
  runs[2].commands.insert(runs[2].commands.begin(), "set no-such-slider 3");
  try {
    analysis::run_batch(session, runs);
    FAIL() << "expected a batch error";
  } catch (const analysis::BatchError& e) {
    EXPECT_EQ(e.completed().size(), 2u);
  }
  EXPECT_TRUE(session->call("list_workspaces").empty());
}
