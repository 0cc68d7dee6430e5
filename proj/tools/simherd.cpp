// simherd: run the simulation server, benchmark it, and drive the sensitivity
// and calibration studies. Exit status: 0 ok, 1 runtime failure, 2 usage.

#include <simherd/cli/bench.hpp>
#include <simherd/cli/calibrate.hpp>
#include <simherd/cli/sa.hpp>
#include <simherd/cli/serve.hpp>

#include <CLI11.hpp>

#include <iostream>

using namespace simherd;

int main(int argc, char** argv) {
  CLI::App app{"Headless agent-based simulation server and analysis drivers"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "debug, info, warn, error or off");

  server::ServerConfig serve_config;
  auto* serve = app.add_subcommand("serve", "Run the simulation server");
  serve->add_option("--port", serve_config.port, "TCP port, 0 for an ephemeral one")->capture_default_str();
  serve->add_option("--host", serve_config.host, "Listen address")->capture_default_str();
  serve->add_option("--workers", serve_config.workers, "Simulations running at once")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  serve->add_option("--max-workspaces", serve_config.max_workspaces, "Live workspace limit")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  std::string locator;
  auto add_server_option = [&](CLI::App* sub) {
    sub->add_option("--server", locator, "Server binary to spawn, or addr:HOST:PORT (default: in-process server)");
  };

  cli::BenchOptions bench_options;
  auto* bench = app.add_subcommand("bench", "Time a batch of randomized model runs and append a CSV row");
  bench->add_option("--model", bench_options.model, "fire or wolf-sheep-predation")->capture_default_str();
  bench->add_option("--runs", bench_options.runs)->capture_default_str();
  bench->add_option("--workers", bench_options.workers)->capture_default_str();
  bench->add_option("--ticks", bench_options.ticks)->capture_default_str();
  bench->add_option("--seed", bench_options.seed)->capture_default_str();
  bench->add_option("--out", bench_options.out, "CSV file to append to")->capture_default_str();
  add_server_option(bench);

  cli::SaOptions sa_options;
  bool uniform_base = false;
  auto* sa = app.add_subcommand("sa", "Sobol' sensitivity analysis of Wolf Sheep Predation stability");
  sa->add_option("--sizes", sa_options.sizes, "Base sample sizes N")->delimiter(',')->capture_default_str();
  sa->add_option("--workers", sa_options.workers)->capture_default_str();
  sa->add_option("--ticks", sa_options.ticks)->capture_default_str();
  sa->add_option("--seed", sa_options.seed, "0 for the plain Sobol' sequence")->capture_default_str();
  sa->add_flag("--uniform", uniform_base, "Seeded uniform base points instead of Sobol'");
  sa->add_option("--out-dir", sa_options.out_dir)->capture_default_str();
  add_server_option(sa);

  cli::CalibrateOptions cal_options;
  std::string config_path;
  std::optional<std::size_t> pop, gen, cal_workers;
  std::optional<std::uint64_t> cal_seed;
  std::optional<long> cal_ticks;
  bool strict = false;
  auto* calibrate = app.add_subcommand("calibrate", "Evolutionary calibration for stable coexistence");
  calibrate->add_option("--config", config_path, "JSON config; flags override its values");
  calibrate->add_option("--pop", pop, "Population size");
  calibrate->add_option("--gen", gen, "Generations");
  calibrate->add_option("--workers", cal_workers);
  calibrate->add_option("--seed", cal_seed);
  calibrate->add_option("--ticks", cal_ticks, "Ticks per evaluation (default 500)");
  calibrate->add_flag("--strict-listing-bounds", strict, "Reproduce the published listing's gene bounds literally");
  calibrate->add_option("--out-dir", cal_options.out_dir)->capture_default_str();
  add_server_option(calibrate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Log::set_level(parse_log_level(log_level));
  } catch (const Error& e) {
    std::cerr << "simherd: " << e.what() << '\n';
    return 2;
  }

  try {
    if (serve->parsed()) {
      cli::run_serve(serve_config);
    } else if (bench->parsed()) {
      cli::bench_model(bench_options.model);
      cli::Connection connection(locator, bench_options.workers);
      const auto millis = cli::run_bench(connection.session(), bench_options);
      if (bench_options.runs > 0) std::cout << bench_options.runs << " runs in " << millis << " ms\n";
    } else if (sa->parsed()) {
      if (uniform_base) sa_options.base = analysis::BaseSequence::uniform;
      cli::Connection connection(locator, sa_options.workers);
      const auto runs = cli::run_sa(connection.session(), sa_options);
      std::size_t evaluations = 0;
      for (const auto& r : runs) evaluations += r.evaluations;
      std::cout << evaluations << " evaluations; wrote " << sa_options.out_dir << "/sa_s1.csv and "
                << sa_options.out_dir << "/sa_st_relative.csv\n";
    } else if (calibrate->parsed()) {
      if (!config_path.empty()) cli::load_calibrate_config(cal_options, config_path);
      if (pop) cal_options.ea.population_size = *pop;
      if (gen) cal_options.ea.generations = *gen;
      if (cal_workers) cal_options.workers = *cal_workers;
      if (cal_seed) cal_options.ea.seed = *cal_seed;
      if (cal_ticks) cal_options.ticks = *cal_ticks;
      if (strict) cal_options.ea.strict_listing_bounds = true;
      cli::Connection connection(locator, cal_options.workers);
      const auto result = cli::run_calibrate(connection.session(), cal_options);
      std::cout << "best fitness " << *result.hall_of_fame.front().fitness << "; wrote " << cal_options.out_dir
                << "/calibration_log.csv and " << cal_options.out_dir << "/hall_of_fame.json\n";
    }
  } catch (const cli::UsageError& e) {
    std::cerr << "simherd: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "simherd: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
