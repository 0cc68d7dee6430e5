#pragma once

// Evolutionary calibration of Wolf Sheep Predation towards a stable
// coexistence, writing the per-generation log and the hall of fame.

#include <simherd/analysis/ea.hpp>
#include <simherd/cli/common.hpp>
#include <simherd/log.hpp>

#include <nlohmann/json.hpp>

#include <optional>
#include <sstream>

namespace simherd::cli {

struct CalibrateOptions {
  analysis::EAConfig ea = desk_defaults();
  long ticks = 500;
  std::size_t workers = 4;
  std::string out_dir = ".";

  static analysis::EAConfig desk_defaults() {
    analysis::EAConfig c;
    c.population_size = 20;
    c.generations = 10;
    c.genes = analysis::wsp_genes();
    return c;
  }
};

namespace detail {

template <typename T>
T config_field(const nlohmann::json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError("config field \"" + key + "\" has the wrong type");
  }
}

inline std::size_t config_count(const nlohmann::json& j, const std::string& key) {
  if (!j.at(key).is_number_integer() || j.at(key).get<long long>() < 0) {
    throw UsageError("config field \"" + key + "\" must be a non-negative integer");
  }
  return j.at(key).get<std::size_t>();
}

}  // namespace detail

// Applies a JSON config on top of `options`. Keys use the EAConfig names plus
// "ticks" and "workers"; unknown keys are rejected.
inline void apply_calibrate_config(CalibrateOptions& options, const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("calibration config must be a JSON object");
  auto& c = options.ea;
  for (const auto& [key, value] : j.items()) {
    if (key == "population_size") {
      c.population_size = detail::config_count(j, key);
    } else if (key == "generations") {
      c.generations = detail::config_count(j, key);
    } else if (key == "tournament_size") {
      c.tournament_size = detail::config_count(j, key);
    } else if (key == "hall_of_fame_size") {
      c.hall_of_fame_size = detail::config_count(j, key);
    } else if (key == "workers") {
      options.workers = detail::config_count(j, key);
    } else if (key == "seed") {
      c.seed = detail::config_count(j, key);
    } else if (key == "ticks") {
      options.ticks = static_cast<long>(detail::config_count(j, key));
    } else if (key == "cxpb" || key == "mutpb" || key == "indpb") {
      if (!value.is_number()) throw UsageError("config field \"" + key + "\" must be a number");
      (key == "cxpb" ? c.cxpb : key == "mutpb" ? c.mutpb : c.indpb) = value.get<double>();
    } else if (key == "strict_listing_bounds") {
      c.strict_listing_bounds = detail::config_field<bool>(j, key);
    } else if (key == "genes") {
      if (!value.is_array()) throw UsageError("config field \"genes\" must be an array");
      c.genes.clear();
      for (const auto& g : value) {
        if (!g.is_object()) throw UsageError("config field \"genes\" entries must be objects");
        for (const char* field : {"name", "min", "step", "max"}) {
          if (!g.contains(field)) throw UsageError(std::string("config field \"genes\" entry lacks \"") + field + "\"");
        }
        c.genes.push_back({detail::config_field<std::string>(g, "name"), detail::config_field<long>(g, "min"),
                           detail::config_field<long>(g, "step"), detail::config_field<long>(g, "max")});
      }
    } else {
      throw UsageError("unknown config field \"" + key + "\"");
    }
  }
}

inline void load_calibrate_config(CalibrateOptions& options, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config " + path + " is not valid JSON: " + e.what());
  }
  apply_calibrate_config(options, j);
}

inline void write_calibration_outputs(const CalibrateOptions& options, const analysis::EAResult& result) {
  const std::filesystem::path dir = options.out_dir;
  auto log = open_output(dir / "calibration_log.csv");
  log << csv_line({"gen", "max", "mean"});
  for (const auto& g : result.log) log << csv_line({std::to_string(g.gen), csv_number(g.max), csv_number(g.mean)});

  nlohmann::ordered_json hof = nlohmann::ordered_json::array();
  for (const auto& ind : result.hall_of_fame) {
    nlohmann::ordered_json genes = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < ind.genes.size(); ++i) genes[options.ea.genes[i].name] = ind.genes[i];
    hof.push_back({{"fitness", *ind.fitness}, {"genes", genes}});
  }
  auto out = open_output(dir / "hall_of_fame.json");
  out << hof.dump(2) << '\n';
}

inline analysis::EAResult run_calibrate(const std::shared_ptr<client::ServerSession>& session,
                                        const CalibrateOptions& options) {
  if (options.workers < 1) throw UsageError("workers must be at least 1");
  if (options.ticks < 1) throw UsageError("ticks must be at least 1");
  const auto known = analysis::wsp_genes();
  for (const auto& g : options.ea.genes) {
    if (std::none_of(known.begin(), known.end(), [&](const auto& k) { return k.name == g.name; })) {
      throw UsageError("gene \"" + g.name + "\" is not a Wolf Sheep Predation slider");
    }
  }
  try {
    options.ea.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  std::vector<std::string> names;
  for (const auto& g : options.ea.genes) names.push_back(g.name);
  const auto evaluate = analysis::wsp_evaluator(session, names, options.workers, options.ticks, options.ea.seed);
  auto result = analysis::ea_calibrate(options.ea, evaluate, [](const analysis::GenerationStats& g) {
    std::ostringstream line;
    line << "gen " << g.gen << " evals " << g.evaluations << " max " << g.max << " mean " << g.mean;
    Log::info(line.str());
  });
  write_calibration_outputs(options, result);
  return result;
}

}  // namespace simherd::cli
