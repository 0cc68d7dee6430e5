#pragma once

// Workspace registry plus the JSON operation table shared by every
// connection. Transport lives in server.hpp.

#include <simherd/server/workspace.hpp>

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

namespace simherd::server {

using Json = nlohmann::ordered_json;

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8923;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::size_t max_workspaces = 256;
};

class Controller {
 public:
  explicit Controller(const ServerConfig& config) : config_(config), permits_(config.workers) {}
  ~Controller() { delete_all(); }

  std::uint64_t new_workspace() {
    std::unique_lock lock(registry_mutex_);
    if (workspaces_.size() >= config_.max_workspaces) {
      throw Error(ErrorKind::capacity, "workspace limit " + std::to_string(config_.max_workspaces) + " reached");
    }
    const auto id = next_id_++;
    workspaces_.emplace(id, std::make_shared<Workspace>(id, permits_));
    return id;
  }

  void delete_workspace(std::uint64_t id) {
    std::shared_ptr<Workspace> ws;
    {
      std::unique_lock lock(registry_mutex_);
      auto it = workspaces_.find(id);
      if (it == workspaces_.end()) throw not_found(id);
      ws = std::move(it->second);
      workspaces_.erase(it);
    }
    ws->close();
  }

  void delete_all() {
    std::map<std::uint64_t, std::shared_ptr<Workspace>> doomed;
    {
      std::unique_lock lock(registry_mutex_);
      doomed.swap(workspaces_);
    }
    // Abort everything first so runs stop in parallel, then join.
    for (auto& [id, ws] : doomed) ws->close();
  }

  std::vector<std::uint64_t> list() const {
    std::shared_lock lock(registry_mutex_);
    std::vector<std::uint64_t> ids;
    for (const auto& [id, ws] : workspaces_) ids.push_back(id);
    return ids;
  }

  std::shared_ptr<Workspace> find(std::uint64_t id) const {
    std::shared_lock lock(registry_mutex_);
    auto it = workspaces_.find(id);
    if (it == workspaces_.end()) throw not_found(id);
    return it->second;
  }

  const ServerConfig& config() const { return config_; }
  CpuPermits& permits() { return permits_; }

  // Runs one request object and returns its response envelope. `shutdown`
  // is reported through the flag; the transport decides what to do with it.
  Json handle(const Json& request, bool& shutdown_requested) {
    Json response;
    response["id"] = request.is_object() && request.contains("id") ? request["id"] : Json(nullptr);
    try {
      if (!request.is_object()) throw Error(ErrorKind::protocol, "request must be a JSON object");
      if (!request.contains("id") || !request["id"].is_number_integer()) {
        throw Error(ErrorKind::protocol, "request needs an integer \"id\"");
      }
      if (!request.contains("op") || !request["op"].is_string()) {
        throw Error(ErrorKind::protocol, "request needs a string \"op\"");
      }
      static const Json empty = Json::object();
      const Json& args = request.contains("args") ? request["args"] : empty;
      if (!args.is_object()) throw Error(ErrorKind::protocol, "\"args\" must be an object");
      Json result = dispatch(request["op"].get<std::string>(), args, shutdown_requested);
      response["ok"] = true;
      response["result"] = std::move(result);
    } catch (const std::exception& e) {
      response["ok"] = false;
      response["error"] = e.what();
    }
    return response;
  }

  // Envelope for a line that is not valid JSON.
  static Json malformed(const std::string& detail) {
    Json response;
    response["id"] = nullptr;
    response["ok"] = false;
    response["error"] = Error(ErrorKind::protocol, "malformed request: " + detail).what();
    return response;
  }

 private:
  static Error not_found(std::uint64_t id) {
    return Error(ErrorKind::not_found, "no workspace with id " + std::to_string(id));
  }

  static const Json& arg(const Json& args, const char* name) {
    if (!args.contains(name)) throw Error(ErrorKind::protocol, std::string("missing argument \"") + name + "\"");
    return args[name];
  }

  static std::string string_arg(const Json& args, const char* name) {
    const auto& v = arg(args, name);
    if (!v.is_string()) throw Error(ErrorKind::protocol, std::string("argument \"") + name + "\" must be a string");
    return v.get<std::string>();
  }

  static long int_arg(const Json& args, const char* name, long fallback) {
    if (!args.contains(name)) return fallback;
    const auto& v = args[name];
    if (!v.is_number_integer()) throw Error(ErrorKind::protocol, std::string("argument \"") + name + "\" must be an integer");
    return v.get<long>();
  }

  std::shared_ptr<Workspace> workspace_arg(const Json& args) const {
    const auto& v = arg(args, "ws");
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw Error(ErrorKind::protocol, "argument \"ws\" must be a non-negative integer");
    }
    return find(v.get<std::uint64_t>());
  }

  static Json number_json(double v) {
    if (std::floor(v) == v && std::fabs(v) < 9e15) return Json(static_cast<long long>(v));
    return Json(v);
  }

  static Json range_json(const engine::ParamSpec& spec) {
    switch (spec.kind) {
      case engine::ParamKind::numeric:
        return Json::array({number_json(spec.min), number_json(spec.step), number_json(spec.max)});
      case engine::ParamKind::choice: {
        Json choices = Json::array();
        for (const auto& c : spec.choices) choices.push_back(c);
        return choices;
      }
      case engine::ParamKind::boolean: return Json::array({false, true});
    }
    return Json(nullptr);
  }

  Json dispatch(const std::string& op, const Json& args, bool& shutdown_requested) {
    if (op == "new_workspace") return new_workspace();
    if (op == "delete_workspace") {
      const auto& v = arg(args, "ws");
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw Error(ErrorKind::protocol, "argument \"ws\" must be a non-negative integer");
      }
      delete_workspace(v.get<std::uint64_t>());
      return nullptr;
    }
    if (op == "delete_all_workspaces") {
      delete_all();
      return nullptr;
    }
    if (op == "list_workspaces") return list();
    if (op == "open_model") {
      workspace_arg(args)->open_model(string_arg(args, "path"));
      return nullptr;
    }
    if (op == "close_model") {
      workspace_arg(args)->close_model();
      return nullptr;
    }
    if (op == "command") {
      workspace_arg(args)->command(string_arg(args, "text"));
      return nullptr;
    }
    if (op == "report") return workspace_arg(args)->report(string_arg(args, "text"));
    if (op == "set_params_random") {
      workspace_arg(args)->set_params_random();
      return nullptr;
    }
    if (op == "get_param_names") {
      Json names = Json::array();
      for (const auto& spec : workspace_arg(args)->param_specs()) names.push_back(spec.name);
      return names;
    }
    if (op == "get_param_ranges") {
      Json ranges = Json::array();
      for (const auto& spec : workspace_arg(args)->param_specs()) ranges.push_back(range_json(spec));
      return ranges;
    }
    if (op == "schedule_reporters_and_run") {
      auto ws = workspace_arg(args);
      ScheduleRequest req;
      const auto& reporters = arg(args, "reporters");
      if (!reporters.is_array()) throw Error(ErrorKind::protocol, "argument \"reporters\" must be an array");
      for (const auto& r : reporters) {
        if (!r.is_string()) throw Error(ErrorKind::protocol, "reporters must be strings");
        req.reporters.push_back(r.get<std::string>());
      }
      req.start_at_tick = int_arg(args, "start_at_tick", 0);
      req.interval_ticks = int_arg(args, "interval_ticks", 1);
      req.stop_at_tick = int_arg(args, "stop_at_tick", -1);
      if (args.contains("go_command")) req.go_command = string_arg(args, "go_command");
      ws->schedule(std::move(req));
      return nullptr;
    }
    if (op == "get_scheduled_reporter_results") {
      Json rows = Json::array();
      for (auto& row : workspace_arg(args)->take_results()) rows.push_back(std::move(row));
      return rows;
    }
    if (op == "shutdown") {
      shutdown_requested = true;
      return nullptr;
    }
    throw Error(ErrorKind::protocol, "unknown op \"" + op + "\"");
  }

  ServerConfig config_;
  CpuPermits permits_;
  mutable std::shared_mutex registry_mutex_;
  std::map<std::uint64_t, std::shared_ptr<Workspace>> workspaces_;
  std::uint64_t next_id_ = 0;
};

}  // namespace simherd::server
