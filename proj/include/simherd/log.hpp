#pragma once

#include <simherd/error.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace simherd {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

inline LogLevel parse_log_level(std::string_view text) {
  if (text == "debug") return LogLevel::debug;
  if (text == "info") return LogLevel::info;
  if (text == "warn" || text == "warning") return LogLevel::warn;
  if (text == "error") return LogLevel::error;
  if (text == "off") return LogLevel::off;
  throw Error(ErrorKind::invalid_argument, "unknown log level \"" + std::string(text) + "\"");
}

// Process-wide stderr logger.
class Log {
 public:
  static void set_level(LogLevel level) { level_ref().store(level); }
  static bool enabled(LogLevel level) { return level >= level_ref().load(); }

  static void write(LogLevel level, std::string_view message) {
    if (!enabled(level)) return;
    static constexpr const char* names[] = {"debug", "info", "warn", "error"};
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    std::cerr << "[simherd " << names[static_cast<int>(level)] << "] " << message << '\n';
  }

  static void debug(std::string_view m) { write(LogLevel::debug, m); }
  static void info(std::string_view m) { write(LogLevel::info, m); }
  static void warn(std::string_view m) { write(LogLevel::warn, m); }
  static void error(std::string_view m) { write(LogLevel::error, m); }

 private:
  static std::atomic<LogLevel>& level_ref() {
    static std::atomic<LogLevel> level{LogLevel::warn};
    return level;
  }
};

}  // namespace simherd
