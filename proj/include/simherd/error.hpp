#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace simherd {

enum class ErrorKind {
  parse,
  eval,
  range,
  setup,
  not_found,
  capacity,
  busy,
  no_model,
  protocol,
  disconnected,
  degenerate,
  invalid_argument,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::eval: return "eval";
    case ErrorKind::range: return "range";
    case ErrorKind::setup: return "setup";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::busy: return "busy";
    case ErrorKind::no_model: return "no-model";
    case ErrorKind::protocol: return "protocol";
    case ErrorKind::disconnected: return "disconnected";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::invalid_argument: return "invalid-argument";
  }
  return "error";
}

// Every failure raised by the library carries a kind. Its what() string is
// "<kind>: <detail>", which is also the text sent in wire error envelopes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Recovers the kind from a "<kind>: <detail>" message; unknown prefixes map to eval.
inline ErrorKind error_kind_from_message(std::string_view message) {
  const auto colon = message.find(':');
  const auto prefix = message.substr(0, colon);
  for (auto kind : {ErrorKind::parse, ErrorKind::eval, ErrorKind::range, ErrorKind::setup,
                    ErrorKind::not_found, ErrorKind::capacity, ErrorKind::busy,
                    ErrorKind::no_model, ErrorKind::protocol, ErrorKind::disconnected,
                    ErrorKind::degenerate, ErrorKind::invalid_argument}) {
    if (to_string(kind) == prefix) return kind;
  }
  return ErrorKind::eval;
}

}  // namespace simherd
