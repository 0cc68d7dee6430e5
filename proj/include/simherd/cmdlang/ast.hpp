#pragma once

#include <simherd/engine/param_spec.hpp>

#include <string>
#include <variant>
#include <vector>

namespace simherd::cmdlang {

struct NumberLiteral {
  double value = 0;
  friend bool operator==(const NumberLiteral&, const NumberLiteral&) = default;
};

struct StringLiteral {
  std::string value;
  friend bool operator==(const StringLiteral&, const StringLiteral&) = default;
};

struct BooleanLiteral {
  bool value = false;
  friend bool operator==(const BooleanLiteral&, const BooleanLiteral&) = default;
};

// `random N`: uniform integer in [0, N), N >= 1.
struct Random {
  long long bound = 1;
  friend bool operator==(const Random&, const Random&) = default;
};

using Expr = std::variant<NumberLiteral, StringLiteral, BooleanLiteral, Random>;

struct Command;

struct Set {
  std::string name;
  Expr value;
  friend bool operator==(const Set&, const Set&) = default;
};
struct Setup {
  friend bool operator==(const Setup&, const Setup&) = default;
};
struct Go {
  friend bool operator==(const Go&, const Go&) = default;
};
struct Stop {
  friend bool operator==(const Stop&, const Stop&) = default;
};
struct Repeat {
  long long count = 0;
  std::vector<Command> body;
  friend bool operator==(const Repeat&, const Repeat&) = default;
};
struct RandomSeed {
  long long seed = 0;
  friend bool operator==(const RandomSeed&, const RandomSeed&) = default;
};

struct Command {
  std::variant<Set, Setup, Go, Stop, Repeat, RandomSeed> node;
  friend bool operator==(const Command&, const Command&) = default;
};

struct Ticks {
  friend bool operator==(const Ticks&, const Ticks&) = default;
};
struct Count {
  std::string breed;
  friend bool operator==(const Count&, const Count&) = default;
};
struct NamedReporter {
  std::string name;
  friend bool operator==(const NamedReporter&, const NamedReporter&) = default;
};
struct NotAnyTurtles {
  friend bool operator==(const NotAnyTurtles&, const NotAnyTurtles&) = default;
};

using Reporter = std::variant<Ticks, Count, NamedReporter, NotAnyTurtles>;

// True when executing the command advances the model clock (Go anywhere in it).
inline bool is_long_running(const Command& command) {
  if (std::holds_alternative<Go>(command.node)) return true;
  if (const auto* repeat = std::get_if<Repeat>(&command.node)) {
    for (const auto& inner : repeat->body) {
      if (is_long_running(inner)) return true;
    }
  }
  return false;
}

// Canonical source text. Reparsing the output yields an equal AST.

inline std::string to_source(const Expr& expr) {
  struct Printer {
    std::string operator()(const NumberLiteral& n) const { return engine::format_number(n.value); }
    std::string operator()(const BooleanLiteral& b) const { return b.value ? "true" : "false"; }
    std::string operator()(const Random& r) const { return "random " + std::to_string(r.bound); }
    std::string operator()(const StringLiteral& s) const {
      std::string out = "\"";
      for (char c : s.value) {
        switch (c) {
          case '"': out += "\\\""; break;
          case '\\': out += "\\\\"; break;
          case '\n': out += "\\n"; break;
          case '\t': out += "\\t"; break;
          case '\r': out += "\\r"; break;
          default: out.push_back(c);
        }
      }
      return out + "\"";
    }
  };
  return std::visit(Printer{}, expr);
}

inline std::string to_source(const Command& command) {
  struct Printer {
    std::string operator()(const Set& s) const { return "set " + s.name + " " + to_source(s.value); }
    std::string operator()(const Setup&) const { return "setup"; }
    std::string operator()(const Go&) const { return "go"; }
    std::string operator()(const Stop&) const { return "stop"; }
    std::string operator()(const RandomSeed& r) const { return "random-seed " + std::to_string(r.seed); }
    std::string operator()(const Repeat& r) const {
      std::string out = "repeat " + std::to_string(r.count) + " [";
      for (std::size_t i = 0; i < r.body.size(); ++i) {
        if (i) out += " ";
        out += to_source(r.body[i]);
      }
      return out + "]";
    }
  };
  return std::visit(Printer{}, command.node);
}

inline std::string to_source(const Reporter& reporter) {
  struct Printer {
    std::string operator()(const Ticks&) const { return "ticks"; }
    std::string operator()(const Count& c) const { return "count " + c.breed; }
    std::string operator()(const NamedReporter& n) const { return n.name; }
    std::string operator()(const NotAnyTurtles&) const { return "not any? turtles"; }
  };
  return std::visit(Printer{}, reporter);
}

}  // namespace simherd::cmdlang
