#pragma once

#include <simherd/cmdlang/ast.hpp>
#include <simherd/engine/model.hpp>
#include <simherd/error.hpp>

#include <functional>
#include <string>

namespace simherd::cmdlang {

/// Callbacks the host supplies while a command runs. `abort` is polled at
/// every tick boundary inside a repeat; `tick_boundary` runs after every go,
/// letting the host publish state between ticks.
struct ExecHooks {
  std::function<bool()> abort;
  std::function<void()> tick_boundary;
};

enum class ExecOutcome { completed, aborted };

namespace detail {

inline engine::ParamValue evaluate_expr(engine::Model& model, const Expr& expr) {
  if (const auto* n = std::get_if<NumberLiteral>(&expr)) return n->value;
  if (const auto* s = std::get_if<StringLiteral>(&expr)) return s->value;
  if (const auto* b = std::get_if<BooleanLiteral>(&expr)) return b->value;
  const auto& r = std::get<Random>(expr);
  return static_cast<double>(model.rng().uniform_int(static_cast<std::uint64_t>(r.bound)));
}

inline engine::Model& require_model(engine::Model* model) {
  if (!model) throw Error(ErrorKind::no_model, "no model is open");
  return *model;
}

}  // namespace detail

// Runs a command against `model` (null when the workspace has none open).
// Failures are raised as simherd::Error; the model stays usable afterwards.
inline ExecOutcome execute(engine::Model* model, const Command& command, const ExecHooks& hooks = {}) {
  struct Visitor {
    engine::Model* model;
    const ExecHooks& hooks;

    ExecOutcome operator()(const Set& set) const {
      auto& m = detail::require_model(model);
      m.set_param(set.name, detail::evaluate_expr(m, set.value));
      return ExecOutcome::completed;
    }
    ExecOutcome operator()(const Setup&) const {
      detail::require_model(model).setup();
      return ExecOutcome::completed;
    }
    ExecOutcome operator()(const Go&) const {
      detail::require_model(model).step();
      if (hooks.tick_boundary) hooks.tick_boundary();
      return ExecOutcome::completed;
    }
    // Halting in-flight work is the host's job (it owns the abort signal).
    ExecOutcome operator()(const Stop&) const { return ExecOutcome::completed; }
    ExecOutcome operator()(const RandomSeed& seed) const {
      detail::require_model(model).reseed(static_cast<std::uint64_t>(seed.seed));
      return ExecOutcome::completed;
    }
    ExecOutcome operator()(const Repeat& repeat) const {
      for (long long i = 0; i < repeat.count; ++i) {
        for (const auto& inner : repeat.body) {
          if (hooks.abort && hooks.abort()) return ExecOutcome::aborted;
          if (std::visit(*this, inner.node) == ExecOutcome::aborted) return ExecOutcome::aborted;
        }
      }
      return ExecOutcome::completed;
    }
  };
  return std::visit(Visitor{model, hooks}, command.node);
}

inline std::string evaluate(const engine::Model* model, const Reporter& reporter) {
  if (!model) throw Error(ErrorKind::no_model, "no model is open");
  struct Visitor {
    const engine::Model& m;
    std::string operator()(const Ticks&) const {
      if (!m.is_set_up()) throw Error(ErrorKind::eval, "the tick counter has not been started yet; use setup");
      return std::to_string(m.ticks());
    }
    std::string operator()(const Count& c) const {
      if (const auto n = m.count(c.breed)) return std::to_string(*n);
      throw Error(ErrorKind::eval, "nothing named " + c.breed + " has been defined");
    }
    std::string operator()(const NotAnyTurtles&) const { return m.any_turtles() ? "false" : "true"; }
    std::string operator()(const NamedReporter& n) const {
      if (auto value = m.named_reporter(n.name)) return *value;
      throw Error(ErrorKind::eval, "nothing named " + n.name + " has been defined");
    }
  };
  return std::visit(Visitor{*model}, reporter);
}

}  // namespace simherd::cmdlang
