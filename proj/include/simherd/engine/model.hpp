#pragma once

#include <simherd/engine/param_spec.hpp>
#include <simherd/error.hpp>
#include <simherd/prng.hpp>

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace simherd::engine {

enum class StepResult { running, stopped };

/// Uniform interface over the headless models. A Model owns its whole state,
/// including its random stream, and is driven by one thread at a time.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string_view key() const = 0;
  virtual std::unique_ptr<Model> clone() const = 0;

  virtual void setup() = 0;

  // One tick. When a stop predicate already holds the call is a no-op that
  // returns stopped, like a `stop` at the top of a go procedure.
  virtual StepResult step() = 0;

  virtual bool should_stop() const = 0;
  virtual bool any_turtles() const = 0;

  // Agent count for a declared breed; nullopt when the model has no such breed.
  virtual std::optional<long> count(std::string_view breed) const = 0;

  // Model-specific reporters beyond ticks/count; parameters are reportable too.
  virtual std::optional<std::string> named_reporter(std::string_view name) const {
    if (const auto index = find_param(name)) return format_value(values_[*index]);
    return std::nullopt;
  }

  bool is_set_up() const { return set_up_; }
  long ticks() const { return ticks_; }

  const std::vector<ParamSpec>& param_specs() const { return specs_; }

  std::vector<std::string> param_names() const {
    std::vector<std::string> names;
    names.reserve(specs_.size());
    for (const auto& spec : specs_) names.push_back(spec.name);
    return names;
  }

  const ParamValue& get_param(std::string_view name) const { return values_[require_param(name)]; }

  void set_param(std::string_view name, const ParamValue& value) {
    const auto index = require_param(name);
    const auto& spec = specs_[index];
    switch (spec.kind) {
      case ParamKind::numeric:
        if (!std::holds_alternative<double>(value)) {
          throw Error(ErrorKind::eval, spec.name + " expects a number");
        }
        values_[index] = spec.coerce(std::get<double>(value));
        break;
      case ParamKind::choice:
        if (!std::holds_alternative<std::string>(value)) {
          throw Error(ErrorKind::eval, spec.name + " expects a string");
        }
        values_[index] = value;
        break;
      case ParamKind::boolean:
        if (!std::holds_alternative<bool>(value)) {
          throw Error(ErrorKind::eval, spec.name + " expects true or false");
        }
        values_[index] = value;
        break;
    }
  }

  // Numeric widgets get a uniform lattice draw in declaration order; choosers
  // and switches go back to their defaults.
  void set_params_random() {
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      const auto& spec = specs_[i];
      if (spec.kind == ParamKind::numeric) {
        values_[i] = spec.lattice_value(rng_.uniform_int(spec.lattice_size()));
      } else {
        values_[i] = spec.default_value;
      }
    }
  }

  void reseed(std::uint64_t seed) { rng_.seed(seed); }
  Prng& rng() { return rng_; }
  const Prng& rng() const { return rng_; }

 protected:
  explicit Model(std::vector<ParamSpec> specs) : specs_(std::move(specs)) {
    values_.reserve(specs_.size());
    for (const auto& spec : specs_) values_.push_back(spec.default_value);
  }

  long numeric(std::size_t index) const {
    return static_cast<long>(std::get<double>(values_[index]));
  }
  const ParamValue& value(std::size_t index) const { return values_[index]; }

  std::optional<std::size_t> find_param(std::string_view name) const {
    const auto it = std::find_if(specs_.begin(), specs_.end(),
                                 [&](const ParamSpec& s) { return s.name == name; });
    if (it == specs_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - specs_.begin());
  }

  std::size_t require_param(std::string_view name) const {
    if (const auto index = find_param(name)) return *index;
    throw Error(ErrorKind::eval, "unknown parameter " + std::string(name));
  }

  void require_set_up() const {
    if (!set_up_) throw Error(ErrorKind::eval, "go called before setup");
  }

  bool set_up_ = false;
  long ticks_ = 0;
  Prng rng_;

 private:
  std::vector<ParamSpec> specs_;
  std::vector<ParamValue> values_;
};

}  // namespace simherd::engine
