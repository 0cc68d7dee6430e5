#pragma once

#include <simherd/error.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace simherd::engine {

// Integral values print without a fractional part ("100"); others use the
// shortest round-trip representation.
inline std::string format_number(double value) {
  if (std::isfinite(value) && std::floor(value) == value && std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

enum class ParamKind { numeric, choice, boolean };

using ParamValue = std::variant<double, bool, std::string>;

/// An interface widget of a model: a slider (numeric, with a (min, step, max)
/// lattice), a chooser (choice) or a switch (boolean).
struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::numeric;
  double min = 0;
  double step = 1;
  double max = 0;
  ParamValue default_value = 0.0;
  std::vector<std::string> choices;

  static ParamSpec slider(std::string name, double min, double step, double max, double def) {
    return {std::move(name), ParamKind::numeric, min, step, max, def, {}};
  }
  static ParamSpec chooser(std::string name, std::vector<std::string> choices, std::string def) {
    return {std::move(name), ParamKind::choice, 0, 0, 0, std::move(def), std::move(choices)};
  }
  static ParamSpec toggle(std::string name, bool def) {
    return {std::move(name), ParamKind::boolean, 0, 0, 0, def, {}};
  }

  // Number of lattice points min, min+step, ..., <= max.
  std::uint64_t lattice_size() const {
    return static_cast<std::uint64_t>(std::floor((max - min) / step + 1e-9)) + 1;
  }

  double lattice_value(std::uint64_t index) const { return min + static_cast<double>(index) * step; }

  // Snaps an in-range value onto the lattice, rounding toward min.
  double coerce(double value) const {
    if (!(value >= min && value <= max)) {
      throw Error(ErrorKind::range, name + " value " + format_number(value) + " outside [" + format_number(min) + ", " +
                                        format_number(max) + "]");
    }
    const double index = std::floor((value - min) / step + 1e-9);
    return std::min(max, min + index * step);
  }
};

inline std::string format_value(const ParamValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_number(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          return v;
        }
      },
      value);
}

}  // namespace simherd::engine
